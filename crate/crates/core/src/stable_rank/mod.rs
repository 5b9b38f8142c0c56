//! Stable rank of matrix modules and the constructive reductions behind it.

mod coefficients;
mod density;
mod formula;
mod hv;
mod warfield;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::DEFAULT_TOL;

pub use coefficients::ReductionCoefficients;
pub use density::{density_experiment, exact_obstruction, predicted_sr, DensityReport};
pub use formula::sr_formula;
pub use hv::{hv_pad, hv_perturb, normalize, standard_padding, HvPerturbation, NORMALIZATION_TOL};
pub use warfield::{
    bass_reduce, telescoping_residual, warfield_b_to_a, warfield_forward, BassReduction,
    ACCEPT_MARGIN, DUALITY_TOL, INITIAL_ETA, TELESCOPING_TOL,
};

pub const DEFAULT_MAX_RETRIES: usize = 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationParams {
    eps: f64,
    tol: f64,
    max_retries: usize,
    seed: u64,
}

impl PerturbationParams {
    pub fn new(eps: f64, tol: f64, max_retries: usize, seed: u64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Domain(format!("eps must be positive, got {eps}")));
        }
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Domain(format!("tol must be positive, got {tol}")));
        }
        if max_retries == 0 {
            return Err(Error::Domain("max_retries must be at least 1".into()));
        }
        Ok(PerturbationParams {
            eps,
            tol,
            max_retries,
            seed,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn max_retries(&self) -> usize {
        self.max_retries
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        PerturbationParams {
            seed,
            ..self.clone()
        }
    }
}

impl Default for PerturbationParams {
    fn default() -> Self {
        PerturbationParams {
            eps: 0.1,
            tol: DEFAULT_TOL,
            max_retries: DEFAULT_MAX_RETRIES,
            seed: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(PerturbationParams::new(0.0, 1e-9, 1, 0).is_err());
        assert!(PerturbationParams::new(0.1, -1.0, 1, 0).is_err());
        assert!(PerturbationParams::new(0.1, 1e-9, 0, 0).is_err());
        assert!(PerturbationParams::new(f64::INFINITY, 1e-9, 1, 0).is_err());
        let p = PerturbationParams::new(0.5, 1e-9, 3, 9).unwrap();
        assert_eq!((p.eps(), p.max_retries(), p.seed()), (0.5, 3, 9));
    }
}
