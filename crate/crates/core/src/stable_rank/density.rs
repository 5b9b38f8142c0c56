use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::ModuleSpace;
use crate::sample::{random_tuple, trial_rng};

use super::formula::sr_formula;

/// Monte-Carlo estimate of how often random `k`-tuples are unimodular.
///
/// A fraction of 1.0 is evidence of density, not a proof. A fraction of 0.0
/// together with `exact_obstruction` is exact: some block of the stacked
/// tuple has fewer rows than columns, so its Gram block is singular.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub tool: String,
    pub version: String,
    pub space: ModuleSpace,
    pub k: usize,
    pub trials: usize,
    pub unimodular_count: usize,
    pub unimodular_fraction: f64,
    /// Stable rank predicted with `sr(A) = 1`; `None` for a non-full corner.
    pub predicted_sr: Option<u64>,
    pub exact_obstruction: bool,
    /// `"proved"` when the zero fraction follows from a rank count, else `"estimated"`.
    pub evidence: String,
    pub tolerance: f64,
    pub seed: u64,
}

/// `max_i ⌈cols_i / rows_i⌉` over blocks, i.e. the stable-rank formula with
/// `sr(A) = 1` applied to each block `M_{rows_i × cols_i}(C)`.
pub fn predicted_sr(space: &ModuleSpace) -> Option<u64> {
    if let Some((rows, cols)) = space.matrix_dims() {
        return sr_formula(1, rows as u64, cols as u64).ok();
    }
    let mut best = 1;
    for &(rows, cols) in space.block_shapes() {
        if cols == 0 {
            continue;
        }
        best = best.max(sr_formula(1, rows as u64, cols as u64).ok()?);
    }
    Some(best)
}

/// Whether every `k`-tuple is non-unimodular for rank reasons.
pub fn exact_obstruction(space: &ModuleSpace, k: usize) -> bool {
    space
        .block_shapes()
        .iter()
        .any(|&(rows, cols)| rows * k < cols)
}

/// Samples `trials` Gaussian `k`-tuples; trial `i` draws from stream `i` of
/// `seed`, so the report does not depend on evaluation order.
pub fn density_experiment(
    space: &ModuleSpace,
    k: usize,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<DensityReport> {
    if k == 0 || trials == 0 {
        return Err(Error::Domain("k and trials must be positive".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let unimodular_count = (0..trials as u64)
        .into_par_iter()
        .filter(|&i| {
            let t = random_tuple(space, k, &mut trial_rng(seed, i));
            t.is_unimodular(tol)
        })
        .count();
    let obstruction = exact_obstruction(space, k);
    Ok(DensityReport {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: crate::VERSION.to_string(),
        space: space.clone(),
        k,
        trials,
        unimodular_count,
        unimodular_fraction: unimodular_count as f64 / trials as f64,
        predicted_sr: predicted_sr(space),
        exact_obstruction: obstruction,
        evidence: if obstruction { "proved" } else { "estimated" }.to_string(),
        tolerance: tol,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::DEFAULT_TOL;

    fn space(blocks: &[usize], rows: usize, cols: usize) -> ModuleSpace {
        ModuleSpace::matrix(&Algebra::new(blocks.to_vec()).unwrap(), rows, cols).unwrap()
    }

    #[test]
    fn row_vector_needs_two_entries() {
        let s = space(&[1], 1, 2);
        let one = density_experiment(&s, 1, 200, 7, DEFAULT_TOL).unwrap();
        assert_eq!(one.unimodular_fraction, 0.0);
        assert!(one.exact_obstruction);
        assert_eq!(one.evidence, "proved");
        let two = density_experiment(&s, 2, 1000, 7, DEFAULT_TOL).unwrap();
        assert_eq!(two.unimodular_fraction, 1.0);
        assert!(!two.exact_obstruction);
        assert_eq!(two.predicted_sr, Some(2));
    }

    #[test]
    fn block_algebra_example() {
        let r = density_experiment(&space(&[2, 3], 2, 3), 2, 300, 1, DEFAULT_TOL).unwrap();
        assert_eq!(r.unimodular_fraction, 1.0);
        assert_eq!(r.predicted_sr, Some(2));
    }

    #[test]
    fn reports_are_reproducible() {
        let s = space(&[1, 2], 2, 5);
        let a = density_experiment(&s, 3, 200, 42, DEFAULT_TOL).unwrap();
        let b = density_experiment(&s, 3, 200, 42, DEFAULT_TOL).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn rejects_empty_runs() {
        let s = space(&[1], 1, 1);
        assert!(density_experiment(&s, 0, 1, 0, DEFAULT_TOL).is_err());
        assert!(density_experiment(&s, 1, 0, 0, DEFAULT_TOL).is_err());
    }
}
