//! Single-coordinate reduction of unimodular tuples.
//!
//! A tuple `(x_1, ..., x_{n+1})` is reduced by coefficients `a_k` in the left
//! algebra to `(x_1 + a_1 x_{n+1}, ..., x_n + a_n x_{n+1})`. Given duals `y`
//! of `x` whose truncation is unimodular, with its own dual `z`, the
//! coefficients `a_k = <z_k, y_{n+1}>_L` always work, since then
//! `sum a_k* y_k = y_{n+1}`. [`bass_reduce`] manufactures such `y` by
//! perturbing a dual of `x`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::hilbert::{ModuleElement, ModuleTuple};
use crate::sample::{random_module_element, trial_rng};

use super::coefficients::ReductionCoefficients;
use super::PerturbationParams;

/// Allowed `‖sum <y_k, x_k> - 1‖` and `‖sum <y_k, z_k> - 1‖` on input.
pub const DUALITY_TOL: f64 = 1e-8;
/// Allowed `‖sum a_k* y_k - y_{n+1}‖` on output.
pub const TELESCOPING_TOL: f64 = 1e-7;

/// `η` of the first perturbation attempt; doubled on each retry.
pub const INITIAL_ETA: f64 = 1e-3;

/// Unimodularity margin at which an attempt is accepted without trying
/// larger `η`. Weaker successes are kept as a fallback.
pub const ACCEPT_MARGIN: f64 = 1e4;

/// `(x_1 + a_1·x_{n+1}, ..., x_n + a_n·x_{n+1})`.
pub fn warfield_forward(t: &ModuleTuple, a: &ReductionCoefficients) -> Result<ModuleTuple> {
    let n = t
        .len()
        .checked_sub(1)
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Shape("reduction needs a tuple of length at least 2".into()))?;
    if a.shape() != (n, 1) || a.space() != t.space() {
        return Err(Error::Shape(format!(
            "coefficients of shape {:?} do not reduce a {}-tuple",
            a.shape(),
            t.len()
        )));
    }
    let correction = a.apply(&ModuleTuple::single(t.last().clone()))?;
    let entries = t
        .entries()
        .iter()
        .zip(correction.entries())
        .map(|(x, c)| x.try_add(c))
        .collect::<Result<Vec<_>>>()?;
    ModuleTuple::new(entries)
}

fn unit_residual(pairing: &crate::AlgebraElement) -> f64 {
    pairing
        .try_sub(&pairing.algebra().unit())
        .expect("same algebra")
        .norm()
}

/// `‖sum_k a_k*·y_k - y_{n+1}‖` for an `n × 1` coefficient column.
pub fn telescoping_residual(a: &ReductionCoefficients, y: &ModuleTuple) -> Result<f64> {
    let n = a.shape().0;
    if y.len() != n + 1 {
        return Err(Error::Shape("dual tuple must have length n + 1".into()));
    }
    let mut acc = y.space().zero();
    for k in 0..n {
        acc = acc.try_add(&y.get(k).left_mul(&a.entry(k, 0).adjoint())?)?;
    }
    acc.distance(y.last())
}

/// Coefficients `a_k = <z_k, y_{n+1}>_L` making `warfield_forward(t, a)` unimodular.
///
/// Requires `sum_{k<=n+1} <y_k, x_k>_R = 1`, `(y_1..y_n)` unimodular and
/// `sum_{k<=n} <y_k, z_k>_R = 1`.
pub fn warfield_b_to_a(
    t: &ModuleTuple,
    y: &ModuleTuple,
    z: &ModuleTuple,
    tol: f64,
) -> Result<ReductionCoefficients> {
    let n = t.len().saturating_sub(1);
    if n == 0 || y.len() != n + 1 || z.len() != n {
        return Err(Error::Shape(format!(
            "lengths t={}, y={}, z={} do not fit the pattern n+1, n+1, n",
            t.len(),
            y.len(),
            z.len()
        )));
    }
    let space = t.space();
    if y.space() != space || z.space() != space {
        return Err(Error::Shape("t, y, z live in different spaces".into()));
    }

    let residual = unit_residual(&y.inner_right(t)?);
    if residual > DUALITY_TOL {
        return Err(Error::Residual {
            what: "sum <y_k, x_k> = 1",
            residual,
            allowed: DUALITY_TOL,
        });
    }
    let y_head = y.truncate(n)?;
    let margin = y_head.unimodularity_margin(tol);
    if margin <= 1.0 {
        return Err(Error::NotUnimodular { margin });
    }
    let residual = unit_residual(&y_head.inner_right(z)?);
    if residual > DUALITY_TOL {
        return Err(Error::Residual {
            what: "sum <y_k, z_k> = 1",
            residual,
            allowed: DUALITY_TOL,
        });
    }

    let entries = z
        .entries()
        .iter()
        .map(|zk| zk.inner_left(y.last()))
        .collect::<Result<Vec<_>>>()?;
    let a = ReductionCoefficients::from_entries(space, n, 1, &entries)?;

    let residual = telescoping_residual(&a, y)?;
    if residual > TELESCOPING_TOL {
        return Err(Error::Postcondition(format!(
            "telescoping residual {residual:.3e} exceeds {TELESCOPING_TOL:.0e}"
        )));
    }
    Ok(a)
}

/// Result of a successful [`bass_reduce`].
#[derive(Clone, Debug)]
pub struct BassReduction {
    pub coefficients: ReductionCoefficients,
    /// `warfield_forward(t, coefficients)`, verified unimodular.
    pub reduced: ModuleTuple,
    /// The dual tuple handed to [`warfield_b_to_a`].
    pub dual: ModuleTuple,
    pub telescoping_residual: f64,
    /// Perturbation size of the successful attempt.
    pub eta: f64,
    pub attempts: usize,
}

/// Randomized reduction of a unimodular `(n+1)`-tuple to a unimodular `n`-tuple.
///
/// Takes a dual `z` of `t`, perturbs `z_1..z_n` by `η·G` with Gaussian `G`
/// until the truncation is unimodular and
/// `d* = sum_{k<=n} <z̄_k, x_k> + <z_{n+1}, x_{n+1}>` is invertible, rescales
/// `y = (z̄, z_{n+1})·d^{-1}` and hands off to [`warfield_b_to_a`].
/// `η` starts at [`INITIAL_ETA`] and doubles per attempt. The first attempt
/// whose result has margin at least [`ACCEPT_MARGIN`] wins; failing that, the
/// best-conditioned success.
pub fn bass_reduce(t: &ModuleTuple, params: &PerturbationParams) -> Result<BassReduction> {
    bass_reduce_on_stream(t, params, 0)
}

pub(crate) fn bass_reduce_on_stream(
    t: &ModuleTuple,
    params: &PerturbationParams,
    stream: u64,
) -> Result<BassReduction> {
    let n = t.len().saturating_sub(1);
    if n == 0 {
        return Err(Error::Shape(
            "bass_reduce needs a tuple of length at least 2".into(),
        ));
    }
    let tol = params.tol();
    let z = t.dual_witness(tol)?;
    let mut rng = trial_rng(params.seed(), stream);
    let mut etas = Vec::with_capacity(params.max_retries());
    let mut fallback: Option<(f64, BassReduction)> = None;
    for attempt in 0..params.max_retries() {
        let eta = INITIAL_ETA * 2f64.powi(attempt as i32);
        etas.push(eta);
        if let Some(done) = try_reduce(t, &z, eta, tol, &mut rng)? {
            let done = BassReduction {
                eta,
                attempts: attempt + 1,
                ..done
            };
            let margin = done.reduced.unimodularity_margin(tol);
            if margin >= ACCEPT_MARGIN {
                return Ok(done);
            }
            if fallback.as_ref().is_none_or(|(best, _)| margin > *best) {
                fallback = Some((margin, done));
            }
        }
    }
    match fallback {
        Some((_, done)) => Ok(BassReduction {
            attempts: params.max_retries(),
            ..done
        }),
        None => Err(Error::ReductionFailed { etas }),
    }
}

fn try_reduce<R: Rng + ?Sized>(
    t: &ModuleTuple,
    z: &ModuleTuple,
    eta: f64,
    tol: f64,
    rng: &mut R,
) -> Result<Option<BassReduction>> {
    let n = t.len() - 1;
    let space = t.space();
    let mut perturbed: Vec<ModuleElement> = Vec::with_capacity(n + 1);
    for k in 0..n {
        let noise = random_module_element(space, rng).scale(eta);
        perturbed.push(z.get(k).try_add(&noise)?);
    }
    let head = ModuleTuple::new(perturbed.clone())?;
    if !head.is_unimodular(tol) {
        return Ok(None);
    }
    perturbed.push(z.last().clone());
    let z_bar = ModuleTuple::new(perturbed)?;
    let d_adj = z_bar.inner_right(t)?;
    if !d_adj.is_invertible(tol) {
        return Ok(None);
    }
    let d_inv = d_adj.adjoint().inverse_with_tol(tol)?;
    let y = z_bar.right_mul(&d_inv)?;
    let y_head = y.truncate(n)?;
    let w = match y_head.dual_witness(tol) {
        Ok(w) => w,
        Err(Error::NotUnimodular { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let coefficients = match warfield_b_to_a(t, &y, &w, tol) {
        Ok(a) => a,
        Err(Error::Residual { .. } | Error::NotUnimodular { .. } | Error::Postcondition(_)) => {
            return Ok(None)
        }
        Err(e) => return Err(e),
    };
    let reduced = warfield_forward(t, &coefficients)?;
    if !reduced.is_unimodular(tol) {
        return Ok(None);
    }
    let telescoping_residual = telescoping_residual(&coefficients, &y)?;
    Ok(Some(BassReduction {
        coefficients,
        reduced,
        dual: y,
        telescoping_residual,
        eta,
        attempts: 0,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::hilbert::{gen_oracle, ModuleSpace};
    use crate::linalg::CMat;
    use crate::DEFAULT_TOL;
    use num_complex::Complex64;

    fn scalars() -> ModuleSpace {
        ModuleSpace::matrix(&Algebra::new(vec![1]).unwrap(), 1, 1).unwrap()
    }

    fn scalar(s: &ModuleSpace, v: f64) -> ModuleElement {
        ModuleElement::from_blocks(s, vec![CMat::from_element(1, 1, Complex64::new(v, 0.0))])
            .unwrap()
    }

    fn tuple(s: &ModuleSpace, vs: &[f64]) -> ModuleTuple {
        ModuleTuple::new(vs.iter().map(|&v| scalar(s, v)).collect()).unwrap()
    }

    #[test]
    fn forward_with_zero_coefficients_or_zero_tail_is_identity() {
        let s = scalars();
        let t = tuple(&s, &[2.0, 3.0, 5.0]);
        let zero = ReductionCoefficients::zeros(&s, 2, 1);
        assert_eq!(warfield_forward(&t, &zero).unwrap(), t.truncate(2).unwrap());
        let t0 = tuple(&s, &[2.0, 3.0, 0.0]);
        let a = ReductionCoefficients::from_entries(
            &s,
            2,
            1,
            &[s.left_algebra().scalar(7.0), s.left_algebra().scalar(-1.0)],
        )
        .unwrap();
        assert_eq!(warfield_forward(&t0, &a).unwrap(), t0.truncate(2).unwrap());
        assert!(warfield_forward(&t, &ReductionCoefficients::zeros(&s, 1, 1)).is_err());
    }

    #[test]
    fn b_to_a_on_trivial_instance() {
        let s = scalars();
        let t = tuple(&s, &[1.0, 0.0]);
        let y = tuple(&s, &[1.0, 0.0]);
        let z = tuple(&s, &[1.0]);
        let a = warfield_b_to_a(&t, &y, &z, DEFAULT_TOL).unwrap();
        assert_eq!(a.adjointable_norm(), 0.0);
        assert!(warfield_forward(&t, &a).unwrap().is_unimodular(DEFAULT_TOL));
    }

    #[test]
    fn b_to_a_rejects_non_unimodular_head() {
        let s = scalars();
        let t = tuple(&s, &[0.0, 1.0]);
        let y = tuple(&s, &[0.0, 1.0]);
        let z = tuple(&s, &[1.0]);
        assert!(matches!(
            warfield_b_to_a(&t, &y, &z, DEFAULT_TOL),
            Err(Error::NotUnimodular { .. })
        ));
    }

    #[test]
    fn b_to_a_reports_residuals() {
        let s = scalars();
        let t = tuple(&s, &[1.0, 0.0]);
        let y = tuple(&s, &[0.5, 0.0]);
        let z = tuple(&s, &[2.0]);
        match warfield_b_to_a(&t, &y, &z, DEFAULT_TOL) {
            Err(Error::Residual { residual, .. }) => assert!((residual - 0.5).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        let y = tuple(&s, &[1.0, 0.0]);
        let z = tuple(&s, &[3.0]);
        assert!(matches!(
            warfield_b_to_a(&t, &y, &z, DEFAULT_TOL),
            Err(Error::Residual { .. })
        ));
    }

    #[test]
    fn bass_reduce_on_scalars() {
        let s = scalars();
        let t = tuple(&s, &[1.0, 1.0]);
        let r = bass_reduce(&t, &PerturbationParams::default()).unwrap();
        assert!(r.reduced.is_unimodular(DEFAULT_TOL));
        assert!(gen_oracle(&r.reduced, DEFAULT_TOL));
        assert!(r.telescoping_residual <= TELESCOPING_TOL);
        // 1 + a·1 must be invertible
        let a = r.coefficients.entry(0, 0).block(0)[(0, 0)];
        assert!((Complex64::new(1.0, 0.0) + a).norm() > 1e-9);
    }

    #[test]
    fn bass_reduce_fails_below_stable_rank() {
        let s = ModuleSpace::matrix(&Algebra::new(vec![1]).unwrap(), 1, 2).unwrap();
        let e1 = ModuleElement::from_blocks(
            &s,
            vec![CMat::from_row_slice(
                1,
                2,
                &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            )],
        )
        .unwrap();
        let e2 = ModuleElement::from_blocks(
            &s,
            vec![CMat::from_row_slice(
                1,
                2,
                &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            )],
        )
        .unwrap();
        let t = ModuleTuple::new(vec![e1, e2]).unwrap();
        assert!(t.is_unimodular(DEFAULT_TOL));
        let params = PerturbationParams::new(0.1, DEFAULT_TOL, 12, 3).unwrap();
        match bass_reduce(&t, &params) {
            Err(Error::ReductionFailed { etas }) => {
                assert_eq!(etas.len(), 12);
                assert_eq!(etas[0], INITIAL_ETA);
                assert_eq!(etas[3], 8.0 * INITIAL_ETA);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bass_reduce_rejects_non_unimodular_input() {
        let s = scalars();
        assert!(matches!(
            bass_reduce(&tuple(&s, &[0.0, 0.0]), &PerturbationParams::default()),
            Err(Error::NotUnimodular { .. })
        ));
    }
}
