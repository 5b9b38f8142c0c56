//! Padding a tuple to a unimodular one and the perturbation pipeline that
//! turns any `n`-tuple into a nearby unimodular `n`-tuple.

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::hilbert::{ModuleElement, ModuleSpace, ModuleTuple};
use crate::linalg::{self, CMat};
use crate::DEFAULT_TOL;

use super::coefficients::ReductionCoefficients;
use super::warfield::bass_reduce_on_stream;
use super::PerturbationParams;

/// Allowed `‖<u, u> - 1‖` for the padding tuple.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// The deterministic padding tuple: `r = max_i ⌈cols_i / rows_i⌉` entries
/// whose stack has an identity on top, so `<u, u>_R = 1`.
///
/// Fails with [`Error::NotFull`] when a block has no rows but some columns.
pub fn standard_padding(space: &ModuleSpace) -> Result<ModuleTuple> {
    let mut r = 1;
    for &(rows, cols) in space.block_shapes() {
        if cols == 0 {
            continue;
        }
        if rows == 0 {
            return Err(Error::NotFull);
        }
        r = r.max(cols.div_ceil(rows));
    }
    let stacked_space = space.power(r);
    let blocks = stacked_space
        .block_shapes()
        .iter()
        .map(|&(rows, cols)| {
            let mut m = CMat::zeros(rows, cols);
            m.view_mut((0, 0), (cols, cols))
                .copy_from(&linalg::identity(cols));
            m
        })
        .collect();
    let stacked = ModuleElement::from_blocks(&stacked_space, blocks)?;
    let u = ModuleTuple::unstack(space, &stacked, r)?;
    normalize(&u)
}

/// `u · <u, u>^{-1/2}`, so that the result has Gram element 1.
pub fn normalize(u: &ModuleTuple) -> Result<ModuleTuple> {
    let s = u.gram().inv_sqrt()?;
    u.right_mul(&s)
}

/// `(x_1, ..., x_n, u_1 b, ..., u_r b)` with `b = (1 - b0/eps)+` and
/// `b0 = sum <x_i, x_i>`. The result is always unimodular.
pub fn hv_pad(t: &ModuleTuple, u: &ModuleTuple, eps: f64) -> Result<ModuleTuple> {
    pad_with_b(t, u, eps).map(|(padded, _)| padded)
}

fn pad_with_b(t: &ModuleTuple, u: &ModuleTuple, eps: f64) -> Result<(ModuleTuple, AlgebraElement)> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    if t.space() != u.space() {
        return Err(Error::Shape("x and u live in different spaces".into()));
    }
    let gram_u = u.gram();
    let residual = gram_u.try_sub(&gram_u.algebra().unit())?.norm();
    if residual > NORMALIZATION_TOL {
        return Err(Error::Residual {
            what: "<u, u> = 1",
            residual,
            allowed: NORMALIZATION_TOL,
        });
    }
    let b0 = t.gram();
    let one = b0.algebra().unit();
    let b = one.try_sub(&b0.scale(1.0 / eps))?.positive_part()?;
    let padded = t.concat(&u.right_mul(&b)?)?;
    let margin = padded.unimodularity_margin(DEFAULT_TOL);
    if margin <= 1.0 {
        return Err(Error::Postcondition(format!(
            "padded tuple is not unimodular (margin {margin:.3e})"
        )));
    }
    Ok((padded, b))
}

/// Outcome of [`hv_perturb`].
#[derive(Clone, Debug)]
pub struct HvPerturbation {
    /// `x' = (x + a·y)·d^{-1}`, unimodular.
    pub perturbed: ModuleTuple,
    /// `‖x - x'‖`.
    pub distance: f64,
    /// `sqrt(eps) + eps`; `distance` is strictly below it.
    pub bound: f64,
    /// The `n × r` coefficient matrix `a`.
    pub coefficients: ReductionCoefficients,
    pub coefficient_norm: f64,
    /// Smallest integer strictly above `‖a‖ / eps`.
    pub k: f64,
    /// Length `r` of the padding tuple.
    pub padding_len: usize,
}

/// Moves an arbitrary `n`-tuple to a unimodular one within `sqrt(eps) + eps`.
///
/// Pads `x` with `y = u·b` ([`hv_pad`]), reduces the padded tuple `r` times
/// from the back with [`bass_reduce`](super::bass_reduce) to get `x + a·y`,
/// then rescales by `d^{-1}` with `d = 1 + k b`. Requires `n` at least the
/// stable rank of the space; otherwise the reduction fails.
pub fn hv_perturb(x: &ModuleTuple, params: &PerturbationParams) -> Result<HvPerturbation> {
    let eps = params.eps();
    let tol = params.tol();
    let space = x.space();
    let n = x.len();
    let u = standard_padding(space)?;
    let r = u.len();
    let (padded, b) = pad_with_b(x, &u, eps)?;

    let mut current = padded.clone();
    let mut composite = ReductionCoefficients::identity(space, n + r);
    for step in 0..r {
        let red = bass_reduce_on_stream(&current, params, step as u64)?;
        composite =
            ReductionCoefficients::reduction_step(&red.coefficients)?.compose(&composite)?;
        current = red.reduced;
    }
    let a = composite.columns(n, n + r)?;
    let y = ModuleTuple::new(padded.entries()[n..].to_vec())?;

    let coefficient_norm = a.adjointable_norm();
    let k = (coefficient_norm / eps).floor() + 1.0;
    let d = b.algebra().unit().try_add(&b.scale(k))?;
    let d_inv = d.inverse_with_tol(tol)?;
    let ay = a.apply(&y)?;
    let shifted = ModuleTuple::new(
        x.entries()
            .iter()
            .zip(ay.entries())
            .map(|(xi, ai)| xi.try_add(ai))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let perturbed = shifted.right_mul(&d_inv)?;

    let margin = perturbed.unimodularity_margin(tol);
    if margin <= 1.0 {
        return Err(Error::Postcondition(format!(
            "perturbed tuple is not unimodular (margin {margin:.3e})"
        )));
    }
    let distance = x.distance(&perturbed)?;
    let bound = eps.sqrt() + eps;
    if distance >= bound {
        return Err(Error::Postcondition(format!(
            "distance {distance:.6e} is not below sqrt(eps) + eps = {bound:.6e}"
        )));
    }
    Ok(HvPerturbation {
        perturbed,
        distance,
        bound,
        coefficients: a,
        coefficient_norm,
        k,
        padding_len: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::sample::{random_tuple, trial_rng};
    use num_complex::Complex64;

    fn space(blocks: &[usize], rows: usize, cols: usize) -> ModuleSpace {
        ModuleSpace::matrix(&Algebra::new(blocks.to_vec()).unwrap(), rows, cols).unwrap()
    }

    #[test]
    fn standard_padding_sizes() {
        assert_eq!(standard_padding(&space(&[1], 1, 1)).unwrap().len(), 1);
        assert_eq!(standard_padding(&space(&[1, 2], 1, 3)).unwrap().len(), 3);
        assert_eq!(standard_padding(&space(&[2], 2, 3)).unwrap().len(), 2);
        let u = standard_padding(&space(&[1, 3], 2, 5)).unwrap();
        assert!(u.gram().distance(&u.gram().algebra().unit()).unwrap() < 1e-14);
    }

    #[test]
    fn pad_zero_tuple_gives_u() {
        let s = space(&[1, 2], 1, 2);
        let u = standard_padding(&s).unwrap();
        let zeros = ModuleTuple::zeros(&s, 2).unwrap();
        let padded = hv_pad(&zeros, &u, 1.0).unwrap();
        assert_eq!(padded.len(), 4);
        for j in 0..2 {
            assert!(padded.get(2 + j).distance(u.get(j)).unwrap() < 1e-14);
        }
    }

    #[test]
    fn pad_large_tuple_adds_zeros() {
        let s = space(&[1], 1, 1);
        let x = ModuleTuple::single(
            ModuleElement::from_blocks(
                &s,
                vec![CMat::from_element(1, 1, Complex64::new(2.0, 0.0))],
            )
            .unwrap(),
        );
        let u = standard_padding(&s).unwrap();
        let padded = hv_pad(&x, &u, 1.0).unwrap();
        assert_eq!(padded.get(1).norm(), 0.0);
    }

    #[test]
    fn pad_rejects_unnormalized_u_and_bad_eps() {
        let s = space(&[1], 1, 1);
        let u = standard_padding(&s).unwrap();
        let x = ModuleTuple::zeros(&s, 1).unwrap();
        assert!(matches!(
            hv_pad(
                &x,
                &u.right_mul(&s.right_algebra().scalar(2.0)).unwrap(),
                1.0
            ),
            Err(Error::Residual { .. })
        ));
        assert!(hv_pad(&x, &u, 0.0).is_err());
        assert!(hv_pad(&x, &u, f64::NAN).is_err());
    }

    #[test]
    fn perturb_zero_scalar() {
        let s = space(&[1], 1, 1);
        let x = ModuleTuple::zeros(&s, 1).unwrap();
        let params = PerturbationParams::new(0.01, DEFAULT_TOL, 40, 0).unwrap();
        let out = hv_perturb(&x, &params).unwrap();
        assert!(out.perturbed.is_unimodular(DEFAULT_TOL));
        assert!(out.perturbed.norm() < 0.11, "{}", out.perturbed.norm());
    }

    #[test]
    fn perturb_random_tuple_in_block_algebra() {
        let s = space(&[1, 2], 2, 3);
        let mut rng = trial_rng(21, 0);
        let x = random_tuple(&s, 2, &mut rng);
        for eps in [0.01, 0.1, 1.0] {
            let params = PerturbationParams::new(eps, DEFAULT_TOL, 40, 9).unwrap();
            let out = hv_perturb(&x, &params).unwrap();
            assert!(out.perturbed.is_unimodular(DEFAULT_TOL));
            assert!(out.distance < out.bound);
            assert_eq!(out.coefficients.shape(), (2, 2));
        }
    }

    #[test]
    fn perturb_below_stable_rank_fails() {
        let s = space(&[1], 1, 2);
        let x = random_tuple(&s, 1, &mut trial_rng(2, 0));
        let params = PerturbationParams::new(0.1, DEFAULT_TOL, 10, 0).unwrap();
        assert!(matches!(
            hv_perturb(&x, &params),
            Err(Error::ReductionFailed { .. })
        ));
    }
}
