//! Seeded random sampling of algebra and module elements.
//!
//! Entries are i.i.d. standard complex Gaussians (`E|z|^2 = 1`), so every
//! proper algebraic subset (singular matrices, rank drops) is hit with
//! probability zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{Algebra, AlgebraElement};
use crate::hilbert::{ModuleElement, ModuleSpace, ModuleTuple};
use crate::linalg::CMat;
use num_complex::Complex64;

/// Generator for trial `index` of a run seeded with `seed`. Each trial gets
/// its own ChaCha stream, so trials can be evaluated in any order.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

pub fn random_element<R: Rng + ?Sized>(alg: &Algebra, rng: &mut R) -> AlgebraElement {
    let blocks = alg
        .block_sizes()
        .iter()
        .map(|&k| complex_gaussian(rng, k, k))
        .collect();
    AlgebraElement::from_blocks_unchecked(alg.clone(), blocks)
}

/// `a* a + shift`, positive definite for `shift > 0`.
pub fn random_positive<R: Rng + ?Sized>(alg: &Algebra, shift: f64, rng: &mut R) -> AlgebraElement {
    let a = random_element(alg, rng);
    let blocks = a
        .blocks()
        .iter()
        .map(|b| b.adjoint() * b + CMat::identity(b.nrows(), b.nrows()).scale(shift))
        .collect();
    AlgebraElement::from_blocks_unchecked(alg.clone(), blocks)
}

pub fn random_module_element<R: Rng + ?Sized>(space: &ModuleSpace, rng: &mut R) -> ModuleElement {
    let blocks = space
        .block_shapes()
        .iter()
        .map(|&(r, c)| complex_gaussian(rng, r, c))
        .collect();
    ModuleElement::from_blocks_unchecked(space.clone(), blocks)
}

pub fn random_tuple<R: Rng + ?Sized>(space: &ModuleSpace, k: usize, rng: &mut R) -> ModuleTuple {
    let entries = (0..k).map(|_| random_module_element(space, rng)).collect();
    ModuleTuple::new(entries).expect("k >= 1 entries of one space")
}

/// A random tuple whose stacked blocks have rank at most `rank_cap` per block,
/// built as `G * H` with thin Gaussian factors.
pub fn random_low_rank_tuple<R: Rng + ?Sized>(
    space: &ModuleSpace,
    k: usize,
    rank_cap: usize,
    rng: &mut R,
) -> ModuleTuple {
    let stacked_space = space.power(k);
    let blocks = stacked_space
        .block_shapes()
        .iter()
        .map(|&(r, c)| complex_gaussian(rng, r, rank_cap) * complex_gaussian(rng, rank_cap, c))
        .collect();
    let stacked = ModuleElement::from_blocks_unchecked(stacked_space, blocks);
    ModuleTuple::unstack(space, &stacked, k).expect("shapes follow from power(k)")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_streams_are_reproducible_and_distinct() {
        let a = complex_gaussian(&mut trial_rng(7, 3), 2, 2);
        let b = complex_gaussian(&mut trial_rng(7, 3), 2, 2);
        let c = complex_gaussian(&mut trial_rng(7, 4), 2, 2);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_has_unit_second_moment() {
        let m = complex_gaussian(&mut trial_rng(1, 0), 200, 200);
        let mean_sq = m.iter().map(|z| z.norm_sqr()).sum::<f64>() / 40_000.0;
        assert!((mean_sq - 1.0).abs() < 0.03, "{mean_sq}");
    }
}
