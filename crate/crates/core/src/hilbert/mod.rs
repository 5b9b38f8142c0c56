//! Matrix-shaped Hilbert C*-bimodules.
//!
//! `X = M_{n×m}(A)` is a right module over `B = M_m(A)` with `<x,y>_R = x* y`
//! and a left module over `M_n(A)` with `<x,y>_L = x y*`. Skew corners
//! `p M_N(A) q` are handled by the same machinery after compressing to
//! orthonormal bases of the projection ranges.
//!
//! A tuple is unimodular when its Gram element `sum <x_j, x_j>_R` is
//! invertible in `B`; [`gen_oracle`] decides the generator property
//! independently from the rank of the left-action map.

mod element;
mod oracle;
mod space;

pub use element::{ModuleElement, ModuleTuple};
pub use oracle::{gen_oracle, gen_oracle_margin, is_full};
pub use space::{corner_space, Corner, ModuleSpace, SpaceKind};

/// Whether `<y, x>_R` (or `<x, y>_R` when `y_first` is false) is invertible.
pub fn has_invertible_pairing(
    x: &ModuleTuple,
    y: &ModuleTuple,
    y_first: bool,
    tol: f64,
) -> crate::Result<bool> {
    let pairing = if y_first {
        y.inner_right(x)?
    } else {
        x.inner_right(y)?
    };
    Ok(pairing.is_invertible(tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Algebra, AlgebraElement};
    use crate::linalg::{CMat, ONE};
    use crate::sample::{random_module_element, random_tuple, trial_rng};
    use crate::{Error, DEFAULT_TOL};
    use num_complex::Complex64;

    fn scalar_space(rows: usize, cols: usize) -> ModuleSpace {
        ModuleSpace::matrix(&Algebra::new(vec![1]).unwrap(), rows, cols).unwrap()
    }

    fn element(space: &ModuleSpace, entries: &[&[f64]]) -> ModuleElement {
        let m = CMat::from_fn(entries.len(), entries[0].len(), |r, c| {
            Complex64::new(entries[r][c], 0.0)
        });
        ModuleElement::from_blocks(space, vec![m]).unwrap()
    }

    fn tuple(xs: Vec<ModuleElement>) -> ModuleTuple {
        ModuleTuple::new(xs).unwrap()
    }

    #[test]
    fn inner_products_of_unit_and_zero() {
        let s = scalar_space(1, 1);
        let one = element(&s, &[&[1.0]]);
        assert_eq!(one.inner_right(&one).unwrap().block(0)[(0, 0)], ONE);
        assert_eq!(one.inner_left(&one).unwrap().block(0)[(0, 0)], ONE);
        assert_eq!(s.zero().inner_right(&one).unwrap().norm(), 0.0);
        assert_eq!(s.zero().inner_left(&one).unwrap().norm(), 0.0);
    }

    #[test]
    fn space_mismatch_is_rejected() {
        let a = scalar_space(1, 2).zero();
        let b = scalar_space(2, 1).zero();
        assert!(matches!(a.inner_right(&b), Err(Error::Shape(_))));
        assert!(ModuleTuple::new(vec![a, b]).is_err());
        assert!(ModuleTuple::new(vec![]).is_err());
    }

    #[test]
    fn derived_algebras() {
        let alg = Algebra::new(vec![1, 2]).unwrap();
        let s = ModuleSpace::matrix(&alg, 2, 3).unwrap();
        assert_eq!(s.right_algebra().block_sizes(), &[3, 6]);
        assert_eq!(s.left_algebra().block_sizes(), &[2, 4]);
        assert_eq!(s.dimension(), 6 + 24);
    }

    #[test]
    fn stack_examples() {
        let s = scalar_space(2, 2);
        let mut rng = trial_rng(11, 0);
        let x = random_module_element(&s, &mut rng);
        let single = ModuleTuple::single(x.clone());
        assert_eq!(single.stack().blocks(), x.blocks());
        let padded = tuple(vec![x.clone(), s.zero()]);
        let g = padded.stack();
        assert_eq!(g.space(), &s.power(2));
        assert!(
            g.inner_right(&g)
                .unwrap()
                .distance(&x.inner_right(&x).unwrap())
                .unwrap()
                < 1e-15
        );
        let back = ModuleTuple::unstack(&s, &g, 2).unwrap();
        assert_eq!(back, padded);
    }

    #[test]
    fn unimodular_examples() {
        let col = scalar_space(2, 1);
        assert!(ModuleTuple::single(element(&col, &[&[1.0], &[0.0]])).is_unimodular(DEFAULT_TOL));
        let row = scalar_space(1, 2);
        let e1 = element(&row, &[&[1.0, 0.0]]);
        let e2 = element(&row, &[&[0.0, 1.0]]);
        assert!(!ModuleTuple::single(e1.clone()).is_unimodular(DEFAULT_TOL));
        assert!(tuple(vec![e1, e2]).is_unimodular(DEFAULT_TOL));
        assert!(!ModuleTuple::zeros(&row, 3)
            .unwrap()
            .is_unimodular(DEFAULT_TOL));
    }

    #[test]
    fn dual_witness_examples() {
        let s = scalar_space(1, 1);
        let one = ModuleTuple::single(element(&s, &[&[1.0]]));
        assert_eq!(one.dual_witness(DEFAULT_TOL).unwrap(), one);
        let two = ModuleTuple::single(element(&s, &[&[2.0]]));
        let y = two.dual_witness(DEFAULT_TOL).unwrap();
        assert!((y.get(0).blocks()[0][(0, 0)] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let zero = ModuleTuple::single(s.zero());
        assert!(matches!(
            zero.dual_witness(DEFAULT_TOL),
            Err(Error::NotUnimodular { .. })
        ));
    }

    #[test]
    fn both_pairing_orders_follow_unimodularity() {
        let s = ModuleSpace::matrix(&Algebra::new(vec![2]).unwrap(), 2, 2).unwrap();
        let x = random_tuple(&s, 1, &mut trial_rng(3, 0));
        let y = x.dual_witness(DEFAULT_TOL).unwrap();
        assert!(has_invertible_pairing(&x, &y, true, DEFAULT_TOL).unwrap());
        assert!(has_invertible_pairing(&x, &y, false, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn fullness() {
        assert!(is_full(&scalar_space(1, 1)));
        let alg2 = Algebra::new(vec![2]).unwrap();
        assert!(is_full(&ModuleSpace::matrix(&alg2, 2, 3).unwrap()));
    }

    #[test]
    fn gen_oracle_examples() {
        let s = scalar_space(1, 1);
        assert!(gen_oracle(
            &ModuleTuple::single(element(&s, &[&[1.0]])),
            DEFAULT_TOL
        ));
        assert!(!gen_oracle(&ModuleTuple::single(s.zero()), DEFAULT_TOL));
        let row = scalar_space(1, 2);
        assert!(!gen_oracle(
            &ModuleTuple::single(element(&row, &[&[1.0, 0.0]])),
            DEFAULT_TOL
        ));
    }

    fn diag_projection(n: usize, ones: &[usize]) -> CMat {
        let mut p = CMat::zeros(n, n);
        for &i in ones {
            p[(i, i)] = ONE;
        }
        p
    }

    #[test]
    fn corner_of_scalars_recovers_the_algebra() {
        let alg = Algebra::new(vec![1]).unwrap();
        let one = alg.unit();
        let c = corner_space(&alg, 1, &one, &one).unwrap();
        assert_eq!(c.block_shapes(), &[(1, 1)]);
        let x = c.compress(&one).unwrap();
        assert!(ModuleTuple::single(x).is_unimodular(DEFAULT_TOL));
    }

    #[test]
    fn corner_rejects_bad_projections() {
        let alg = Algebra::new(vec![1]).unwrap();
        let amb = alg.matrix_algebra(2);
        let p = AlgebraElement::from_blocks(&amb, vec![diag_projection(2, &[0])]).unwrap();
        let zero = amb.zero();
        assert!(matches!(
            corner_space(&alg, 2, &p, &zero),
            Err(Error::DegenerateModule(_))
        ));
        let not_proj = amb.scalar(2.0);
        assert!(matches!(
            corner_space(&alg, 2, &not_proj, &p),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            corner_space(&alg, 3, &p, &p),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn corner_p_itself_is_unimodular() {
        let alg = Algebra::new(vec![1, 2]).unwrap();
        let amb = alg.matrix_algebra(2);
        let p = AlgebraElement::from_blocks(
            &amb,
            vec![diag_projection(2, &[1]), diag_projection(4, &[0, 3])],
        )
        .unwrap();
        let c = corner_space(&alg, 2, &p, &p).unwrap();
        let x = c.compress(&p).unwrap();
        assert!(ModuleTuple::single(x.clone()).is_unimodular(DEFAULT_TOL));
        assert!(c.embed(&x).unwrap().distance(&p).unwrap() < 1e-14);
        assert!(is_full(&c));
    }

    #[test]
    fn corner_with_empty_left_block_is_not_full() {
        let alg = Algebra::new(vec![1, 1]).unwrap();
        let amb = alg.matrix_algebra(2);
        let p =
            AlgebraElement::from_blocks(&amb, vec![diag_projection(2, &[0]), CMat::zeros(2, 2)])
                .unwrap();
        let q = amb.unit();
        let c = corner_space(&alg, 2, &p, &q).unwrap();
        assert_eq!(c.block_shapes(), &[(1, 2), (0, 2)]);
        assert!(!is_full(&c));
        let t = random_tuple(&c, 4, &mut trial_rng(5, 0));
        assert!(!t.is_unimodular(DEFAULT_TOL));
    }

    #[test]
    fn corner_power_stacks_in_reduced_coordinates() {
        let alg = Algebra::new(vec![2]).unwrap();
        let amb = alg.matrix_algebra(2);
        let p = AlgebraElement::from_blocks(&amb, vec![diag_projection(4, &[0, 1, 2])]).unwrap();
        let q = AlgebraElement::from_blocks(&amb, vec![diag_projection(4, &[1, 3])]).unwrap();
        let c = corner_space(&alg, 2, &p, &q).unwrap();
        let t = random_tuple(&c, 3, &mut trial_rng(8, 0));
        let s = t.stack();
        let sp = s.space();
        assert_eq!(sp.block_shapes(), &[(9, 2)]);
        let embedded = sp.embed(&s).unwrap();
        // embedding the stack equals stacking the embeddings in the first block column
        for j in 0..3 {
            let ej = c.embed(t.get(j)).unwrap();
            let view = embedded.block(0).view((4 * j, 0), (4, 4)).into_owned();
            assert!((view - ej.block(0)).norm() < 1e-13);
        }
        assert!(s.inner_right(&s).unwrap().distance(&t.gram()).unwrap() < 1e-13);
    }

    #[test]
    fn json_roundtrips() {
        let alg = Algebra::new(vec![1, 2]).unwrap();
        let s = ModuleSpace::matrix(&alg, 1, 2).unwrap();
        let t = random_tuple(&s, 2, &mut trial_rng(1, 1));
        let json = serde_json::to_string(&t).unwrap();
        assert!(
            json.starts_with("[{\"space\":{\"algebra\":{\"blocks\":[1,2]},\"rows\":1,\"cols\":2}")
        );
        let back: ModuleTuple = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);

        let amb = alg.matrix_algebra(2);
        let p = AlgebraElement::from_blocks(
            &amb,
            vec![diag_projection(2, &[0]), diag_projection(4, &[0, 1])],
        )
        .unwrap();
        let c = corner_space(&alg, 2, &p, &amb.unit()).unwrap();
        let x = random_module_element(&c, &mut trial_rng(1, 2));
        let back: ModuleElement =
            serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        assert!(back.distance(&x).unwrap() < 1e-13);

        let outside = serde_json::json!({
            "space": serde_json::to_value(&c).unwrap(),
            "blocks": serde_json::to_value(amb.unit()).unwrap()["blocks"],
        });
        assert!(serde_json::from_value::<ModuleElement>(outside).is_err());
    }
}
