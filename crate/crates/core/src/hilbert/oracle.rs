//! Brute-force linear-algebra oracles that never touch inner products of the
//! tuple under test: fullness via the span of basis inner products, and the
//! generator property via the rank of `(a_1, ..., a_k) ↦ sum a_j x_j`.

use crate::linalg::{self, CMat, ONE};

use super::element::ModuleTuple;
use super::space::ModuleSpace;

fn unit_matrix(rows: usize, cols: usize, r: usize, c: usize) -> CMat {
    let mut e = CMat::zeros(rows, cols);
    e[(r, c)] = ONE;
    e
}

fn vec_column_major(m: &CMat) -> impl Iterator<Item = num_complex::Complex64> + '_ {
    m.iter().copied()
}

/// Numerical rank with singular values compared to `tol * largest`.
fn rank(m: &CMat, tol: f64) -> usize {
    let sv = linalg::singular_values(m);
    let largest = sv.first().copied().unwrap_or(0.0);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * largest).count()
}

/// Whether `span{<e_i, e_j>_R}` over a basis of `X` is all of `B`.
pub fn is_full(space: &ModuleSpace) -> bool {
    let b_shapes: Vec<usize> = space.block_shapes().iter().map(|s| s.1).collect();
    let dim_b: usize = b_shapes.iter().map(|c| c * c).sum();
    let mut columns: Vec<Vec<num_complex::Complex64>> = Vec::new();
    let mut offset = 0;
    for &(r, c) in space.block_shapes() {
        let basis: Vec<CMat> = (0..r)
            .flat_map(|a| (0..c).map(move |b| unit_matrix(r, c, a, b)))
            .collect();
        for ei in &basis {
            for ej in &basis {
                let product = ei.adjoint() * ej;
                let mut col = vec![num_complex::Complex64::new(0.0, 0.0); dim_b];
                for (slot, z) in col[offset..offset + c * c]
                    .iter_mut()
                    .zip(vec_column_major(&product))
                {
                    *slot = z;
                }
                columns.push(col);
            }
        }
        offset += c * c;
    }
    if columns.is_empty() {
        return dim_b == 0;
    }
    let span = CMat::from_fn(dim_b, columns.len(), |i, j| columns[j][i]);
    // Entries are 0/1, so the Gram matrix has the same rank without conditioning trouble.
    rank(&(&span * span.adjoint()), 1e-9) == dim_b
}

/// Per block, the explicit matrix of `(a_1, ..., a_k) ↦ sum_j a_j x_j` from
/// `(left algebra block)^k` into the module block, with column-major `vec`.
fn generator_maps(t: &ModuleTuple) -> Vec<CMat> {
    let space = t.space();
    space
        .block_shapes()
        .iter()
        .enumerate()
        .map(|(i, &(r, c))| {
            let mut cols: Vec<CMat> = Vec::with_capacity(t.len() * r * r);
            for x in t.entries() {
                let xb = &x.blocks()[i];
                for b in 0..r {
                    for a in 0..r {
                        let image = unit_matrix(r, r, a, b) * xb;
                        cols.push(image.reshape_generic(nalgebra::Dyn(r * c), nalgebra::Dyn(1)));
                    }
                }
            }
            let mut map = CMat::zeros(r * c, cols.len());
            for (j, col) in cols.iter().enumerate() {
                map.set_column(j, &col.column(0));
            }
            map
        })
        .collect()
}

/// `min` over blocks of `σ_{dim}(L_i) / (tol * σ_max(L_i))`, where `dim` is the
/// module block dimension. The tuple generates `X` exactly when this exceeds 1.
pub fn gen_oracle_margin(t: &ModuleTuple, tol: f64) -> f64 {
    generator_maps(t)
        .iter()
        .filter(|m| m.nrows() > 0)
        .map(|m| {
            let needed = m.nrows();
            let sv = linalg::singular_values(m);
            let largest = sv.first().copied().unwrap_or(0.0);
            match sv.get(needed - 1) {
                Some(&s) if largest > 0.0 && sv.len() >= needed => s / (tol * largest),
                _ => 0.0,
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Whether the left-module span `A·x_1 + ... + A·x_k` is all of `X`,
/// decided by the rank of the explicit linear map.
pub fn gen_oracle(t: &ModuleTuple, tol: f64) -> bool {
    generator_maps(t).iter().all(|m| rank(m, tol) == m.nrows())
}
