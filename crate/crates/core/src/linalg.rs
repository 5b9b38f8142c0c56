//! Dense complex matrix helpers shared by the algebra and module layers.
//!
//! Every helper accepts empty (0×n, n×0, 0×0) matrices. Corner modules can
//! have blocks of rank zero, and the spectral routines in nalgebra do not
//! like those, so the guards live here once.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub(crate) fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Singular values in descending order.
pub(crate) fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub(crate) fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value of a square matrix; `None` for a 0×0 block.
pub(crate) fn smallest_singular(m: &CMat) -> Option<f64> {
    singular_values(m).last().copied()
}

pub(crate) fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of the Hermitian part of `m`; eigenvalues ascending.
pub(crate) fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Applies `f` to the spectrum of the Hermitian part of `m`.
pub(crate) fn spectral_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (values, vectors) = hermitian_eigen(m);
    let n = values.len();
    let mut scaled = vectors.clone();
    for (c, &lambda) in values.iter().enumerate() {
        let fl = f(lambda);
        for r in 0..n {
            scaled[(r, c)] *= fl;
        }
    }
    hermitian_part(&(scaled * vectors.adjoint()))
}

pub(crate) fn vstack(parts: &[&CMat]) -> CMat {
    let cols = parts.first().map_or(0, |p| p.ncols());
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut offset = 0;
    for p in parts {
        debug_assert_eq!(p.ncols(), cols);
        out.view_mut((offset, 0), (p.nrows(), cols)).copy_from(*p);
        offset += p.nrows();
    }
    out
}

pub(crate) fn block_diagonal(parts: &[&CMat]) -> CMat {
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for p in parts {
        out.view_mut((r, c), (p.nrows(), p.ncols())).copy_from(*p);
        r += p.nrows();
        c += p.ncols();
    }
    out
}

/// Orthonormal basis (as columns) of the range of a Hermitian projection.
pub(crate) fn projection_range(p: &CMat) -> CMat {
    let (values, vectors) = hermitian_eigen(p);
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > 0.5).collect();
    CMat::from_fn(p.nrows(), keep.len(), |r, c| vectors[(r, keep[c])])
}

/// Row-major nested `[re, im]` representation used by the JSON formats.
pub(crate) fn to_wire(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| [m[(r, c)].re, m[(r, c)].im])
                .collect()
        })
        .collect()
}

/// Inverse of [`to_wire`]. `cols_hint` is used for matrices with zero rows.
pub(crate) fn from_wire(rows: &[Vec<[f64; 2]>], cols_hint: usize) -> Result<CMat, String> {
    let ncols = rows.first().map_or(cols_hint, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err("ragged matrix rows".into());
    }
    Ok(CMat::from_fn(rows.len(), ncols, |r, c| {
        let [re, im] = rows[r][c];
        Complex64::new(re, im)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_blocks_are_harmless() {
        let e = CMat::zeros(0, 0);
        assert!(singular_values(&e).is_empty());
        assert_eq!(spectral_norm(&e), 0.0);
        assert_eq!(smallest_singular(&e), None);
        let (vals, vecs) = hermitian_eigen(&e);
        assert!(vals.is_empty() && vecs.is_empty());
        let thin = CMat::zeros(0, 3);
        let g = thin.adjoint() * &thin;
        assert_eq!(g.shape(), (3, 3));
    }

    #[test]
    fn singular_values_sorted_descending() {
        let m = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 3.0),
            Complex64::new(2.0, 0.0),
        ]));
        assert_eq!(singular_values(&m), vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn projection_range_of_diagonal_projection() {
        let mut p = CMat::zeros(3, 3);
        p[(0, 0)] = ONE;
        p[(2, 2)] = ONE;
        let v = projection_range(&p);
        assert_eq!(v.shape(), (3, 2));
        let back = &v * v.adjoint();
        assert!((back - p).norm() < 1e-12);
    }

    #[test]
    fn wire_roundtrip_is_exact() {
        let m = CMat::from_fn(2, 3, |r, c| {
            Complex64::new(r as f64 / 3.0, -(c as f64) * 0.1)
        });
        assert_eq!(from_wire(&to_wire(&m), 3).unwrap(), m);
        assert!(from_wire(&[vec![[0.0, 0.0]], vec![]], 1).is_err());
    }
}
