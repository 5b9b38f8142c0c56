//! Finite-dimensional C*-algebras `M_{k1}(C) ⊕ ... ⊕ M_{ks}(C)`.
//!
//! An [`Algebra`] is nothing but its list of block sizes; an
//! [`AlgebraElement`] holds one dense complex matrix per block and every
//! operation acts blockwise. Spectral quantities (norm, invertibility,
//! functional calculus) are computed per block from SVDs and Hermitian
//! eigendecompositions.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::{DEFAULT_TOL, SELF_ADJOINT_TOL};

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AlgebraWire", into = "AlgebraWire")]
pub struct Algebra {
    blocks: Arc<[usize]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraWire {
    blocks: Vec<usize>,
}

impl TryFrom<AlgebraWire> for Algebra {
    type Error = Error;
    fn try_from(w: AlgebraWire) -> Result<Self> {
        Algebra::new(w.blocks)
    }
}

impl From<Algebra> for AlgebraWire {
    fn from(a: Algebra) -> Self {
        AlgebraWire {
            blocks: a.blocks.to_vec(),
        }
    }
}

impl fmt::Debug for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Algebra{:?}", &*self.blocks)
    }
}

impl Algebra {
    /// Rejects an empty block list and zero-sized blocks.
    pub fn new(blocks: impl Into<Vec<usize>>) -> Result<Self> {
        let blocks = blocks.into();
        if blocks.is_empty() {
            return Err(Error::Domain("algebra needs at least one block".into()));
        }
        if blocks.contains(&0) {
            return Err(Error::Domain("block sizes must be positive".into()));
        }
        Ok(Algebra {
            blocks: blocks.into(),
        })
    }

    /// Derived algebras (corner algebras of non-full corners) may carry
    /// zero-sized blocks so that block indices stay aligned with the base.
    pub(crate) fn from_sizes(blocks: Vec<usize>) -> Self {
        debug_assert!(!blocks.is_empty());
        Algebra {
            blocks: blocks.into(),
        }
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Complex dimension `sum k_i^2`.
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|k| k * k).sum()
    }

    /// `M_n(A)`, whose blocks have sizes `n * k_i`.
    pub fn matrix_algebra(&self, n: usize) -> Algebra {
        Algebra::from_sizes(self.blocks.iter().map(|k| n * k).collect())
    }

    pub fn unit(&self) -> AlgebraElement {
        AlgebraElement {
            alg: self.clone(),
            blocks: self.blocks.iter().map(|&k| linalg::identity(k)).collect(),
        }
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement {
            alg: self.clone(),
            blocks: self.blocks.iter().map(|&k| CMat::zeros(k, k)).collect(),
        }
    }

    pub fn scalar(&self, c: impl Into<Complex64>) -> AlgebraElement {
        self.unit().scale(c)
    }
}

/// Shorthand for [`Algebra::unit`].
pub fn make_unit(alg: &Algebra) -> AlgebraElement {
    alg.unit()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ElementWire", into = "ElementWire")]
pub struct AlgebraElement {
    alg: Algebra,
    blocks: Vec<CMat>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementWire {
    blocks: Vec<Vec<Vec<[f64; 2]>>>,
}

impl TryFrom<ElementWire> for AlgebraElement {
    type Error = Error;
    fn try_from(w: ElementWire) -> Result<Self> {
        let blocks = w
            .blocks
            .iter()
            .map(|b| linalg::from_wire(b, 0).map_err(Error::Shape))
            .collect::<Result<Vec<_>>>()?;
        let sizes = blocks.iter().map(|b| b.nrows()).collect::<Vec<_>>();
        AlgebraElement::from_blocks(&Algebra::new(sizes)?, blocks)
    }
}

impl From<AlgebraElement> for ElementWire {
    fn from(a: AlgebraElement) -> Self {
        ElementWire {
            blocks: a.blocks.iter().map(linalg::to_wire).collect(),
        }
    }
}

impl AlgebraElement {
    pub fn from_blocks(alg: &Algebra, blocks: Vec<CMat>) -> Result<Self> {
        if blocks.len() != alg.num_blocks() {
            return Err(Error::Shape(format!(
                "expected {} blocks, got {}",
                alg.num_blocks(),
                blocks.len()
            )));
        }
        for (i, (b, &k)) in blocks.iter().zip(alg.block_sizes()).enumerate() {
            if b.shape() != (k, k) {
                return Err(Error::Shape(format!(
                    "block {i} has shape {:?}, expected ({k}, {k})",
                    b.shape()
                )));
            }
        }
        Ok(AlgebraElement {
            alg: alg.clone(),
            blocks,
        })
    }

    pub(crate) fn from_blocks_unchecked(alg: Algebra, blocks: Vec<CMat>) -> Self {
        debug_assert_eq!(blocks.len(), alg.num_blocks());
        AlgebraElement { alg, blocks }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMat {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<CMat> {
        self.blocks
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.alg != other.alg {
            return Err(Error::Shape(format!("{:?} vs {:?}", self.alg, other.alg)));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Result<Self> {
        self.check_same(other)?;
        Ok(AlgebraElement {
            alg: self.alg.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    fn map(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        AlgebraElement {
            alg: self.alg.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        self.map(|a| a * c)
    }

    pub fn adjoint(&self) -> Self {
        self.map(|a| a.adjoint())
    }

    /// C*-norm: the largest singular value over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.try_sub(other)?.norm())
    }

    /// `‖a - a*‖ <= tol * ‖a‖`.
    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        let skew = self
            .blocks
            .iter()
            .map(|a| linalg::spectral_norm(&(a - a.adjoint())))
            .fold(0.0, f64::max);
        skew <= tol * self.norm()
    }

    /// Ratio `min_i σ_min(a_i) / (tol * max(1, ‖a‖))`. The element counts as
    /// invertible exactly when the margin exceeds 1.
    pub fn invertibility_margin(&self, tol: f64) -> f64 {
        let threshold = tol * self.norm().max(1.0);
        self.blocks
            .iter()
            .filter_map(linalg::smallest_singular)
            .map(|s| s / threshold)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_invertible(&self, tol: f64) -> bool {
        self.invertibility_margin(tol) > 1.0
    }

    pub fn inverse(&self) -> Result<Self> {
        self.inverse_with_tol(DEFAULT_TOL)
    }

    pub fn inverse_with_tol(&self, tol: f64) -> Result<Self> {
        self.require_invertible(tol)?;
        let blocks = self
            .blocks
            .iter()
            .map(|a| {
                a.clone().try_inverse().ok_or(Error::NotInvertible {
                    smallest_singular: 0.0,
                    threshold: tol,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AlgebraElement {
            alg: self.alg.clone(),
            blocks,
        })
    }

    fn require_invertible(&self, tol: f64) -> Result<()> {
        if self.is_invertible(tol) {
            return Ok(());
        }
        let smallest = self
            .blocks
            .iter()
            .filter_map(linalg::smallest_singular)
            .fold(f64::INFINITY, f64::min);
        Err(Error::NotInvertible {
            smallest_singular: smallest,
            threshold: tol * self.norm().max(1.0),
        })
    }

    fn require_self_adjoint(&self) -> Result<()> {
        if self.is_self_adjoint(SELF_ADJOINT_TOL) {
            Ok(())
        } else {
            Err(Error::Domain("element is not self-adjoint".into()))
        }
    }

    /// Eigenvalues (ascending) of each block of a self-adjoint element.
    pub fn eigenvalues(&self) -> Result<Vec<Vec<f64>>> {
        self.require_self_adjoint()?;
        Ok(self
            .blocks
            .iter()
            .map(|b| linalg::hermitian_eigen(b).0)
            .collect())
    }

    /// Smallest eigenvalue of the Hermitian part, over all blocks.
    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .filter_map(|b| linalg::hermitian_eigen(b).0.first().copied())
            .fold(f64::INFINITY, f64::min)
    }

    /// `b+`, the image of a self-adjoint `b` under `λ ↦ max(λ, 0)`.
    pub fn positive_part(&self) -> Result<Self> {
        self.require_self_adjoint()?;
        Ok(self.map(|b| linalg::spectral_map(b, |l| l.max(0.0))))
    }

    /// `b-`, so that `b = b+ - b-`.
    pub fn negative_part(&self) -> Result<Self> {
        self.require_self_adjoint()?;
        Ok(self.map(|b| linalg::spectral_map(b, |l| (-l).max(0.0))))
    }

    /// `a^{-1/2}` for a positive definite `a`.
    pub fn inv_sqrt(&self) -> Result<Self> {
        self.require_self_adjoint()?;
        self.require_invertible(DEFAULT_TOL)?;
        if self.min_eigenvalue() <= 0.0 {
            return Err(Error::Domain("element is not positive definite".into()));
        }
        Ok(self.map(|b| linalg::spectral_map(b, |l| l.sqrt().recip())))
    }
}
