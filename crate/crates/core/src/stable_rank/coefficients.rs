use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::hilbert::{ModuleElement, ModuleSpace, ModuleTuple};
use crate::linalg::{self, CMat};

/// An `rows × cols` matrix over the left algebra of `space`, acting as the
/// left-multiplication map `X^cols → X^rows`.
///
/// Block `i` is stored assembled, as a `(rows·R_i) × (cols·R_i)` complex
/// matrix where `R_i` is the row size of the module's block `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionCoefficients {
    space: ModuleSpace,
    rows: usize,
    cols: usize,
    blocks: Vec<CMat>,
}

impl ReductionCoefficients {
    pub fn zeros(space: &ModuleSpace, rows: usize, cols: usize) -> Self {
        let blocks = space
            .block_shapes()
            .iter()
            .map(|&(r, _)| CMat::zeros(rows * r, cols * r))
            .collect();
        ReductionCoefficients {
            space: space.clone(),
            rows,
            cols,
            blocks,
        }
    }

    pub fn identity(space: &ModuleSpace, n: usize) -> Self {
        let blocks = space
            .block_shapes()
            .iter()
            .map(|&(r, _)| linalg::identity(n * r))
            .collect();
        ReductionCoefficients {
            space: space.clone(),
            rows: n,
            cols: n,
            blocks,
        }
    }

    /// Builds the matrix from row-major entries in the left algebra.
    pub fn from_entries(
        space: &ModuleSpace,
        rows: usize,
        cols: usize,
        entries: &[AlgebraElement],
    ) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} coefficient matrix",
                entries.len()
            )));
        }
        let left = space.left_algebra();
        if entries.iter().any(|e| e.algebra() != &left) {
            return Err(Error::Shape(
                "coefficients must lie in the left algebra".into(),
            ));
        }
        let mut out = Self::zeros(space, rows, cols);
        for (i, &(r, _)) in space.block_shapes().iter().enumerate() {
            for j in 0..rows {
                for l in 0..cols {
                    out.blocks[i]
                        .view_mut((j * r, l * r), (r, r))
                        .copy_from(entries[j * cols + l].block(i));
                }
            }
        }
        Ok(out)
    }

    pub fn space(&self) -> &ModuleSpace {
        &self.space
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn entry(&self, j: usize, l: usize) -> AlgebraElement {
        let blocks = self
            .space
            .block_shapes()
            .iter()
            .zip(&self.blocks)
            .map(|(&(r, _), b)| b.view((j * r, l * r), (r, r)).into_owned())
            .collect();
        AlgebraElement::from_blocks_unchecked(self.space.left_algebra(), blocks)
    }

    /// Largest singular value of the assembled blocks: the operator norm of
    /// `X^cols → X^rows` for the module norm.
    pub fn adjointable_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max)
    }

    /// `(a·y)_j = sum_l a_{jl} · y_l`.
    pub fn apply(&self, y: &ModuleTuple) -> Result<ModuleTuple> {
        if y.space() != &self.space || y.len() != self.cols {
            return Err(Error::Shape(format!(
                "cannot apply a {}x{} coefficient matrix to a {}-tuple",
                self.rows,
                self.cols,
                y.len()
            )));
        }
        let stacked = y.stack();
        let out_space = self.space.power(self.rows);
        let blocks = self
            .blocks
            .iter()
            .zip(stacked.blocks())
            .map(|(a, s)| a * s)
            .collect();
        let image = ModuleElement::from_blocks_unchecked(out_space, blocks);
        ModuleTuple::unstack(&self.space, &image, self.rows)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ReductionCoefficients) -> Result<Self> {
        if self.space != other.space || self.cols != other.rows {
            return Err(Error::Shape("coefficient matrices do not compose".into()));
        }
        Ok(ReductionCoefficients {
            space: self.space.clone(),
            rows: self.rows,
            cols: other.cols,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// `[I_n | a]` for an `n × 1` column `a`: the map `(w_1..w_{n+1}) ↦ (w_k + a_k w_{n+1})`.
    pub fn reduction_step(a: &ReductionCoefficients) -> Result<Self> {
        if a.cols != 1 {
            return Err(Error::Shape("reduction step needs a single column".into()));
        }
        let n = a.rows;
        let blocks = a
            .space
            .block_shapes()
            .iter()
            .zip(&a.blocks)
            .map(|(&(r, _), col)| {
                let mut m = CMat::zeros(n * r, (n + 1) * r);
                m.view_mut((0, 0), (n * r, n * r))
                    .copy_from(&linalg::identity(n * r));
                m.view_mut((0, n * r), (n * r, r)).copy_from(col);
                m
            })
            .collect();
        Ok(ReductionCoefficients {
            space: a.space.clone(),
            rows: n,
            cols: n + 1,
            blocks,
        })
    }

    /// Columns `start..end`.
    pub fn columns(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.cols {
            return Err(Error::Shape(format!(
                "column range {start}..{end} of {}",
                self.cols
            )));
        }
        let blocks = self
            .space
            .block_shapes()
            .iter()
            .zip(&self.blocks)
            .map(|(&(r, _), b)| {
                b.view((0, start * r), (self.rows * r, (end - start) * r))
                    .into_owned()
            })
            .collect();
        Ok(ReductionCoefficients {
            space: self.space.clone(),
            rows: self.rows,
            cols: end - start,
            blocks,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoefficientsWire {
    space: ModuleSpace,
    shape: [usize; 2],
    blocks: Vec<Vec<Vec<[f64; 2]>>>,
}

impl Serialize for ReductionCoefficients {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        CoefficientsWire {
            space: self.space.clone(),
            shape: [self.rows, self.cols],
            blocks: self.blocks.iter().map(linalg::to_wire).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ReductionCoefficients {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = CoefficientsWire::deserialize(deserializer)?;
        let [rows, cols] = w.shape;
        let shapes = w.space.block_shapes();
        if w.blocks.len() != shapes.len() {
            return Err(D::Error::custom("wrong number of coefficient blocks"));
        }
        let mut blocks = Vec::with_capacity(shapes.len());
        for (b, &(r, _)) in w.blocks.iter().zip(shapes) {
            let m = linalg::from_wire(b, cols * r).map_err(D::Error::custom)?;
            if m.shape() != (rows * r, cols * r) {
                return Err(D::Error::custom(format!(
                    "coefficient block has shape {:?}, expected {:?}",
                    m.shape(),
                    (rows * r, cols * r)
                )));
            }
            blocks.push(m);
        }
        Ok(ReductionCoefficients {
            space: w.space,
            rows,
            cols,
            blocks,
        })
    }
}
