use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::PROJECTION_TOL;

use super::space::{ModuleSpace, SpaceKind, SpaceWire};

#[derive(Clone, Debug, PartialEq)]
pub struct ModuleElement {
    space: ModuleSpace,
    blocks: Vec<CMat>,
}

impl ModuleElement {
    pub fn from_blocks(space: &ModuleSpace, blocks: Vec<CMat>) -> Result<Self> {
        let shapes = space.block_shapes();
        if blocks.len() != shapes.len() {
            return Err(Error::Shape(format!(
                "expected {} blocks, got {}",
                shapes.len(),
                blocks.len()
            )));
        }
        for (i, (b, &s)) in blocks.iter().zip(shapes).enumerate() {
            if b.shape() != s {
                return Err(Error::Shape(format!(
                    "block {i} has shape {:?}, expected {s:?}",
                    b.shape()
                )));
            }
        }
        Ok(ModuleElement {
            space: space.clone(),
            blocks,
        })
    }

    pub(crate) fn from_blocks_unchecked(space: ModuleSpace, blocks: Vec<CMat>) -> Self {
        debug_assert!(blocks
            .iter()
            .zip(space.block_shapes())
            .all(|(b, &s)| b.shape() == s));
        ModuleElement { space, blocks }
    }

    pub fn space(&self) -> &ModuleSpace {
        &self.space
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    fn check_space(&self, other: &ModuleElement) -> Result<()> {
        if self.space != other.space {
            return Err(Error::Shape(format!(
                "{:?} vs {:?}",
                self.space, other.space
            )));
        }
        Ok(())
    }

    fn zip_blocks(
        &self,
        other: &ModuleElement,
        f: impl Fn(&CMat, &CMat) -> CMat,
    ) -> Result<Vec<CMat>> {
        self.check_space(other)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| f(a, b))
            .collect())
    }

    pub fn try_add(&self, other: &ModuleElement) -> Result<Self> {
        let blocks = self.zip_blocks(other, |a, b| a + b)?;
        Ok(Self::from_blocks_unchecked(self.space.clone(), blocks))
    }

    pub fn try_sub(&self, other: &ModuleElement) -> Result<Self> {
        let blocks = self.zip_blocks(other, |a, b| a - b)?;
        Ok(Self::from_blocks_unchecked(self.space.clone(), blocks))
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        Self::from_blocks_unchecked(
            self.space.clone(),
            self.blocks.iter().map(|b| b * c).collect(),
        )
    }

    /// `<x, y>_R = x* y`, valued in the right algebra.
    pub fn inner_right(&self, y: &ModuleElement) -> Result<AlgebraElement> {
        let blocks = self.zip_blocks(y, |a, b| a.adjoint() * b)?;
        Ok(AlgebraElement::from_blocks_unchecked(
            self.space.right_algebra(),
            blocks,
        ))
    }

    /// `<x, y>_L = x y*`, valued in the left algebra.
    pub fn inner_left(&self, y: &ModuleElement) -> Result<AlgebraElement> {
        let blocks = self.zip_blocks(y, |a, b| a * b.adjoint())?;
        Ok(AlgebraElement::from_blocks_unchecked(
            self.space.left_algebra(),
            blocks,
        ))
    }

    /// `a · x` for `a` in the left algebra.
    pub fn left_mul(&self, a: &AlgebraElement) -> Result<Self> {
        if a.algebra() != &self.space.left_algebra() {
            return Err(Error::Shape(
                "left factor is not in the left algebra".into(),
            ));
        }
        let blocks = a
            .blocks()
            .iter()
            .zip(&self.blocks)
            .map(|(a, x)| a * x)
            .collect();
        Ok(Self::from_blocks_unchecked(self.space.clone(), blocks))
    }

    /// `x · b` for `b` in the right algebra.
    pub fn right_mul(&self, b: &AlgebraElement) -> Result<Self> {
        if b.algebra() != &self.space.right_algebra() {
            return Err(Error::Shape(
                "right factor is not in the right algebra".into(),
            ));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(b.blocks())
            .map(|(x, b)| x * b)
            .collect();
        Ok(Self::from_blocks_unchecked(self.space.clone(), blocks))
    }

    /// `‖x‖ = ‖<x, x>_R‖^{1/2}`, i.e. the largest singular value over blocks.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &ModuleElement) -> Result<f64> {
        Ok(self.try_sub(other)?.norm())
    }
}

/// An ordered `k`-tuple `(x_1, ..., x_k)` of elements of one space.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleTuple {
    entries: Vec<ModuleElement>,
}

impl ModuleTuple {
    pub fn new(entries: Vec<ModuleElement>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::Domain("a tuple needs at least one entry".into()))?;
        if entries.iter().any(|x| x.space() != first.space()) {
            return Err(Error::Shape(
                "tuple entries live in different spaces".into(),
            ));
        }
        Ok(ModuleTuple { entries })
    }

    pub fn single(x: ModuleElement) -> Self {
        ModuleTuple { entries: vec![x] }
    }

    pub fn zeros(space: &ModuleSpace, k: usize) -> Result<Self> {
        Self::new(vec![space.zero(); k])
    }

    pub fn space(&self) -> &ModuleSpace {
        self.entries[0].space()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn entries(&self) -> &[ModuleElement] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &ModuleElement {
        &self.entries[i]
    }

    pub fn last(&self) -> &ModuleElement {
        self.entries.last().expect("non-empty")
    }

    pub fn into_entries(self) -> Vec<ModuleElement> {
        self.entries
    }

    /// First `n` entries.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::Shape(format!(
                "cannot truncate a {}-tuple to {n}",
                self.len()
            )));
        }
        Ok(ModuleTuple {
            entries: self.entries[..n].to_vec(),
        })
    }

    pub fn concat(&self, other: &ModuleTuple) -> Result<Self> {
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Self::new(entries)
    }

    pub fn try_sub(&self, other: &ModuleTuple) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::Shape("tuples of different length".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.try_sub(b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    /// Vertical concatenation, an element of `X^k` (`M_{nk×m}(A)` for matrix spaces).
    pub fn stack(&self) -> ModuleElement {
        let space = self.space().power(self.len());
        let blocks = (0..space.block_shapes().len())
            .map(|i| {
                let parts: Vec<&CMat> = self.entries.iter().map(|x| &x.blocks[i]).collect();
                linalg::vstack(&parts)
            })
            .collect();
        ModuleElement::from_blocks_unchecked(space, blocks)
    }

    /// Inverse of [`stack`](Self::stack): splits an element of `space.power(k)`.
    pub fn unstack(space: &ModuleSpace, stacked: &ModuleElement, k: usize) -> Result<Self> {
        if stacked.space() != &space.power(k) {
            return Err(Error::Shape("stacked element is not in X^k".into()));
        }
        let entries = (0..k)
            .map(|j| {
                let blocks = stacked
                    .blocks
                    .iter()
                    .zip(space.block_shapes())
                    .map(|(b, &(r, c))| b.view((j * r, 0), (r, c)).into_owned())
                    .collect();
                ModuleElement::from_blocks_unchecked(space.clone(), blocks)
            })
            .collect();
        Self::new(entries)
    }

    /// `sum_j <x_j, y_j>_R`.
    pub fn inner_right(&self, other: &ModuleTuple) -> Result<AlgebraElement> {
        if self.len() != other.len() {
            return Err(Error::Shape("tuples of different length".into()));
        }
        let mut acc = self.space().right_algebra().zero();
        for (x, y) in self.entries.iter().zip(&other.entries) {
            acc = acc.try_add(&x.inner_right(y)?)?;
        }
        Ok(acc)
    }

    /// `sum_j <x_j, x_j>_R`.
    pub fn gram(&self) -> AlgebraElement {
        self.inner_right(self).expect("tuple is consistent")
    }

    pub fn right_mul(&self, b: &AlgebraElement) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|x| x.right_mul(b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    /// Norm of the tuple as an element of `X^k`.
    pub fn norm(&self) -> f64 {
        self.gram().norm().sqrt()
    }

    pub fn distance(&self, other: &ModuleTuple) -> Result<f64> {
        Ok(self.try_sub(other)?.norm())
    }

    /// Invertibility margin of the Gram element; see
    /// [`AlgebraElement::invertibility_margin`].
    pub fn unimodularity_margin(&self, tol: f64) -> f64 {
        self.gram().invertibility_margin(tol)
    }

    /// `sum_j <x_j, x_j>_R` is invertible in `B`.
    pub fn is_unimodular(&self, tol: f64) -> bool {
        self.unimodularity_margin(tol) > 1.0
    }

    /// A tuple `y` with `sum_j <y_j, x_j>_R = 1`, namely `y_j = x_j (b^{-1})*`
    /// for `b` the Gram element.
    pub fn dual_witness(&self, tol: f64) -> Result<ModuleTuple> {
        let gram = self.gram();
        let margin = gram.invertibility_margin(tol);
        if margin <= 1.0 {
            return Err(Error::NotUnimodular { margin });
        }
        let inv_adj = gram.inverse_with_tol(tol)?.adjoint();
        self.right_mul(&inv_adj)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementWire {
    space: SpaceWire,
    blocks: Vec<Vec<Vec<[f64; 2]>>>,
}

impl Serialize for ModuleElement {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let blocks = match self.space.kind() {
            SpaceKind::Matrix { .. } => self.blocks.iter().map(linalg::to_wire).collect(),
            SpaceKind::Corner(_) => {
                let ambient = self.space.embed(self).map_err(serde::ser::Error::custom)?;
                ambient.blocks().iter().map(linalg::to_wire).collect()
            }
        };
        ElementWire {
            space: self.space.clone().into(),
            blocks,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ModuleElement {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let wire = ElementWire::deserialize(deserializer)?;
        element_from_wire(wire).map_err(serde::de::Error::custom)
    }
}

fn element_from_wire(wire: ElementWire) -> Result<ModuleElement> {
    let space = ModuleSpace::try_from(wire.space)?;
    let mats = wire
        .blocks
        .iter()
        .map(|b| linalg::from_wire(b, 0).map_err(Error::Shape))
        .collect::<Result<Vec<_>>>()?;
    match space.kind() {
        SpaceKind::Matrix { .. } => ModuleElement::from_blocks(&space, mats),
        SpaceKind::Corner(c) => {
            let ambient = AlgebraElement::from_blocks(c.p().algebra(), mats)?;
            let x = space.compress(&ambient)?;
            let back = space.embed(&x)?;
            let leak = back.distance(&ambient)?;
            if leak > PROJECTION_TOL * ambient.norm().max(1.0) {
                return Err(Error::Domain(format!(
                    "element is not in the corner p·M·q (|x - pxq| = {leak:.3e})"
                )));
            }
            Ok(x)
        }
    }
}

impl Serialize for ModuleTuple {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ModuleTuple {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<ModuleElement>::deserialize(deserializer)?;
        ModuleTuple::new(entries).map_err(serde::de::Error::custom)
    }
}
