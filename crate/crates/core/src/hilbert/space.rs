use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, AlgebraElement};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::PROJECTION_TOL;

use super::element::ModuleElement;

/// A matrix-shaped Hilbert bimodule over a finite-dimensional base `A`.
///
/// Elements are stored per block of `A` as dense complex matrices of shape
/// `block_shapes()[i]`. For `M_{n×m}(A)` block `i` has shape
/// `(n k_i, m k_i)`, laid out as an `n × m` grid of `k_i × k_i` sub-blocks.
/// For a corner `p M_N(A) q` block `i` is stored in the coordinates of
/// orthonormal bases of `range(p_i)` and `range(q_i)`, so its shape is
/// `(rank p_i, rank q_i)`.
///
/// The right algebra `B` and left algebra have block sizes
/// `cols_i` and `rows_i` respectively.
#[derive(Clone)]
pub struct ModuleSpace {
    inner: Arc<SpaceInner>,
}

struct SpaceInner {
    alg: Algebra,
    shapes: Vec<(usize, usize)>,
    kind: SpaceKind,
}

#[derive(Clone, Debug)]
pub enum SpaceKind {
    Matrix { rows: usize, cols: usize },
    Corner(Corner),
}

/// `p M_N(A) q` for projections `p, q` of `M_N(A)`.
#[derive(Clone, Debug)]
pub struct Corner {
    size: usize,
    p: AlgebraElement,
    q: AlgebraElement,
    p_range: Vec<CMat>,
    q_range: Vec<CMat>,
}

impl Corner {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn p(&self) -> &AlgebraElement {
        &self.p
    }

    pub fn q(&self) -> &AlgebraElement {
        &self.q
    }
}

fn is_projection(p: &AlgebraElement) -> bool {
    p.blocks().iter().all(|b| {
        let tol = PROJECTION_TOL * linalg::spectral_norm(b).max(1.0);
        linalg::spectral_norm(&(b - b.adjoint())) <= tol
            && linalg::spectral_norm(&(b * b - b)) <= tol
    })
}

impl ModuleSpace {
    /// `M_{rows×cols}(A)` as a right module over `M_cols(A)`.
    pub fn matrix(alg: &Algebra, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Domain("module dimensions must be positive".into()));
        }
        let shapes = alg
            .block_sizes()
            .iter()
            .map(|&k| (rows * k, cols * k))
            .collect();
        Ok(ModuleSpace {
            inner: Arc::new(SpaceInner {
                alg: alg.clone(),
                shapes,
                kind: SpaceKind::Matrix { rows, cols },
            }),
        })
    }

    /// The skew corner `p M_N(A) q`, a right module over `q M_N(A) q`.
    pub fn corner(
        alg: &Algebra,
        size: usize,
        p: &AlgebraElement,
        q: &AlgebraElement,
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::Domain("corner ambient size must be positive".into()));
        }
        let ambient = alg.matrix_algebra(size);
        for (name, e) in [("p", p), ("q", q)] {
            if e.algebra() != &ambient {
                return Err(Error::Shape(format!(
                    "{name} lives in {:?}, expected M_{size}(A) = {ambient:?}",
                    e.algebra()
                )));
            }
            if !is_projection(e) {
                return Err(Error::Domain(format!("{name} is not a projection")));
            }
        }
        if q.norm() < 0.5 {
            return Err(Error::DegenerateModule(
                "q = 0 gives the zero module over the zero corner".into(),
            ));
        }
        let p_range: Vec<CMat> = p.blocks().iter().map(linalg::projection_range).collect();
        let q_range: Vec<CMat> = q.blocks().iter().map(linalg::projection_range).collect();
        Ok(Self::corner_from_parts(
            alg,
            size,
            p.clone(),
            q.clone(),
            p_range,
            q_range,
        ))
    }

    fn corner_from_parts(
        alg: &Algebra,
        size: usize,
        p: AlgebraElement,
        q: AlgebraElement,
        p_range: Vec<CMat>,
        q_range: Vec<CMat>,
    ) -> Self {
        let shapes = p_range
            .iter()
            .zip(&q_range)
            .map(|(vp, vq)| (vp.ncols(), vq.ncols()))
            .collect();
        ModuleSpace {
            inner: Arc::new(SpaceInner {
                alg: alg.clone(),
                shapes,
                kind: SpaceKind::Corner(Corner {
                    size,
                    p,
                    q,
                    p_range,
                    q_range,
                }),
            }),
        }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.inner.alg
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.inner.kind
    }

    /// `(rows, cols)` for `M_{rows×cols}(A)`, `None` for corners.
    pub fn matrix_dims(&self) -> Option<(usize, usize)> {
        match self.inner.kind {
            SpaceKind::Matrix { rows, cols } => Some((rows, cols)),
            SpaceKind::Corner(_) => None,
        }
    }

    pub fn block_shapes(&self) -> &[(usize, usize)] {
        &self.inner.shapes
    }

    /// Complex dimension of the module.
    pub fn dimension(&self) -> usize {
        self.inner.shapes.iter().map(|(r, c)| r * c).sum()
    }

    /// The algebra `B` acting on the right.
    pub fn right_algebra(&self) -> Algebra {
        Algebra::from_sizes(self.inner.shapes.iter().map(|s| s.1).collect())
    }

    /// The algebra acting on the left (`M_n(A)`, or `p M_N(A) p` for corners).
    pub fn left_algebra(&self) -> Algebra {
        Algebra::from_sizes(self.inner.shapes.iter().map(|s| s.0).collect())
    }

    /// The column space `X^k`, in which a `k`-tuple is one element.
    /// For `M_{n×m}(A)` this is `M_{nk×m}(A)`.
    pub fn power(&self, k: usize) -> ModuleSpace {
        match &self.inner.kind {
            SpaceKind::Matrix { rows, cols } => {
                ModuleSpace::matrix(&self.inner.alg, rows * k, *cols).expect("positive dims")
            }
            SpaceKind::Corner(c) => {
                let alg = &self.inner.alg;
                let big = alg.matrix_algebra(c.size * k);
                let p_blocks =
                    c.p.blocks()
                        .iter()
                        .map(|b| linalg::block_diagonal(&vec![b; k]))
                        .collect();
                let q_blocks =
                    c.q.blocks()
                        .iter()
                        .map(|b| {
                            let n = b.nrows();
                            let mut out = CMat::zeros(n * k, n * k);
                            out.view_mut((0, 0), (n, n)).copy_from(b);
                            out
                        })
                        .collect();
                let p_range = c
                    .p_range
                    .iter()
                    .map(|v| linalg::block_diagonal(&vec![v; k]))
                    .collect();
                let q_range = c
                    .q_range
                    .iter()
                    .map(|v| {
                        let mut out = CMat::zeros(v.nrows() * k, v.ncols());
                        out.view_mut((0, 0), v.shape()).copy_from(v);
                        out
                    })
                    .collect();
                Self::corner_from_parts(
                    alg,
                    c.size * k,
                    AlgebraElement::from_blocks_unchecked(big.clone(), p_blocks),
                    AlgebraElement::from_blocks_unchecked(big, q_blocks),
                    p_range,
                    q_range,
                )
            }
        }
    }

    pub fn zero(&self) -> ModuleElement {
        let blocks = self
            .inner
            .shapes
            .iter()
            .map(|&(r, c)| CMat::zeros(r, c))
            .collect();
        ModuleElement::from_blocks_unchecked(self.clone(), blocks)
    }

    fn corner_data(&self) -> Result<&Corner> {
        match &self.inner.kind {
            SpaceKind::Corner(c) => Ok(c),
            SpaceKind::Matrix { .. } => Err(Error::Domain("not a corner space".into())),
        }
    }

    /// Embeds a corner element into the ambient algebra `M_N(A)`.
    pub fn embed(&self, x: &ModuleElement) -> Result<AlgebraElement> {
        let c = self.corner_data()?;
        if x.space() != self {
            return Err(Error::Shape("element belongs to another space".into()));
        }
        let blocks = x
            .blocks()
            .iter()
            .zip(c.p_range.iter().zip(&c.q_range))
            .map(|(b, (vp, vq))| vp * b * vq.adjoint())
            .collect();
        Ok(AlgebraElement::from_blocks_unchecked(
            c.p.algebra().clone(),
            blocks,
        ))
    }

    /// Compresses `a ∈ M_N(A)` to `p a q`, expressed in corner coordinates.
    pub fn compress(&self, a: &AlgebraElement) -> Result<ModuleElement> {
        let c = self.corner_data()?;
        if a.algebra() != c.p.algebra() {
            return Err(Error::Shape("element is not in the ambient algebra".into()));
        }
        let blocks = a
            .blocks()
            .iter()
            .zip(c.p_range.iter().zip(&c.q_range))
            .map(|(b, (vp, vq))| vp.adjoint() * b * vq)
            .collect();
        Ok(ModuleElement::from_blocks_unchecked(self.clone(), blocks))
    }
}

/// Builds the corner module `p M_N(A) q`; see [`ModuleSpace::corner`].
pub fn corner_space(
    alg: &Algebra,
    size: usize,
    p: &AlgebraElement,
    q: &AlgebraElement,
) -> Result<ModuleSpace> {
    ModuleSpace::corner(alg, size, p, q)
}

impl PartialEq for ModuleSpace {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.inner, &other.inner) {
            return true;
        }
        if self.inner.alg != other.inner.alg || self.inner.shapes != other.inner.shapes {
            return false;
        }
        match (&self.inner.kind, &other.inner.kind) {
            (SpaceKind::Matrix { .. }, SpaceKind::Matrix { .. }) => true,
            (SpaceKind::Corner(a), SpaceKind::Corner(b)) => {
                a.size == b.size && a.p == b.p && a.q == b.q
            }
            _ => false,
        }
    }
}

impl fmt::Debug for ModuleSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner.kind {
            SpaceKind::Matrix { rows, cols } => {
                write!(f, "M_{{{rows}x{cols}}}({:?})", self.inner.alg)
            }
            SpaceKind::Corner(c) => write!(
                f,
                "Corner(M_{}({:?}), shapes {:?})",
                c.size, self.inner.alg, self.inner.shapes
            ),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum SpaceWire {
    Matrix {
        algebra: Algebra,
        rows: usize,
        cols: usize,
    },
    Corner {
        algebra: Algebra,
        size: usize,
        p: AlgebraElement,
        q: AlgebraElement,
    },
}

impl TryFrom<SpaceWire> for ModuleSpace {
    type Error = Error;
    fn try_from(w: SpaceWire) -> Result<Self> {
        match w {
            SpaceWire::Matrix {
                algebra,
                rows,
                cols,
            } => ModuleSpace::matrix(&algebra, rows, cols),
            SpaceWire::Corner {
                algebra,
                size,
                p,
                q,
            } => ModuleSpace::corner(&algebra, size, &p, &q),
        }
    }
}

impl From<ModuleSpace> for SpaceWire {
    fn from(s: ModuleSpace) -> Self {
        match &s.inner.kind {
            SpaceKind::Matrix { rows, cols } => SpaceWire::Matrix {
                algebra: s.inner.alg.clone(),
                rows: *rows,
                cols: *cols,
            },
            SpaceKind::Corner(c) => SpaceWire::Corner {
                algebra: s.inner.alg.clone(),
                size: c.size,
                p: c.p.clone(),
                q: c.q.clone(),
            },
        }
    }
}

impl Serialize for ModuleSpace {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        SpaceWire::from(self.clone()).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ModuleSpace {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let wire = SpaceWire::deserialize(deserializer)?;
        ModuleSpace::try_from(wire).map_err(serde::de::Error::custom)
    }
}
