//! Unimodular tuples, generator reduction and stable rank for matrix
//! Hilbert C*-modules over finite-dimensional C*-algebras.
//!
//! * [`algebra`]: direct sums of complex matrix algebras with spectral
//!   functional calculus.
//! * [`hilbert`]: the modules `M_{n×m}(A)` and skew corners `p M_N(A) q`,
//!   unimodularity, dual witnesses and a brute-force generator oracle.
//! * [`stable_rank`]: the stable-rank formula, Warfield reduction, the
//!   randomized Bass reduction, the padding/perturbation pipeline and
//!   Monte-Carlo density experiments.
//! * [`verify`]: the property battery behind `cstar-rank verify-suite`.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod hilbert;
mod linalg;
pub mod sample;
pub mod stable_rank;
pub mod verify;

pub use algebra::{make_unit, Algebra, AlgebraElement};
pub use error::{Error, Result};
pub use hilbert::{ModuleElement, ModuleSpace, ModuleTuple};
pub use linalg::CMat;
pub use num_complex::Complex64;

/// Relative threshold for membership in the invertible group.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Relative skew-adjointness allowed for inputs of the functional calculus.
pub const SELF_ADJOINT_TOL: f64 = 1e-10;
/// Allowed defect `‖p - p*‖`, `‖p² - p‖` for projections.
pub const PROJECTION_TOL: f64 = 1e-10;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
