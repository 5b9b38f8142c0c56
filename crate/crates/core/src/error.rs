use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands live in different algebras or spaces, or blocks have the wrong shape.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("element is not invertible (smallest singular value {smallest_singular:.3e}, threshold {threshold:.3e})")]
    NotInvertible {
        smallest_singular: f64,
        threshold: f64,
    },

    #[error("tuple is not unimodular (invertibility margin {margin:.3e})")]
    NotUnimodular { margin: f64 },

    /// A mathematical precondition of an operation does not hold.
    #[error("domain error: {0}")]
    Domain(String),

    /// A residual-type precondition (e.g. `sum <y_k, x_k> = 1`) is violated.
    #[error("precondition failed: {what} (residual {residual:.3e}, allowed {allowed:.3e})")]
    Residual {
        what: &'static str,
        residual: f64,
        allowed: f64,
    },

    #[error("degenerate module: {0}")]
    DegenerateModule(String),

    #[error("module is not right-full")]
    NotFull,

    /// The randomized reduction step never produced a unimodular truncation.
    /// Usually means the tuple is shorter than the stable rank.
    #[error("reduction failed after {} attempts (eta schedule {etas:?})", etas.len())]
    ReductionFailed { etas: Vec<f64> },

    #[error("postcondition failed: {0}")]
    Postcondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
