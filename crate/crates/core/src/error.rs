use thiserror::Error;

/// Crate-wide error type.
///
/// `Config` maps to CLI exit code 2, everything numerical to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Parse(#[from] crate::exprlang::ParseError),

    #[error("{0}")]
    Eval(#[from] crate::exprlang::EvalError),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("point ({x}, {y}) is outside the domain (distance {distance:.3e})")]
    OutsideDomain { x: f64, y: f64, distance: f64 },

    #[error("hierarchy mismatch: {0}")]
    HierarchyMismatch(String),

    #[error("solver failed to converge: achieved relative residual {residual:.3e} after {iterations} iterations")]
    SolverNonConvergence { residual: f64, iterations: usize },

    #[error("linear algebra error: {0}")]
    Linalg(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
