use thiserror::Error;

/// Errors raised across the library.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type the
/// failing routine was instantiated with.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} has zero degree; normalized similarities are undefined")]
    ZeroDegreeNode { node: usize },

    #[error("supernode {node} has zero degree")]
    ZeroDegreeSupernode { node: usize },

    #[error("total mass is zero")]
    ZeroTotalMass,

    #[error("graph has no node masses but the explicit mass scheme was requested")]
    MissingMasses,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        message: String,
        line: usize,
        column: usize,
    },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("cluster {cluster} is empty")]
    EmptyCluster { cluster: usize },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive semi-definite (smallest eigenvalue {min_eigenvalue:e}, largest {max_eigenvalue:e})")]
    NotPsd {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("transport plan is infeasible (marginal residual {residual:e})")]
    InfeasiblePlan { residual: f64 },

    #[error("marginal {side} has non-positive mass at index {index}")]
    DegenerateMarginal { side: &'static str, index: usize },

    #[error("problem size {size} exceeds the exact solver limit {limit}")]
    SizeLimit { size: usize, limit: usize },

    #[error("cluster {cluster} receives zero mass from the plan")]
    ZeroClusterMass { cluster: usize },

    #[error("eigenvalue {index} is zero; relative error undefined")]
    ZeroEigenvalue { index: usize },

    #[error("no restart converged within {max_iter} iterations")]
    NoConvergence { max_iter: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            message: e.to_string(),
            line: e.line(),
            column: e.column(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
