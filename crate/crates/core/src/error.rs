use thiserror::Error;

/// Errors raised by model construction, solvers and studies.
///
/// Every variant maps to a stable machine-readable reason code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("resource limit exceeded: {what} (requires {required}, limit {budget})")]
    Resource {
        what: String,
        required: u128,
        budget: u128,
    },

    #[error("self-consistent iteration did not converge after {iterations} iterations (last residual {last:.3e})")]
    NonConvergence {
        iterations: usize,
        last: f64,
        residuals: Vec<f64>,
    },

    #[error("Hartree minimizer is degenerate (gap {gap:.3e})")]
    DegenerateHartree { gap: f64 },

    #[error("quadratic Hamiltonian is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    ModelDegeneracy { min_eigenvalue: f64 },

    #[error("level {level} is outside the reliable part of the truncated spectrum ({reliable} levels available)")]
    UnreliableLevel { level: usize, reliable: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("ambiguous cluster assignment: {0}")]
    AmbiguousCluster(String),

    #[error("assertion failed: {0}")]
    Assertion(String),
}

impl Error {
    pub fn reason_code(&self) -> &'static str {
        match self {
            Error::InvalidModel(_) => "invalid_model",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Resource { .. } => "resource_limit",
            Error::NonConvergence { .. } => "non_convergence",
            Error::DegenerateHartree { .. } => "degenerate_hartree",
            Error::ModelDegeneracy { .. } => "model_degeneracy",
            Error::UnreliableLevel { .. } => "unreliable_level",
            Error::Unsupported(_) => "unsupported",
            Error::AmbiguousCluster(_) => "ambiguous_cluster",
            Error::Assertion(_) => "assertion_failed",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Memory budget for dense objects, in bytes.
pub const MEMORY_BUDGET: u128 = 2 << 30;

pub(crate) fn check_budget(what: &str, required: u128) -> Result<()> {
    if required > MEMORY_BUDGET {
        Err(Error::Resource {
            what: format!("{what} memory in bytes"),
            required,
            budget: MEMORY_BUDGET,
        })
    } else {
        Ok(())
    }
}
