use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain where a formula applies.
    #[error("domain error: {0}")]
    Domain(String),

    /// Margin vectors violate the basic shape/sum invariants.
    #[error("invalid margins: {0}")]
    InvalidMargins(String),

    #[error("no 0-1 matrix has these margins")]
    Infeasible,

    /// The polytope has no interior point once forced rows/columns are removed.
    #[error("transportation polytope has empty interior after reduction")]
    NoInterior,

    #[error("instance too large for {what}: {size} exceeds cap {cap}")]
    SizeLimit {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("dynamic program state space exceeded cap of {cap} states")]
    StateSpaceCap { cap: usize },

    #[error("solver did not converge after {iterations} sweeps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("solver exceeded time budget of {seconds} s (residual {residual:e})")]
    Timeout { seconds: f64, residual: f64 },
}
