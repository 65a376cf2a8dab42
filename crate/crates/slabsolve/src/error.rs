use thiserror::Error;

/// Errors produced by domain construction, discretization, solvers and
/// iteration schemes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("resolution too coarse: axis {axis} spans {extent} and gets only {subintervals} subintervals (need at least {required})")]
    ResolutionTooCoarse {
        axis: String,
        extent: f64,
        subintervals: usize,
        required: usize,
    },

    #[error("unsupported discretization: {0}")]
    Unsupported(String),

    #[error("{function}: argument {argument} outside domain ({requirement})")]
    ArgumentOutOfDomain {
        function: &'static str,
        argument: f64,
        requirement: &'static str,
    },

    #[error("linear solve did not reach tolerance {tol:e}; best residual {best_residual:e}")]
    SolveFailed { best_residual: f64, tol: f64 },

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("scheme hypothesis not satisfied: {0} (pass force=true to run anyway)")]
    HypothesisNotSatisfied(String),

    #[error("nonlinearity has no derivative evaluator, required by the contraction scheme")]
    MissingDerivative,

    #[error("monotonicity violated at iteration {iteration}: min(u_next - u_prev) = {worst:e} below tolerance -{tol:e}")]
    MonotonicityViolated {
        iteration: usize,
        worst: f64,
        tol: f64,
    },

    #[error("iteration did not converge within {max_iter} steps; last successive difference {last_difference:e}")]
    MaxIterationsExceeded {
        max_iter: usize,
        last_difference: f64,
    },

    #[error("Hoelder exponent alpha must lie in (0,1), got {0}")]
    HolderExponentOutOfRange(f64),

    #[error("subsolution check failed: -Lap(z) - z^p = {worst:e} > {tol:e} at node {node} (r = {radius})")]
    SubsolutionCheckFailed {
        worst: f64,
        tol: f64,
        node: usize,
        radius: f64,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
