use thiserror::Error;

/// Errors raised by the geometry, transport and verification layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid too coarse: {0}")]
    Grid(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("truncation box excludes the base interval: {0}")]
    Truncation(String),

    #[error("warping function vanishes at t = {0}")]
    SingularPoint(f64),

    #[error("path is not causal at node {node} (integrand {residual:e})")]
    NonCausalPath { node: usize, residual: f64 },

    #[error("no causal curve joins the endpoints")]
    NoCausalCurve,

    #[error("solver did not converge: {message}")]
    Convergence {
        message: String,
        /// Bracket endpoints visited before giving up.
        history: Vec<(f64, f64)>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{len} pairs exceed the exhaustive cycle cap {cap}")]
    CapExceeded { len: usize, cap: usize },

    #[error("charged pair ({0}, {1}) has no connecting geodesic")]
    NoGeodesic(usize, usize),

    #[error("causal stratification produced no timelike sample")]
    NoTimelikeSample,

    #[error("measures are not timelike dualizable: {0}")]
    Dualizability(String),

    #[error("discretization budget {budget:e} exceeds tolerance {tol:e}")]
    Resolution { budget: f64, tol: f64 },

    #[error("mean curvature hypothesis fails: (log f)'(r0) = {log_derivative} < H/N = {required}")]
    MeanCurvature { log_derivative: f64, required: f64 },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid fiber: {0}")]
    InvalidFiber(String),
}

pub type Result<T> = std::result::Result<T, Error>;
