use thiserror::Error;

/// Errors raised by the quasimode laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NonSpd { min_eigenvalue: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("longitudinal coordinate z = {z} must be positive")]
    NonpositiveZ { z: f64 },

    #[error("degenerate minimum: quadratic form has eigenvalue {min_eigenvalue:e}")]
    DegenerateMinimum { min_eigenvalue: f64 },

    #[error("profile does not vanish to second order at the origin (value {value:e}, gradient {gradient:e})")]
    NonzeroMinimum { value: f64, gradient: f64 },

    #[error("point |y| = {y_norm} lies outside the cone |y| < z = {z}")]
    OutOfCone { y_norm: f64, z: f64 },

    #[error("quadrature did not reach relative tolerance {target:e} (last change {achieved:e})")]
    NonconvergedQuadrature { achieved: f64, target: f64 },

    #[error("(n, p) = (2, 2) is the forbidden Strichartz endpoint")]
    ForbiddenEndpoint,

    #[error("exponent pair is not admissible: {0}")]
    NonAdmissible(String),

    #[error("gamma window is empty for n = {n}, sigma = {sigma}")]
    EmptyWindow { n: usize, sigma: f64 },

    #[error("need at least {needed} points for a slope fit, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("bound violated: {0}")]
    BoundViolated(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown profile `{0}`")]
    UnknownProfile(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
