use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("{field} must be finite")]
    NotFinite { field: &'static str },
    #[error("{0}")]
    Violated(&'static str),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("failed to parse configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("failed to read configuration: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point set is empty")]
    EmptySet,
    #[error("|r| = {r} exceeds window radius {radius}")]
    OutsideWindow { r: f64, radius: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error(
        "quadrature did not converge on [{lower}, {upper}]: estimate {value} with error {error} \
         above tolerance {tolerance}"
    )]
    NonConvergence {
        lower: f64,
        upper: f64,
        value: f64,
        error: f64,
        tolerance: f64,
    },
    #[error("integrand returned a non-finite value at x = {at}")]
    NonFinite { at: f64 },
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(&'static str),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("degenerate realization: no base station and no vehicle within rho")]
    Degenerate,
    #[error("degenerate realization: serving link has empty interference (SIR = +inf)")]
    InfiniteSir,
    #[error("too many degenerate realizations: {count} of {samples}")]
    TooManyDegenerate { count: u64, samples: u64 },
    #[error("invalid simulation plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Config(#[from] ValidationError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
