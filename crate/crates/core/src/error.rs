use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("grid density has no positive value")]
    AllZeroGrid,

    #[error("point {x:?} lies outside the density domain")]
    OutOfDomain { x: Vec<f64> },

    #[error("total mass is not positive ({mass})")]
    ZeroMass { mass: f64 },

    #[error("the Hyvärinen rule needs an analytic (twice differentiable) density, got a grid")]
    HyvarinenOnGrid,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-finite integrand at quadrature node {node:?}")]
    IntegrandSingularity { node: Vec<f64> },

    #[error("weighted norm diverges: value {at_r} at radius {radius}, {at_2r} at twice the radius")]
    Divergence { radius: f64, at_r: f64, at_2r: f64 },

    #[error("density vanishes at {x:?}; score undefined")]
    ZeroDensity { x: Vec<f64> },

    #[error("density is negative at {x:?}; entropy undefined")]
    NegativeDensity { x: Vec<f64> },

    #[error("mode set has Lebesgue measure zero; no integrable subgradient exists")]
    MeasureZeroMode,

    #[error("entropy evaluation failed at step t = {t}: {reason}")]
    InfeasibleStep { t: f64, reason: String },

    #[error("direction is only one-sided feasible: {reason}")]
    OneSidedOnly { reason: String },

    #[error("arguments must be positive, got ({x}, {y})")]
    NonPositiveArgument { x: f64, y: f64 },

    #[error("no witness index found within K = {k} for alpha = {alpha}")]
    NoWitness { k: usize, alpha: f64 },

    #[error("density at the boundary point {y} is below the evaluation threshold")]
    BoundaryEvaluation { y: f64 },

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field: field.to_string(),
        reason: reason.into(),
    }
}
