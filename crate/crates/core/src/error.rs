use thiserror::Error;

/// Errors raised by model construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} = {value} is outside the admissible range {range}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("{name} = {value} is outside the function domain (must be {requirement})")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("singular configuration: {0}")]
    Singular(&'static str),

    #[error("computation error: {0}")]
    Computation(String),

    #[error("the defender's interior branch is inactive at a = {a}; use the corner (d = 0) formulas")]
    CornerBranch { a: f64 },

    #[error("equilibrium is not interior for both players; best-response slopes are undefined across the clamp")]
    CornerEquilibrium,

    #[error("fixed-point inconsistency: candidate (d, a) = ({d}, {a}) has best-response residual {residual}")]
    FixedPointInconsistency { d: f64, a: f64, residual: f64 },

    #[error("integration failure at t = {t}: last finite state (d, a) = ({d}, {a})")]
    IntegrationFailure { t: f64, d: f64, a: f64 },

    #[error("degenerate sensitivity: {0}")]
    DegenerateSensitivity(&'static str),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
