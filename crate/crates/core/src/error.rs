use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("collision: pairwise distance {distance:e} between bodies {i} and {j}")]
    Collision { i: usize, j: usize, distance: f64 },

    #[error("angle undefined for a zero vector")]
    UndefinedAngle,

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line search failed after {iterations} iterations (best action {best_action})")]
    LineSearch { iterations: usize, best_action: f64 },

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("integration exceeded {0} steps")]
    TooManySteps(usize),

    #[error("trajectory did not end in a collision of bodies 1 and 2")]
    NotAtCollision,

    #[error("singular Jacobian in Newton iteration")]
    SingularJacobian,

    #[error("Newton iteration diverged: {0}")]
    Divergence(String),

    #[error("precondition violated: {}", format_residuals(.0))]
    Precondition(Vec<(String, f64)>),
}

fn format_residuals(residuals: &[(String, f64)]) -> String {
    residuals
        .iter()
        .map(|(name, value)| format!("{name} = {value:e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
