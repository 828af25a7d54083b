use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("state ({x}, {y}) lies outside the non-negative quadrant or is not finite")]
    Domain { x: f64, y: f64 },

    #[error("singular denominator {value:e} in {context}")]
    Singular { context: &'static str, value: f64 },

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("point ({x}, {y}) is not an equilibrium (field residual {residual:e})")]
    StaleEquilibrium { x: f64, y: f64, residual: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no sign change of {quantity} on [{lo}, {hi}]")]
    Bracket {
        quantity: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("step size underflow ({step:e}) at t = {t}")]
    Stiffness { t: f64, step: f64 },

    #[error("orbit did not return to the section: {0}")]
    NoReturn(String),

    #[error("manifold topology is indeterminate at xi = {xi}")]
    Indeterminate { xi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
