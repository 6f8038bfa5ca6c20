//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised while constructing or validating model data.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    /// A parameter violated one of its documented bounds.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Two containers that must agree in size did not.
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// An argument left the mathematical domain of an operation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A day carries `delta = 1` with zero duration (or the reverse).
    #[error("day {day}: participation flag and duration disagree")]
    DurationMismatch { day: usize },
}

impl ModelError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        ModelError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        ModelError::Domain {
            op,
            reason: reason.into(),
        }
    }
}

/// Errors raised by the exact solver.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolveError {
    /// No duration assignment satisfies all constraint families for the
    /// given participation and location choice.
    #[error("conditioned problem is infeasible")]
    Infeasible,

    /// The multi-week loop hit its cap without a non-negative objective.
    #[error("no non-negative horizon found within {max_weeks} weeks")]
    NoNonNegativeHorizon { max_weeks: usize },

    /// A reference solver declined the instance (scale guard).
    #[error("unsupported by this solver: {0}")]
    Unsupported(&'static str),

    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors raised by the piecewise-linear fitting routine.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum FitError {
    #[error("fit config: {0}")]
    Config(String),

    #[error("fit target must be a Cobb-Douglas spec")]
    NotCobbDouglas,
}

/// Errors raised by the empirical layer and the estimator.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum LikelihoodError {
    /// Every alternative in a choice set was infeasible.
    #[error("degenerate choice set: all alternatives infeasible for person {person}")]
    DegenerateChoiceSet { person: u64 },

    /// An observation failed validation.
    #[error("observation for person {person}: {reason}")]
    BadObservation { person: u64, reason: String },

    /// The log-likelihood was not finite where it must be.
    #[error("non-finite log-likelihood for person {person} ({detail})")]
    NonFinite { person: u64, detail: String },

    #[error(transparent)]
    Model(#[from] ModelError),
}
