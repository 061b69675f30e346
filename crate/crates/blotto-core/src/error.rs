use thiserror::Error;

/// Errors produced by game validation, solving, and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("allocation infeasible for player {player}: sum {sum} exceeds budget {budget}")]
    InfeasibleAllocation {
        player: &'static str,
        sum: f64,
        budget: f64,
    },

    #[error("allocation has {got} entries, game has {expected} battlefields")]
    LengthMismatch { expected: usize, got: usize },

    #[error("gamma = {gamma} is not a root: residual {residual} exceeds {tolerance}")]
    NotARoot {
        gamma: f64,
        residual: f64,
        tolerance: f64,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("epsilon {eps} outside valid range (0, {max})")]
    EpsOutOfRange { eps: f64, max: f64 },

    #[error("grid must have at least 2 points, got {0}")]
    GridTooSmall(usize),

    #[error("batch size must be at least 1")]
    EmptyBatch,

    #[error("tie parameter alpha = {alpha} must lie strictly inside (0, 1) for the {kind} rule")]
    AlphaOutOfRange { alpha: f64, kind: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;
