use thiserror::Error;

/// Errors from model evaluation, stability/soliton analysis, and simulation runs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid derivative order {0} (expected 1, 2 or 3)")]
    InvalidOrder(u32),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("grid is empty")]
    EmptyGrid,

    #[error("grid must be strictly increasing")]
    GridNotIncreasing,

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("kink solution unavailable: {0}")]
    InvalidCoefficients(String),

    #[error("invalid ring configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid run options: {0}")]
    InvalidOptions(String),

    /// A headway reached zero or went negative: the cyclic vehicle order would
    /// be violated, which the model has no semantics for.
    #[error("collision on lane {lane}, vehicle {vehicle} at t = {time} s (headway {headway} m <= 0)")]
    Collision {
        lane: usize,
        vehicle: usize,
        time: f64,
        headway: f64,
    },

    #[error("non-finite state on lane {lane} at t = {time} s")]
    NonFinite { lane: usize, time: f64 },

    #[error("measurement window [{0}, {1}] contains no samples")]
    EmptyWindow(f64, f64),
}

pub type Result<T> = std::result::Result<T, Error>;
