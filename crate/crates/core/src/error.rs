use alloc::string::String;

/// Errors raised by the simulation, the learners and the optimizers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("chain of {n_sites} sites exceeds the supported maximum of {max}")]
    DimensionOverflow { n_sites: usize, max: usize },
    #[error("a periodic chain needs at least 2 sites, got {0}")]
    TooFewSites(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("generator index {index} out of range for a set of {len}")]
    InvalidGenerator { index: usize, len: usize },
    #[error("unknown generator label `{0}`")]
    UnknownGenerator(String),
    #[error("duplicate generator label `{0}`")]
    DuplicateLabel(String),
    #[error("action {action} repeated at consecutive steps {step} and {}", step + 1)]
    RepeatedAction { step: usize, action: usize },
    #[error("value {0} outside the open unit interval")]
    OutsideUnitInterval(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("every categorical entry is masked")]
    AllMasked,
    #[error("raw durations sum to {0:e}, too small to normalize")]
    DegenerateDurations(f64),
    #[error("time step {dt} must be smaller than the total time {total}")]
    StepTooLarge { dt: f64, total: f64 },
    #[error("shape mismatch in {0}")]
    ShapeMismatch(&'static str),
    #[error("grid of {points}^{dims} evaluations exceeds the budget of {budget}")]
    GridBudget { points: usize, dims: u32, budget: u64 },
    #[error("non-finite value in {tensor} at iteration {iteration}")]
    NonFinite { iteration: usize, tensor: String },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
