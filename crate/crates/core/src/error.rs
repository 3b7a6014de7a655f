use thiserror::Error;

/// Failure reported by an individual scorer implementation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScorerError {
    #[error("scorer does not provide gradients")]
    GradientUnsupported,
    #[error("condition not understood: {0}")]
    Condition(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("scorer `{scorer}` accepts {expected:?} proposals, got {got:?}")]
    KindMismatch {
        scorer: String,
        expected: crate::ProposalKind,
        got: crate::ProposalKind,
    },
    #[error("scorer `{scorer}` produced a non-finite energy ({value})")]
    NonFinite { scorer: String, value: f64 },
    #[error("scorer `{scorer}` produced a non-finite gradient")]
    NonFiniteGradient { scorer: String },
    #[error("scorer `{scorer}` is energy-only; gradients are unavailable")]
    Capability { scorer: String },
    #[error("scorer `{scorer}` returned a gradient of length {got}, expected {expected}")]
    DimensionMismatch {
        scorer: String,
        expected: usize,
        got: usize,
    },
    #[error("scorer `{scorer}` failed: {source}")]
    Scorer {
        scorer: String,
        #[source]
        source: ScorerError,
    },
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("invalid refinement config: {0}")]
    InvalidConfig(String),
    #[error("generator failed: {0}")]
    Generator(String),
}
