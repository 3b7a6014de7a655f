use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffusionError {
    #[error("step {t} outside schedule range 0..={max}")]
    StepOutOfRange { t: usize, max: usize },
    #[error("class {class} outside 0..{classes}")]
    InvalidClass { class: usize, classes: usize },
    #[error("condition must be a class label")]
    MissingClassLabel,
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),
    #[error("singular step: alpha_bar is zero at t = {t}")]
    SingularStep { t: usize },
    #[error("guidance blew up (lambda = {lambda}, cfg weight = {cfg_weight}) at t = {t}")]
    GuidanceBlowup {
        lambda: f64,
        cfg_weight: f64,
        t: usize,
    },
    #[error("need at least {needed} samples to fit a covariance, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Ensemble(#[from] consensus_core::Error),
}
