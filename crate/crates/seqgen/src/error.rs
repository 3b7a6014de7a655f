use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeqgenError {
    #[error("corpus specification has no operators")]
    EmptyOperators,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("n-gram order must be 2 or 3, got {0}")]
    InvalidOrder(usize),
    #[error("unknown token {0:?}")]
    UnknownToken(String),
    #[error("requested {k} candidates from a vocabulary of {vocab}")]
    TooManyCandidates { k: usize, vocab: usize },
    #[error("question is malformed: {0}")]
    MalformedQuestion(String),
    #[error("refinement loss became non-finite at inner step {step}")]
    NonFiniteLoss { step: usize },
    #[error("{answers} answers for {truths} ground-truth items")]
    LengthMismatch { answers: usize, truths: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Consensus(#[from] consensus_core::Error),
}
