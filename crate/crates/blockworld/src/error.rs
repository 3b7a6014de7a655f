use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("invalid world state: {0}")]
    InvalidState(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("invalid goal: {0}")]
    InvalidGoal(String),
    #[error("invalid view: {0}")]
    InvalidView(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("need at least two objects, found {0}")]
    TooFewObjects(usize),
    #[error("no valid candidate action after {attempts} attempts")]
    Stuck { attempts: usize },
    #[error("scenario line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Consensus(#[from] consensus_core::Error),
}
