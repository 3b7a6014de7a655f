use std::any::Any;
use std::fmt;
use std::sync::Arc;

/// The family a proposal belongs to. Scorers declare which family they accept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProposalKind {
    Continuous,
    Sequence,
    WorldState,
}

pub trait Proposal {
    fn kind(&self) -> ProposalKind;
}

/// A proposal living in R^d, which makes gradient-based refinement possible.
pub trait Continuous: Proposal + Clone {
    fn coords(&self) -> &[f64];

    /// Same proposal (and metadata) at new coordinates.
    fn with_coords(&self, coords: Vec<f64>) -> Self;
}

impl Proposal for Vec<f64> {
    fn kind(&self) -> ProposalKind {
        ProposalKind::Continuous
    }
}

impl Continuous for Vec<f64> {
    fn coords(&self) -> &[f64] {
        self
    }

    fn with_coords(&self, coords: Vec<f64>) -> Self {
        coords
    }
}

/// What the ensemble is asked to agree on.
#[derive(Clone)]
pub enum Condition {
    /// A class label for conditional generation.
    ClassLabel(usize),
    /// A tokenized question; token ids come from the task vocabulary.
    Question(Vec<u32>),
    /// A task-specific goal. Scorers downcast with [`Condition::goal`].
    Goal(Arc<dyn Any + Send + Sync>),
}

impl Condition {
    pub fn goal<T: Any>(&self) -> Option<&T> {
        match self {
            Condition::Goal(g) => g.downcast_ref::<T>(),
            _ => None,
        }
    }

    pub fn class_label(&self) -> Option<usize> {
        match self {
            Condition::ClassLabel(c) => Some(*c),
            _ => None,
        }
    }

    pub fn question(&self) -> Option<&[u32]> {
        match self {
            Condition::Question(q) => Some(q),
            _ => None,
        }
    }
}

impl fmt::Debug for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::ClassLabel(c) => f.debug_tuple("ClassLabel").field(c).finish(),
            Condition::Question(q) => f.debug_tuple("Question").field(q).finish(),
            Condition::Goal(_) => f.write_str("Goal(..)"),
        }
    }
}
