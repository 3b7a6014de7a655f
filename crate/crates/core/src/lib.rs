//! Composition of a generator with an ensemble of scorers.
//!
//! A *generator* proposes candidate solutions; each *scorer* maps a proposal
//! and a [`Condition`] to a scalar energy where lower means better agreement.
//! The ensemble energy is the weighted sum of the individual energies, always
//! reduced in list order so results are reproducible bit for bit. The
//! [`run_consensus`] driver alternates propose, score and refine until the
//! configured number of iterations is exhausted.
//!
//! Task suites (continuous sampling, sequence decoding, manipulation) build on
//! these contracts; everything here is task agnostic.

mod compose;
mod consensus;
mod energy;
mod error;
pub mod numeric;
mod proposal;
mod scorer;
pub mod scorers;

pub use compose::{argmin_composed, compose_energies, compose_gradients};
pub use consensus::{
    run_consensus, ConsensusResult, Feedback, Generator, GradientDescent, RefinementConfig,
};
pub use energy::Energy;
pub use error::{Error, ScorerError};
pub use proposal::{Condition, Continuous, Proposal, ProposalKind};
pub use scorer::{Capability, EnsembleSpec, Evaluation, Scorer, ScorerHandle};

pub type Result<T, E = Error> = std::result::Result<T, E>;
