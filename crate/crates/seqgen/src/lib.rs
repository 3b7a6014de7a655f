//! Discrete task suite: arithmetic answers decoded token by token.
//!
//! A smoothed n-gram model stands in for the language model. At each answer
//! position a per-position logit bias is refined so that the generator's
//! distribution over its top candidates moves toward the distribution induced
//! by a question-solution scorer, while staying close to the unbiased model.

mod corpus;
mod decode;
mod error;
mod generator;
pub mod io;
mod metrics;
mod refine;
mod scorer;
mod suite;
mod vocab;

pub use corpus::{build_corpus, held_out_problems, Corpus, CorpusSpec, Op, Problem};
pub use decode::{
    baseline_rerank, decode_answer, rerank, sample_answer, total_energy, Beam, Decoded,
};
pub use error::SeqgenError;
pub use generator::{fit_generator, ToyGenerator};
pub use metrics::{answer_metrics, AnswerMetrics, Prediction};
pub use refine::{
    bias_step, propose_candidates, refine_bias, refine_gradient, refine_loss, top_candidates,
    CandidateSet, ContextBias, RefineConfig,
};
pub use scorer::{
    candidate_energies, is_correct_prefix, scorer_distribution, Continuation, OracleMode,
    SolutionScorer,
};
pub use suite::{ArmReport, DecodeArm, SeqgenSettings, SeqgenTask};
pub use vocab::{number_tokens, Token, Vocabulary, DIVIDE, EOS, EQUALS, MINUS, PLUS, SEP, TIMES};
