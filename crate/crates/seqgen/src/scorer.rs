//! Question-solution scorers over partial answers.

use consensus_core::numeric::{hash_words, softmax, unit_interval};
use consensus_core::{Condition, EnsembleSpec, Proposal, ProposalKind, Scorer, ScorerError};

use crate::corpus::Problem;
use crate::vocab::{Token, EOS, SEP};
use crate::SeqgenError;

/// Answer tokens emitted so far, ending with the candidate under evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Continuation {
    pub answer: Vec<Token>,
}

impl Continuation {
    pub fn extend(prefix: &[Token], candidate: Token) -> Self {
        let mut answer = Vec::with_capacity(prefix.len() + 1);
        answer.extend_from_slice(prefix);
        answer.push(candidate);
        Self { answer }
    }
}

impl Proposal for Continuation {
    fn kind(&self) -> ProposalKind {
        ProposalKind::Sequence
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleMode {
    Exact,
    /// Each energy is flipped with this probability, decided by a hash of
    /// `(seed, question, continuation)` so repeated queries agree.
    Noisy {
        flip_probability: f64,
        seed: u64,
    },
}

/// Energy 0 when the continuation is a prefix of the true answer followed by
/// `<eos>`, 1 otherwise.
#[derive(Debug, Clone)]
pub struct SolutionScorer {
    name: String,
    mode: OracleMode,
}

impl SolutionScorer {
    pub fn new(mode: OracleMode) -> Result<Self, SeqgenError> {
        if let OracleMode::Noisy {
            flip_probability, ..
        } = mode
        {
            if !(0.0..0.5).contains(&flip_probability) {
                return Err(SeqgenError::InvalidConfig(format!(
                    "flip probability {flip_probability} outside [0, 0.5)"
                )));
            }
        }
        Ok(Self {
            name: "solution".into(),
            mode,
        })
    }

    pub fn exact() -> Self {
        Self::new(OracleMode::Exact).expect("valid mode")
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn mode(&self) -> OracleMode {
        self.mode
    }
}

/// True when `answer` is a prefix of the answer digits followed by `<eos>`.
pub fn is_correct_prefix(problem: &Problem, answer: &[Token]) -> bool {
    let mut truth = problem.answer_tokens();
    truth.push(EOS);
    answer.len() <= truth.len() && truth.starts_with(answer)
}

impl Scorer<Continuation> for SolutionScorer {
    fn name(&self) -> &str {
        &self.name
    }

    fn accepts(&self) -> ProposalKind {
        ProposalKind::Sequence
    }

    fn energy(&self, p: &Continuation, condition: &Condition) -> Result<f64, ScorerError> {
        let question = condition
            .question()
            .ok_or_else(|| ScorerError::Condition("expected a question".into()))?;
        let problem =
            Problem::from_question(question).map_err(|e| ScorerError::Condition(e.to_string()))?;
        let mut e = if is_correct_prefix(&problem, &p.answer) {
            0.0
        } else {
            1.0
        };
        if let OracleMode::Noisy {
            flip_probability,
            seed,
        } = self.mode
        {
            let words = question
                .iter()
                .chain(std::iter::once(&SEP))
                .chain(&p.answer)
                .map(|&t| t as u64);
            if unit_interval(hash_words(seed, words)) < flip_probability {
                e = 1.0 - e;
            }
        }
        Ok(e)
    }
}

/// Composed energy of every candidate continuation of `prefix`.
pub fn candidate_energies(
    ensemble: &EnsembleSpec<Continuation>,
    question: &[Token],
    prefix: &[Token],
    candidates: &[Token],
) -> Result<Vec<f64>, SeqgenError> {
    let condition = Condition::Question(question.to_vec());
    candidates
        .iter()
        .map(|&c| {
            Ok(ensemble
                .evaluate(&Continuation::extend(prefix, c), &condition)?
                .composed
                .value())
        })
        .collect()
}

/// `q = softmax(-E / tau)` over the candidates.
pub fn scorer_distribution(
    ensemble: &EnsembleSpec<Continuation>,
    question: &[Token],
    prefix: &[Token],
    candidates: &[Token],
    temperature: f64,
) -> Result<Vec<f64>, SeqgenError> {
    if candidates.is_empty() {
        return Err(SeqgenError::InvalidConfig("no candidates".into()));
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(SeqgenError::InvalidConfig(format!(
            "temperature {temperature}"
        )));
    }
    let energies = candidate_energies(ensemble, question, prefix, candidates)?;
    let scaled: Vec<f64> = energies.iter().map(|e| -e / temperature).collect();
    Ok(softmax(&scaled))
}
