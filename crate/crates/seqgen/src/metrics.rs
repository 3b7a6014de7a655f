use std::collections::HashSet;

use crate::vocab::Token;
use crate::SeqgenError;

/// Best answer plus every returned beam (best first).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub best: Vec<Token>,
    pub beams: Vec<Vec<Token>>,
}

impl Prediction {
    pub fn single(answer: Vec<Token>) -> Self {
        Self {
            beams: vec![answer.clone()],
            best: answer,
        }
    }

    pub fn any_correct(&self, truth: &[Token]) -> bool {
        self.best == truth || self.beams.iter().any(|b| b == truth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnswerMetrics {
    pub accuracy_bs1: f64,
    /// Success when any returned beam matches.
    pub accuracy_bs5: f64,
    /// Distinct tokens across all best answers.
    pub vocab_size: usize,
}

/// Token-exact accuracy; no numeric normalization.
pub fn answer_metrics(
    predictions: &[Prediction],
    truth: &[Vec<Token>],
) -> Result<AnswerMetrics, SeqgenError> {
    if predictions.len() != truth.len() {
        return Err(SeqgenError::LengthMismatch {
            answers: predictions.len(),
            truths: truth.len(),
        });
    }
    let n = predictions.len().max(1) as f64;
    let bs1 = predictions
        .iter()
        .zip(truth)
        .filter(|(p, t)| &p.best == *t)
        .count();
    let bs5 = predictions
        .iter()
        .zip(truth)
        .filter(|(p, t)| p.any_correct(t))
        .count();
    let vocab: HashSet<Token> = predictions
        .iter()
        .flat_map(|p| p.best.iter().copied())
        .collect();
    Ok(AnswerMetrics {
        accuracy_bs1: bs1 as f64 / n,
        accuracy_bs5: bs5 as f64 / n,
        vocab_size: vocab.len(),
    })
}
