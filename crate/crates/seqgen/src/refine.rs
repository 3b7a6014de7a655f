//! Candidate proposal and context-bias refinement.
//!
//! The loss on a candidate set is `CE(q, p) + gamma * CE(p0, p)` where `p` is
//! the generator distribution with bias, restricted to the candidates, `p0` the
//! same without bias and `q` the scorer distribution. `q` is a constant within
//! a step. Its gradient in the candidates' bias coordinates is
//! `(p - q) + gamma * (p - p0)`.

use consensus_core::numeric::softmax;
use consensus_core::EnsembleSpec;

use crate::generator::ToyGenerator;
use crate::scorer::{scorer_distribution, Continuation};
use crate::vocab::Token;
use crate::SeqgenError;

/// Additive logit bias for one decoding position.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextBias {
    pub values: Vec<f64>,
}

impl ContextBias {
    pub fn zeros(vocab: usize) -> Self {
        Self {
            values: vec![0.0; vocab],
        }
    }

    pub fn reset(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn apply(&self, logits: &[f64]) -> Vec<f64> {
        logits
            .iter()
            .zip(&self.values)
            .map(|(l, b)| l + b)
            .collect()
    }
}

/// Candidate tokens and the generator's probabilities renormalized over them.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub tokens: Vec<Token>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineConfig {
    /// Candidates per position, `K`.
    pub candidates: usize,
    /// Inner refinement steps, `M`. Zero disables the scorer.
    pub inner_iterations: usize,
    pub step_size: f64,
    /// Weight of the pull toward the unbiased generator distribution.
    pub fluency_weight: f64,
    pub temperature: f64,
    pub max_answer_len: usize,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            candidates: 8,
            inner_iterations: 10,
            step_size: 0.5,
            fluency_weight: 0.2,
            temperature: 0.3,
            max_answer_len: 12,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self, vocab: usize) -> Result<(), SeqgenError> {
        if self.candidates < 2 {
            return Err(SeqgenError::InvalidConfig("at least 2 candidates".into()));
        }
        if self.candidates > vocab {
            return Err(SeqgenError::TooManyCandidates {
                k: self.candidates,
                vocab,
            });
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.step_size) || !positive(self.temperature) {
            return Err(SeqgenError::InvalidConfig(
                "step size and temperature must be positive".into(),
            ));
        }
        if !(self.fluency_weight >= 0.0 && self.fluency_weight.is_finite()) {
            return Err(SeqgenError::InvalidConfig(
                "fluency weight must be >= 0".into(),
            ));
        }
        if self.max_answer_len == 0 {
            return Err(SeqgenError::InvalidConfig("max answer length 0".into()));
        }
        Ok(())
    }
}

/// Top `k` tokens by `logits + bias` (ties to the lower id) with `p` the
/// softmax restricted to them.
pub fn top_candidates(
    logits: &[f64],
    bias: &ContextBias,
    k: usize,
) -> Result<CandidateSet, SeqgenError> {
    if k > logits.len() {
        return Err(SeqgenError::TooManyCandidates {
            k,
            vocab: logits.len(),
        });
    }
    let scores = bias.apply(logits);
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(k);
    let probs = softmax(&order.iter().map(|&i| scores[i]).collect::<Vec<_>>());
    Ok(CandidateSet {
        tokens: order.into_iter().map(|i| i as Token).collect(),
        probs,
    })
}

pub fn propose_candidates(
    generator: &ToyGenerator,
    context: &[Token],
    bias: &ContextBias,
    k: usize,
) -> Result<CandidateSet, SeqgenError> {
    top_candidates(generator.logits(context), bias, k)
}

fn restricted(logits: &[f64], bias: &[f64], tokens: &[Token]) -> Vec<f64> {
    softmax(
        &tokens
            .iter()
            .map(|&t| logits[t as usize] + bias[t as usize])
            .collect::<Vec<_>>(),
    )
}

/// `CE(q, p) + gamma * CE(p0, p)` on a fixed candidate set.
pub fn refine_loss(logits: &[f64], bias: &[f64], tokens: &[Token], q: &[f64], gamma: f64) -> f64 {
    let zero = vec![0.0; logits.len()];
    let p = restricted(logits, bias, tokens);
    let p0 = restricted(logits, &zero, tokens);
    p.iter()
        .zip(q)
        .zip(&p0)
        .map(|((pi, qi), p0i)| -(qi + gamma * p0i) * pi.ln())
        .sum()
}

/// Gradient of [`refine_loss`] in the candidates' bias coordinates.
pub fn refine_gradient(
    logits: &[f64],
    bias: &[f64],
    tokens: &[Token],
    q: &[f64],
    gamma: f64,
) -> Vec<f64> {
    let zero = vec![0.0; logits.len()];
    let p = restricted(logits, bias, tokens);
    let p0 = restricted(logits, &zero, tokens);
    (0..tokens.len())
        .map(|j| (p[j] - q[j]) + gamma * (p[j] - p0[j]))
        .collect()
}

/// One descent step on a fixed candidate set.
pub fn bias_step(
    logits: &[f64],
    bias: &mut ContextBias,
    tokens: &[Token],
    q: &[f64],
    gamma: f64,
    step_size: f64,
) {
    let g = refine_gradient(logits, &bias.values, tokens, q, gamma);
    for (&t, gj) in tokens.iter().zip(&g) {
        bias.values[t as usize] -= step_size * gj;
    }
}

/// Runs `M` refinement steps for the position after `question ++ answer`,
/// re-proposing candidates with the current bias at every step.
pub fn refine_bias(
    generator: &ToyGenerator,
    ensemble: &EnsembleSpec<Continuation>,
    question: &[Token],
    answer: &[Token],
    config: &RefineConfig,
) -> Result<ContextBias, SeqgenError> {
    config.validate(generator.vocab_size())?;
    let mut context = question.to_vec();
    context.extend_from_slice(answer);
    let logits = generator.logits(&context);
    let mut bias = ContextBias::zeros(generator.vocab_size());
    for step in 0..config.inner_iterations {
        let cands = top_candidates(logits, &bias, config.candidates)?;
        let q = scorer_distribution(
            ensemble,
            question,
            answer,
            &cands.tokens,
            config.temperature,
        )?;
        let loss = refine_loss(
            logits,
            &bias.values,
            &cands.tokens,
            &q,
            config.fluency_weight,
        );
        if !loss.is_finite() {
            return Err(SeqgenError::NonFiniteLoss { step });
        }
        bias_step(
            logits,
            &mut bias,
            &cands.tokens,
            &q,
            config.fluency_weight,
            config.step_size,
        );
        if bias.values.iter().any(|v| !v.is_finite()) {
            return Err(SeqgenError::NonFiniteLoss { step });
        }
    }
    Ok(bias)
}
