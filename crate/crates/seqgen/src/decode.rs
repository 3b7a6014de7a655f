//! Beam decoding with per-position refinement, and the rerank baseline.

use rand::Rng;

use consensus_core::numeric::softmax;
use consensus_core::{Condition, EnsembleSpec};

use crate::generator::ToyGenerator;
use crate::refine::{refine_bias, ContextBias, RefineConfig};
use crate::scorer::Continuation;
use crate::vocab::{Token, EOS};
use crate::SeqgenError;

#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    /// Emitted tokens, including a trailing `<eos>` once finished.
    pub tokens: Vec<Token>,
    pub log_prob: f64,
}

impl Beam {
    pub fn finished(&self) -> bool {
        self.tokens.last() == Some(&EOS)
    }

    /// The answer without the end marker.
    pub fn answer(&self) -> &[Token] {
        match self.tokens.split_last() {
            Some((&EOS, rest)) => rest,
            _ => &self.tokens,
        }
    }
}

/// Final beams, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub beams: Vec<Beam>,
}

impl Decoded {
    pub fn best(&self) -> &[Token] {
        self.beams[0].answer()
    }

    pub fn answers(&self) -> Vec<Vec<Token>> {
        self.beams.iter().map(|b| b.answer().to_vec()).collect()
    }
}

/// Beam search where every open beam first refines its context bias against
/// the scorers, then extends by `log_softmax(logits + bias)` over the full
/// vocabulary. With `inner_iterations = 0` this is plain beam search.
pub fn decode_answer(
    generator: &ToyGenerator,
    ensemble: &EnsembleSpec<Continuation>,
    question: &[Token],
    beam_size: usize,
    config: &RefineConfig,
) -> Result<Decoded, SeqgenError> {
    if beam_size == 0 {
        return Err(SeqgenError::InvalidConfig("beam size 0".into()));
    }
    config.validate(generator.vocab_size())?;
    let mut beams = vec![Beam {
        tokens: Vec::new(),
        log_prob: 0.0,
    }];
    let mut context = question.to_vec();
    for _ in 0..config.max_answer_len {
        if beams.iter().all(Beam::finished) {
            break;
        }
        // (score, beam index, token or None for a carried finished beam)
        let mut pool: Vec<(f64, usize, Option<Token>)> = Vec::new();
        for (i, beam) in beams.iter().enumerate() {
            if beam.finished() {
                pool.push((beam.log_prob, i, None));
                continue;
            }
            let bias = if config.inner_iterations > 0 {
                refine_bias(generator, ensemble, question, &beam.tokens, config)?
            } else {
                ContextBias::zeros(generator.vocab_size())
            };
            context.truncate(question.len());
            context.extend_from_slice(&beam.tokens);
            let logits = bias.apply(generator.logits(&context));
            let lse = consensus_core::numeric::log_sum_exp(&logits);
            for (t, l) in logits.iter().enumerate() {
                pool.push((beam.log_prob + l - lse, i, Some(t as Token)));
            }
        }
        pool.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        pool.truncate(beam_size);
        beams = pool
            .into_iter()
            .map(|(score, i, t)| {
                let mut tokens = beams[i].tokens.clone();
                tokens.extend(t);
                Beam {
                    tokens,
                    log_prob: score,
                }
            })
            .collect();
    }
    Ok(Decoded { beams })
}

/// Ancestral sample from the generator alone, up to `<eos>` or `max_len`.
pub fn sample_answer<R: Rng>(
    generator: &ToyGenerator,
    question: &[Token],
    max_len: usize,
    rng: &mut R,
) -> Vec<Token> {
    let mut context = question.to_vec();
    for _ in 0..max_len {
        let p = softmax(generator.logits(&context));
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = p.len() - 1;
        for (t, pt) in p.iter().enumerate() {
            acc += pt;
            if u < acc {
                pick = t;
                break;
            }
        }
        context.push(pick as Token);
        if pick as Token == EOS {
            break;
        }
    }
    context.split_off(question.len())
}

/// Sum of the composed per-token energies along a full answer.
pub fn total_energy(
    ensemble: &EnsembleSpec<Continuation>,
    question: &[Token],
    tokens: &[Token],
) -> Result<f64, SeqgenError> {
    let condition = Condition::Question(question.to_vec());
    let mut total = 0.0;
    for i in 0..tokens.len() {
        let c = Continuation {
            answer: tokens[..=i].to_vec(),
        };
        total += ensemble.evaluate(&c, &condition)?.composed.value();
    }
    Ok(total)
}

/// Index of the sample with the lowest total energy (ties to the first).
/// Samples keep their `<eos>`, which is scored like any other token.
pub fn rerank(
    ensemble: &EnsembleSpec<Continuation>,
    question: &[Token],
    samples: &[Vec<Token>],
) -> Result<usize, SeqgenError> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in samples.iter().enumerate() {
        let e = total_energy(ensemble, question, s)?;
        if best.is_none_or(|(_, b)| e < b) {
            best = Some((i, e));
        }
    }
    best.map(|b| b.0)
        .ok_or_else(|| SeqgenError::InvalidConfig("no candidates to rerank".into()))
}

/// Scorer feedback only at the end: sample `n` full answers without bias and
/// keep the one with minimum total energy.
pub fn baseline_rerank<R: Rng>(
    generator: &ToyGenerator,
    ensemble: &EnsembleSpec<Continuation>,
    question: &[Token],
    n: usize,
    max_len: usize,
    rng: &mut R,
) -> Result<Vec<Token>, SeqgenError> {
    if n == 0 {
        return Err(SeqgenError::InvalidConfig("zero rerank candidates".into()));
    }
    let samples: Vec<Vec<Token>> = (0..n)
        .map(|_| sample_answer(generator, question, max_len, rng))
        .collect();
    let i = rerank(ensemble, question, &samples)?;
    let mut best = samples.into_iter().nth(i).expect("index from rerank");
    if best.last() == Some(&EOS) {
        best.pop();
    }
    Ok(best)
}
