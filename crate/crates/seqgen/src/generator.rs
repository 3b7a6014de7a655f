//! Add-one smoothed n-gram generator.

use consensus_core::numeric::{log_softmax, softmax};

use crate::corpus::Corpus;
use crate::vocab::{Token, Vocabulary, SEP};
use crate::SeqgenError;

/// Next-token logits indexed by the previous `order - 1` tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyGenerator {
    order: usize,
    vocab: usize,
    logits: Vec<f64>,
}

impl ToyGenerator {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab
    }

    /// Row index of the window ending the separator-padded `context`.
    fn row(&self, context: &[Token]) -> usize {
        let n = self.order - 1;
        let pad = n.saturating_sub(context.len());
        let tail = &context[context.len().saturating_sub(n)..];
        std::iter::repeat_n(SEP, pad)
            .chain(tail.iter().copied())
            .fold(0, |acc, t| acc * self.vocab + t as usize)
    }

    /// Logits for the token following `context`.
    pub fn logits(&self, context: &[Token]) -> &[f64] {
        let r = self.row(context);
        &self.logits[r * self.vocab..(r + 1) * self.vocab]
    }

    pub fn distribution(&self, context: &[Token]) -> Vec<f64> {
        softmax(self.logits(context))
    }

    pub fn log_distribution(&self, context: &[Token]) -> Vec<f64> {
        log_softmax(self.logits(context))
    }

    /// Every context window as a slice of logits.
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.logits.chunks(self.vocab)
    }
}

/// Fits `logits = ln(count + 1)` from every line of `corpus`, each line
/// padded on the left with `order - 1` separators.
pub fn fit_generator(corpus: &Corpus, order: usize) -> Result<ToyGenerator, SeqgenError> {
    if !(2..=3).contains(&order) {
        return Err(SeqgenError::InvalidOrder(order));
    }
    if corpus.lines.is_empty() {
        return Err(SeqgenError::EmptyCorpus);
    }
    let vocab = Vocabulary::standard().len();
    let rows = vocab.pow(order as u32 - 1);
    let mut counts = vec![0u64; rows * vocab];
    let mut g = ToyGenerator {
        order,
        vocab,
        logits: Vec::new(),
    };
    for line in &corpus.lines {
        if let Some(&bad) = line.iter().find(|&&t| t as usize >= vocab) {
            return Err(SeqgenError::UnknownToken(bad.to_string()));
        }
        for i in 0..line.len() {
            counts[g.row(&line[..i]) * vocab + line[i] as usize] += 1;
        }
    }
    g.logits = counts.iter().map(|&c| (c as f64 + 1.0).ln()).collect();
    Ok(g)
}
