//! End-to-end evaluation of one seed: corpus, generator, held-out problems and
//! the three decoding arms.

use rayon::prelude::*;

use consensus_core::numeric::stream_rng;
use consensus_core::{EnsembleSpec, ScorerHandle};

use crate::corpus::{build_corpus, held_out_problems, CorpusSpec, Problem};
use crate::decode::{baseline_rerank, decode_answer};
use crate::generator::{fit_generator, ToyGenerator};
use crate::metrics::{answer_metrics, AnswerMetrics, Prediction};
use crate::refine::RefineConfig;
use crate::scorer::{Continuation, OracleMode, SolutionScorer};
use crate::SeqgenError;

/// How the scorer feedback reaches the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecodeArm {
    /// Greedy decoding with no scorer.
    GeneratorOnly,
    /// Sample full answers, rerank them once at the end.
    EndOnly,
    /// Refine the context bias at every position.
    Iterative,
}

impl DecodeArm {
    pub const ALL: [Self; 3] = [Self::GeneratorOnly, Self::EndOnly, Self::Iterative];

    pub fn label(self) -> &'static str {
        match self {
            Self::GeneratorOnly => "generator-only",
            Self::EndOnly => "end-only",
            Self::Iterative => "iterative",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.label() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeqgenSettings {
    pub corpus: CorpusSpec,
    pub order: usize,
    pub eval_size: usize,
    pub refine: RefineConfig,
    pub beam_size: usize,
    pub rerank_candidates: usize,
    /// `0` selects the exact oracle.
    pub flip_probability: f64,
}

impl Default for SeqgenSettings {
    fn default() -> Self {
        Self {
            corpus: CorpusSpec::default(),
            order: 3,
            eval_size: 200,
            refine: RefineConfig::default(),
            beam_size: 5,
            rerank_candidates: 5,
            flip_probability: 0.0,
        }
    }
}

/// A fitted generator and its held-out problems for one seed.
pub struct SeqgenTask {
    pub settings: SeqgenSettings,
    pub seed: u64,
    pub generator: ToyGenerator,
    pub problems: Vec<Problem>,
    pub ensemble: EnsembleSpec<Continuation>,
    parallel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmReport {
    pub metrics: AnswerMetrics,
    pub predictions: Vec<Prediction>,
}

impl SeqgenTask {
    pub fn prepare(settings: SeqgenSettings, seed: u64) -> Result<Self, SeqgenError> {
        let corpus = build_corpus(&settings.corpus, seed)?;
        let generator = fit_generator(&corpus, settings.order)?;
        let problems = held_out_problems(&settings.corpus, &corpus, settings.eval_size, seed)?;
        let mode = if settings.flip_probability > 0.0 {
            OracleMode::Noisy {
                flip_probability: settings.flip_probability,
                seed,
            }
        } else {
            OracleMode::Exact
        };
        let ensemble = EnsembleSpec::new(vec![ScorerHandle::new(SolutionScorer::new(mode)?)])?;
        Ok(Self {
            settings,
            seed,
            generator,
            problems,
            ensemble,
            parallel: true,
        })
    }

    /// Replaces the scorer ensemble (e.g. several oracles with weights).
    pub fn with_ensemble(mut self, ensemble: EnsembleSpec<Continuation>) -> Self {
        self.ensemble = ensemble;
        self
    }

    /// Problems are independent; the executor does not change results.
    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn predict(&self, arm: DecodeArm, index: usize) -> Result<Prediction, SeqgenError> {
        let s = &self.settings;
        let question = self.problems[index].question_tokens();
        match arm {
            DecodeArm::GeneratorOnly => {
                let cfg = RefineConfig {
                    inner_iterations: 0,
                    ..s.refine.clone()
                };
                let d = decode_answer(&self.generator, &self.ensemble, &question, 1, &cfg)?;
                Ok(Prediction::single(d.best().to_vec()))
            }
            DecodeArm::EndOnly => {
                let mut rng = stream_rng(self.seed, 2 + index as u64);
                let a = baseline_rerank(
                    &self.generator,
                    &self.ensemble,
                    &question,
                    s.rerank_candidates,
                    s.refine.max_answer_len,
                    &mut rng,
                )?;
                Ok(Prediction::single(a))
            }
            DecodeArm::Iterative => {
                let d = decode_answer(
                    &self.generator,
                    &self.ensemble,
                    &question,
                    s.beam_size,
                    &s.refine,
                )?;
                Ok(Prediction {
                    best: d.best().to_vec(),
                    beams: d.answers(),
                })
            }
        }
    }

    pub fn run(&self, arm: DecodeArm) -> Result<ArmReport, SeqgenError> {
        let one = |i: usize| self.predict(arm, i);
        let predictions: Vec<Prediction> = if self.parallel {
            (0..self.problems.len())
                .into_par_iter()
                .map(one)
                .collect::<Result<_, _>>()?
        } else {
            (0..self.problems.len())
                .map(one)
                .collect::<Result<_, _>>()?
        };
        let truth: Vec<_> = self.problems.iter().map(Problem::answer_tokens).collect();
        Ok(ArmReport {
            metrics: answer_metrics(&predictions, &truth)?,
            predictions,
        })
    }
}
