//! Scorer subsets for the ensemble ablation.
//!
//! Arms are named after the scorers they add to the generator `G`:
//! `E1` is the cosine-embedding scorer, `E2` the classifier energy and `E3`
//! classifier-free guidance.

use std::sync::Arc;

use consensus_core::{EnsembleSpec, ScorerHandle};

use crate::scorers::{ClassEnergy, CosineEmbed};
use crate::{
    bayes_accuracy, DiffusionError, GuidanceSpec, MixtureTarget, SamplePoint, Sampler,
    DEFAULT_CFG_WEIGHT, DEFAULT_GRADIENT_LAMBDA, DEFAULT_SAMPLING_STEPS,
};

/// Which scorers an arm composes with the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScorerSet {
    pub cosine: bool,
    pub classifier: bool,
    pub classifier_free: bool,
}

impl ScorerSet {
    pub const GENERATOR_ONLY: Self = Self::new(false, false, false);

    pub const fn new(cosine: bool, classifier: bool, classifier_free: bool) -> Self {
        Self {
            cosine,
            classifier,
            classifier_free,
        }
    }

    /// The four arms of the ensemble ablation, smallest first.
    pub fn ablation_arms() -> [Self; 4] {
        [
            Self::new(true, false, false),
            Self::new(true, true, false),
            Self::new(true, false, true),
            Self::new(true, true, true),
        ]
    }

    pub fn label(&self) -> String {
        let mut s = String::from("G");
        for (on, tag) in [
            (self.cosine, "+E1"),
            (self.classifier, "+E2"),
            (self.classifier_free, "+E3"),
        ] {
            if on {
                s.push_str(tag);
            }
        }
        s
    }

    pub fn from_label(label: &str) -> Option<Self> {
        let mut parts = label.split('+');
        if parts.next()? != "G" {
            return None;
        }
        let mut set = Self::GENERATOR_ONLY;
        for p in parts {
            let flag = match p {
                "E1" => &mut set.cosine,
                "E2" => &mut set.classifier,
                "E3" => &mut set.classifier_free,
                _ => return None,
            };
            if *flag {
                return None;
            }
            *flag = true;
        }
        Some(set)
    }
}

/// Tunable knobs of the diffusion suite.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSettings {
    pub steps: usize,
    pub lambda: f64,
    pub cfg_weight: f64,
    pub cosine_weight: f64,
    pub classifier_weight: f64,
    pub embed_dim: usize,
    /// Seed of the cosine scorer's random projection; fixed across run seeds.
    pub embed_seed: u64,
    pub samples_per_class: usize,
}

impl Default for DiffusionSettings {
    fn default() -> Self {
        Self {
            steps: DEFAULT_SAMPLING_STEPS,
            lambda: DEFAULT_GRADIENT_LAMBDA,
            cfg_weight: DEFAULT_CFG_WEIGHT,
            cosine_weight: 0.3,
            classifier_weight: 1.0,
            embed_dim: CosineEmbed::DEFAULT_EMBED_DIM,
            embed_seed: 0,
            samples_per_class: 250,
        }
    }
}

impl DiffusionSettings {
    pub fn guidance(
        &self,
        target: &Arc<MixtureTarget>,
        set: ScorerSet,
    ) -> Result<GuidanceSpec, DiffusionError> {
        let mut handles: Vec<ScorerHandle<SamplePoint>> = Vec::new();
        if set.cosine {
            handles.push(
                ScorerHandle::new(CosineEmbed::new(target, self.embed_dim, self.embed_seed))
                    .with_weight(self.cosine_weight),
            );
        }
        if set.classifier {
            handles.push(
                ScorerHandle::new(ClassEnergy::new(target.clone()))
                    .with_weight(self.classifier_weight),
            );
        }
        let ensemble = if handles.is_empty() {
            None
        } else {
            Some(EnsembleSpec::new(handles)?)
        };
        let spec = GuidanceSpec {
            lambda: self.lambda,
            cfg_weight: if set.classifier_free {
                self.cfg_weight
            } else {
                0.0
            },
            ensemble,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Mean Bayes accuracy over all classes of `target` for one seed.
    pub fn mean_accuracy(
        &self,
        target: &Arc<MixtureTarget>,
        set: ScorerSet,
        seed: u64,
    ) -> Result<f64, DiffusionError> {
        let sampler = Sampler::with_steps(target.clone(), self.steps, self.guidance(target, set)?)?;
        let mut total = 0.0;
        for c in 0..target.num_classes() {
            let samples = sampler.sample(c, self.samples_per_class, seed)?;
            total += bayes_accuracy(&samples, c, target)?;
        }
        Ok(total / target.num_classes() as f64)
    }
}
