//! Gradient-capable scorers over [`SamplePoint`]s.
//!
//! * [`ClassEnergy`] is the classifier analog: the negative log posterior of
//!   the requested class under the noised mixtures at the point's noise level.
//! * [`CosineEmbed`] is the embedding-similarity analog: a fixed random linear
//!   embedding compared by cosine similarity to the embedded class mean.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use consensus_core::numeric::{log_sum_exp, softmax, stream_rng};
use consensus_core::{Capability, Condition, ProposalKind, Scorer, ScorerError};

use crate::{MixtureTarget, NoisedMixture, SamplePoint};

fn class_of(condition: &Condition, classes: usize) -> Result<usize, ScorerError> {
    match condition.class_label() {
        Some(c) if c < classes => Ok(c),
        Some(c) => Err(ScorerError::Condition(format!(
            "class {c} outside 0..{classes}"
        ))),
        None => Err(ScorerError::Condition("expected a class label".into())),
    }
}

/// `E(x) = -log p_t(c | x)` with equal class priors.
#[derive(Debug, Clone)]
pub struct ClassEnergy {
    name: String,
    target: Arc<MixtureTarget>,
}

impl ClassEnergy {
    pub fn new(target: Arc<MixtureTarget>) -> Self {
        Self {
            name: "classifier".into(),
            target,
        }
    }

    fn noised(&self, alpha_bar: f64) -> Result<Vec<NoisedMixture>, ScorerError> {
        self.target
            .classes()
            .iter()
            .map(|c| {
                NoisedMixture::at(c, alpha_bar).map_err(|e| ScorerError::Degenerate(e.to_string()))
            })
            .collect()
    }
}

impl Scorer<SamplePoint> for ClassEnergy {
    fn name(&self) -> &str {
        &self.name
    }

    fn accepts(&self) -> ProposalKind {
        ProposalKind::Continuous
    }

    fn capability(&self) -> Capability {
        Capability::EnergyAndGradient
    }

    fn energy(&self, p: &SamplePoint, condition: &Condition) -> Result<f64, ScorerError> {
        let c = class_of(condition, self.target.num_classes())?;
        let logs: Vec<f64> = self
            .noised(p.alpha_bar)?
            .iter()
            .map(|m| m.log_density(&p.coords))
            .collect();
        Ok(log_sum_exp(&logs) - logs[c])
    }

    /// `grad E = sum_k p(k | x) score_k(x) - score_c(x)`.
    fn gradient(&self, p: &SamplePoint, condition: &Condition) -> Result<Vec<f64>, ScorerError> {
        let c = class_of(condition, self.target.num_classes())?;
        let mixtures = self.noised(p.alpha_bar)?;
        let logs: Vec<f64> = mixtures.iter().map(|m| m.log_density(&p.coords)).collect();
        let post = softmax(&logs);
        let mut grad = vec![0.0; p.coords.len()];
        for (k, (m, w)) in mixtures.iter().zip(&post).enumerate() {
            let s = m.score(&p.coords);
            let coef = if k == c { w - 1.0 } else { *w };
            for (g, si) in grad.iter_mut().zip(&s) {
                *g += coef * si;
            }
        }
        Ok(grad)
    }
}

/// `E(x) = 1 - cos(A x, A mu_c)` for a fixed random `A: R^d -> R^m`.
#[derive(Debug, Clone)]
pub struct CosineEmbed {
    name: String,
    projection: DMatrix<f64>,
    class_embeddings: Vec<DVector<f64>>,
}

/// Below this embedded norm the direction is undefined; energy is clamped to 1
/// and the gradient to zero.
const MIN_NORM: f64 = 1e-12;

impl CosineEmbed {
    pub const DEFAULT_EMBED_DIM: usize = 8;

    pub fn new(target: &MixtureTarget, embed_dim: usize, seed: u64) -> Self {
        let mut rng = stream_rng(seed, 0);
        let projection = DMatrix::from_fn(embed_dim, target.dim(), |_, _| {
            rng.sample::<f64, _>(StandardNormal)
        });
        let class_embeddings = (0..target.num_classes())
            .map(|c| &projection * target.class_mean(c).expect("class index in range"))
            .collect();
        Self {
            name: "cosine".into(),
            projection,
            class_embeddings,
        }
    }

    pub fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }

    fn parts(
        &self,
        p: &SamplePoint,
        condition: &Condition,
    ) -> Result<(DVector<f64>, &DVector<f64>), ScorerError> {
        let c = class_of(condition, self.class_embeddings.len())?;
        if p.coords.len() != self.projection.ncols() {
            return Err(ScorerError::Degenerate(format!(
                "expected dimension {}, got {}",
                self.projection.ncols(),
                p.coords.len()
            )));
        }
        let u = &self.projection * DVector::from_column_slice(&p.coords);
        Ok((u, &self.class_embeddings[c]))
    }
}

impl Scorer<SamplePoint> for CosineEmbed {
    fn name(&self) -> &str {
        &self.name
    }

    fn accepts(&self) -> ProposalKind {
        ProposalKind::Continuous
    }

    fn capability(&self) -> Capability {
        Capability::EnergyAndGradient
    }

    fn energy(&self, p: &SamplePoint, condition: &Condition) -> Result<f64, ScorerError> {
        let (u, e) = self.parts(p, condition)?;
        let (nu, ne) = (u.norm(), e.norm());
        if nu < MIN_NORM || ne < MIN_NORM {
            return Ok(1.0);
        }
        Ok(1.0 - u.dot(e) / (nu * ne))
    }

    fn gradient(&self, p: &SamplePoint, condition: &Condition) -> Result<Vec<f64>, ScorerError> {
        let (u, e) = self.parts(p, condition)?;
        let (nu, ne) = (u.norm(), e.norm());
        if nu < MIN_NORM || ne < MIN_NORM {
            return Ok(vec![0.0; p.coords.len()]);
        }
        let cos = u.dot(e) / (nu * ne);
        // d cos / du = e / (|u||e|) - cos * u / |u|^2
        let dcos = e / (nu * ne) - &u * (cos / (nu * nu));
        let grad = -(self.projection.transpose() * dcos);
        Ok(grad.iter().copied().collect())
    }
}
