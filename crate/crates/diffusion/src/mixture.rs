use std::f64::consts::{PI, TAU};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;

use consensus_core::numeric::log_sum_exp;

use crate::{DiffusionError, NoiseSchedule};

/// One Gaussian component of a class mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

/// A Gaussian mixture describing one class.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureClass {
    pub components: Vec<Component>,
}

impl MixtureClass {
    /// Distribution of `sqrt(a) * x + sqrt(1 - a) * eps` for `x` from this
    /// mixture: means scale by `sqrt(a)`, covariances become `a * S + (1 - a) I`.
    pub fn noised(&self, alpha_bar: f64) -> MixtureClass {
        let s = alpha_bar.sqrt();
        MixtureClass {
            components: self
                .components
                .iter()
                .map(|c| {
                    let d = c.mean.len();
                    Component {
                        weight: c.weight,
                        mean: &c.mean * s,
                        cov: &c.cov * alpha_bar + DMatrix::identity(d, d) * (1.0 - alpha_bar),
                    }
                })
                .collect(),
        }
    }

    /// Mean and covariance of the whole mixture.
    pub fn moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        let d = self.components[0].mean.len();
        let mut mean = DVector::zeros(d);
        for c in &self.components {
            mean += &c.mean * c.weight;
        }
        let mut cov = DMatrix::zeros(d, d);
        for c in &self.components {
            let dm = &c.mean - &mean;
            cov += (&c.cov + &dm * dm.transpose()) * c.weight;
        }
        (mean, cov)
    }

    /// Draws one point from the mixture.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = self.components.len() - 1;
        for (i, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                chosen = i;
                break;
            }
        }
        let c = &self.components[chosen];
        let l = Cholesky::new(c.cov.clone())
            .expect("validated covariance")
            .l();
        let z = DVector::from_fn(c.mean.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &c.mean + l * z
    }
}

/// Per-class Gaussian mixtures over R^d, equal class priors.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureTarget {
    dim: usize,
    classes: Vec<MixtureClass>,
}

impl MixtureTarget {
    pub fn new(dim: usize, classes: Vec<MixtureClass>) -> Result<Self, DiffusionError> {
        if dim == 0 {
            return Err(DiffusionError::InvalidMixture(
                "dimension must be positive".into(),
            ));
        }
        if classes.is_empty() {
            return Err(DiffusionError::InvalidMixture("no classes".into()));
        }
        for (ci, class) in classes.iter().enumerate() {
            if class.components.is_empty() {
                return Err(DiffusionError::InvalidMixture(format!(
                    "class {ci} has no components"
                )));
            }
            let total: f64 = class.components.iter().map(|c| c.weight).sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(DiffusionError::InvalidMixture(format!(
                    "class {ci} weights sum to {total}"
                )));
            }
            for (k, c) in class.components.iter().enumerate() {
                if c.weight.is_nan() || c.weight <= 0.0 {
                    return Err(DiffusionError::InvalidMixture(format!(
                        "class {ci} component {k} has weight {}",
                        c.weight
                    )));
                }
                if c.mean.len() != dim || c.cov.shape() != (dim, dim) {
                    return Err(DiffusionError::InvalidMixture(format!(
                        "class {ci} component {k} has wrong shape"
                    )));
                }
                if !is_spd(&c.cov) {
                    return Err(DiffusionError::InvalidMixture(format!(
                        "class {ci} component {k} covariance is not symmetric positive definite"
                    )));
                }
            }
        }
        Ok(Self { dim, classes })
    }

    /// Classes placed on rays from the origin at equal angles; each class has
    /// `components` isotropic unit-covariance components along its ray, spaced
    /// `separation` apart. The innermost radius keeps components of adjacent
    /// classes at least `separation` apart too.
    pub fn rays(
        classes: usize,
        components: usize,
        separation: f64,
    ) -> Result<Self, DiffusionError> {
        if classes == 0 || components == 0 {
            return Err(DiffusionError::InvalidMixture(
                "need at least one class and component".into(),
            ));
        }
        let inner = if classes > 1 {
            separation / (2.0 * (PI / classes as f64).sin())
        } else {
            separation
        };
        let w = 1.0 / components as f64;
        let class_list = (0..classes)
            .map(|c| {
                let angle = TAU * c as f64 / classes as f64;
                let dir = [angle.cos(), angle.sin()];
                MixtureClass {
                    components: (0..components)
                        .map(|k| {
                            let r = inner + separation * k as f64;
                            Component {
                                weight: w,
                                mean: DVector::from_vec(vec![r * dir[0], r * dir[1]]),
                                cov: DMatrix::identity(2, 2),
                            }
                        })
                        .collect(),
                }
            })
            .collect();
        Self::new(2, class_list)
    }

    /// Four classes, two unit-covariance components each, separation 8, in 2-D.
    pub fn default_target() -> Self {
        Self::rays(4, 2, 8.0).expect("valid constants")
    }

    /// A one-class, one-component target.
    pub fn single_gaussian(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self, DiffusionError> {
        let dim = mean.len();
        Self::new(
            dim,
            vec![MixtureClass {
                components: vec![Component {
                    weight: 1.0,
                    mean,
                    cov,
                }],
            }],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[MixtureClass] {
        &self.classes
    }

    pub fn class(&self, class: usize) -> Result<&MixtureClass, DiffusionError> {
        self.classes.get(class).ok_or(DiffusionError::InvalidClass {
            class,
            classes: self.classes.len(),
        })
    }

    /// The class-marginal mixture under equal priors.
    pub fn marginal(&self) -> MixtureClass {
        let p = 1.0 / self.classes.len() as f64;
        MixtureClass {
            components: self
                .classes
                .iter()
                .flat_map(|c| c.components.iter())
                .map(|c| Component {
                    weight: c.weight * p,
                    ..c.clone()
                })
                .collect(),
        }
    }

    pub fn denoiser_mixture(&self, denoiser: Denoiser) -> Result<MixtureClass, DiffusionError> {
        match denoiser {
            Denoiser::Class(c) => self.class(c).cloned(),
            Denoiser::Marginal => Ok(self.marginal()),
        }
    }

    /// Mean of each class (weighted mean of its component means).
    pub fn class_mean(&self, class: usize) -> Result<DVector<f64>, DiffusionError> {
        Ok(self.class(class)?.moments().0)
    }
}

fn is_spd(m: &DMatrix<f64>) -> bool {
    let sym = (m - m.transpose()).amax() <= 1e-12 * m.amax().max(1.0);
    sym && Cholesky::new(m.clone()).is_some()
}

/// Which exact denoiser to use: a single class or the class marginal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Denoiser {
    Class(usize),
    Marginal,
}

struct PreparedComponent {
    mean: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    /// log weight + Gaussian normalizer.
    log_norm: f64,
}

/// A Gaussian mixture prepared for density and score evaluation.
pub struct NoisedMixture {
    params: MixtureClass,
    prepared: Vec<PreparedComponent>,
}

impl NoisedMixture {
    pub fn new(params: MixtureClass) -> Result<Self, DiffusionError> {
        let prepared = params
            .components
            .iter()
            .map(|c| {
                let d = c.mean.len() as f64;
                let chol = Cholesky::new(c.cov.clone()).ok_or_else(|| {
                    DiffusionError::InvalidMixture("covariance not positive definite".into())
                })?;
                let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
                Ok(PreparedComponent {
                    mean: c.mean.clone(),
                    log_norm: c.weight.ln() - 0.5 * (d * (2.0 * PI).ln() + log_det),
                    chol,
                })
            })
            .collect::<Result<_, DiffusionError>>()?;
        Ok(Self { params, prepared })
    }

    /// Noised class (or marginal) mixture at noise level `alpha_bar`.
    pub fn at(class: &MixtureClass, alpha_bar: f64) -> Result<Self, DiffusionError> {
        Self::new(class.noised(alpha_bar))
    }

    pub fn params(&self) -> &MixtureClass {
        &self.params
    }

    fn component_logs(&self, x: &DVector<f64>) -> Vec<f64> {
        self.prepared
            .iter()
            .map(|c| {
                let diff = x - &c.mean;
                let sol = c.chol.solve(&diff);
                c.log_norm - 0.5 * diff.dot(&sol)
            })
            .collect()
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        log_sum_exp(&self.component_logs(&DVector::from_column_slice(x)))
    }

    /// Posterior component probabilities at `x`.
    pub fn responsibilities(&self, x: &[f64]) -> Vec<f64> {
        consensus_core::numeric::softmax(&self.component_logs(&DVector::from_column_slice(x)))
    }

    /// `grad log p(x) = sum_i r_i(x) * (-C_i^{-1} (x - m_i))`.
    pub fn score(&self, x: &[f64]) -> Vec<f64> {
        let xv = DVector::from_column_slice(x);
        let logs = self.component_logs(&xv);
        let resp = consensus_core::numeric::softmax(&logs);
        let mut total = DVector::zeros(x.len());
        for (c, r) in self.prepared.iter().zip(&resp) {
            if *r == 0.0 {
                continue;
            }
            let diff = &xv - &c.mean;
            total -= c.chol.solve(&diff) * *r;
        }
        total.iter().copied().collect()
    }
}

/// The class mixture (or marginal) noised to step `t`.
pub fn noised_mixture(
    target: &MixtureTarget,
    denoiser: Denoiser,
    t: usize,
    schedule: &NoiseSchedule,
) -> Result<MixtureClass, DiffusionError> {
    let ab = schedule.checked_alpha_bar(t)?;
    Ok(target.denoiser_mixture(denoiser)?.noised(ab))
}

/// Exact score `grad_x log p_t(x)` of the noised mixture.
pub fn exact_score(
    x: &[f64],
    t: usize,
    target: &MixtureTarget,
    denoiser: Denoiser,
    schedule: &NoiseSchedule,
) -> Result<Vec<f64>, DiffusionError> {
    let m = NoisedMixture::new(noised_mixture(target, denoiser, t, schedule)?)?;
    Ok(m.score(x))
}

/// Posterior mean of the clean point given `x` at step `t`, via Tweedie:
/// `x0 = (x + (1 - a) * score) / sqrt(a)`.
pub fn tweedie_denoise(
    x: &[f64],
    t: usize,
    target: &MixtureTarget,
    denoiser: Denoiser,
    schedule: &NoiseSchedule,
) -> Result<Vec<f64>, DiffusionError> {
    let ab = schedule.checked_alpha_bar(t)?;
    if ab <= 0.0 {
        return Err(DiffusionError::SingularStep { t });
    }
    let score = exact_score(x, t, target, denoiser, schedule)?;
    Ok(tweedie_from_score(x, &score, ab))
}

pub(crate) fn tweedie_from_score(x: &[f64], score: &[f64], alpha_bar: f64) -> Vec<f64> {
    let s = alpha_bar.sqrt();
    x.iter()
        .zip(score)
        .map(|(xi, si)| (xi + (1.0 - alpha_bar) * si) / s)
        .collect()
}
