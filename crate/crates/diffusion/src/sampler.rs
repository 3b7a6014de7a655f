use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use consensus_core::numeric::stream_rng;
use consensus_core::{
    compose_gradients, Condition, Continuous, EnsembleSpec, Proposal, ProposalKind,
};

use crate::{DiffusionError, MixtureTarget, NoiseSchedule, NoisedMixture};

/// Reverse steps used when sampling unless configured otherwise.
pub const DEFAULT_SAMPLING_STEPS: usize = 100;
/// Classifier-free guidance weight used unless configured otherwise.
pub const DEFAULT_CFG_WEIGHT: f64 = 3.0;
/// Step size applied to the ensemble gradient unless configured otherwise.
pub const DEFAULT_GRADIENT_LAMBDA: f64 = 1.0;

/// A point of a reverse trajectory at schedule step `step`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    pub coords: Vec<f64>,
    pub step: usize,
    /// Noise level of `step`, carried so scorers need not know the schedule.
    pub alpha_bar: f64,
}

impl Proposal for SamplePoint {
    fn kind(&self) -> ProposalKind {
        ProposalKind::Continuous
    }
}

impl Continuous for SamplePoint {
    fn coords(&self) -> &[f64] {
        &self.coords
    }

    fn with_coords(&self, coords: Vec<f64>) -> Self {
        Self {
            coords,
            step: self.step,
            alpha_bar: self.alpha_bar,
        }
    }
}

/// How a reverse step is steered.
///
/// `cfg_weight = 0` turns classifier-free guidance off and the generator is the
/// class-marginal denoiser. Any positive weight switches to the combined
/// prediction `(1 + w) * eps_class - w * eps_marginal`.
#[derive(Debug, Clone)]
pub struct GuidanceSpec {
    pub lambda: f64,
    pub cfg_weight: f64,
    pub ensemble: Option<EnsembleSpec<SamplePoint>>,
}

impl GuidanceSpec {
    pub fn unguided() -> Self {
        Self {
            lambda: 0.0,
            cfg_weight: 0.0,
            ensemble: None,
        }
    }

    pub fn validate(&self) -> Result<(), DiffusionError> {
        let bad = |what: &str, v: f64| {
            Err(DiffusionError::InvalidMixture(format!(
                "{what} must be finite and nonnegative, got {v}"
            )))
        };
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad("lambda", self.lambda);
        }
        if !(self.cfg_weight.is_finite() && self.cfg_weight >= 0.0) {
            return bad("cfg weight", self.cfg_weight);
        }
        Ok(())
    }

    fn gradient_active(&self) -> bool {
        self.lambda > 0.0 && self.ensemble.is_some()
    }
}

impl Default for GuidanceSpec {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_GRADIENT_LAMBDA,
            cfg_weight: DEFAULT_CFG_WEIGHT,
            ensemble: None,
        }
    }
}

/// Exact denoisers for one noise level.
struct StepModels {
    marginal: NoisedMixture,
    class: Option<NoisedMixture>,
}

impl StepModels {
    fn new(
        target: &MixtureTarget,
        class: usize,
        alpha_bar: f64,
        cfg: bool,
    ) -> Result<Self, DiffusionError> {
        Ok(Self {
            marginal: NoisedMixture::at(&target.marginal(), alpha_bar)?,
            class: if cfg {
                Some(NoisedMixture::at(target.class(class)?, alpha_bar)?)
            } else {
                None
            },
        })
    }

    /// Predicted noise `eps = -sqrt(1 - a) * score`, combined for guidance.
    fn epsilon(&self, x: &[f64], alpha_bar: f64, cfg_weight: f64) -> Vec<f64> {
        let sigma = (1.0 - alpha_bar).sqrt();
        let marginal = self.marginal.score(x);
        match &self.class {
            Some(class) if cfg_weight > 0.0 => {
                let cond = class.score(x);
                cond.iter()
                    .zip(&marginal)
                    .map(|(c, m)| -sigma * ((1.0 + cfg_weight) * c - cfg_weight * m))
                    .collect()
            }
            _ => marginal.iter().map(|m| -sigma * m).collect(),
        }
    }
}

fn condition_class(condition: &Condition, target: &MixtureTarget) -> Result<usize, DiffusionError> {
    let c = condition
        .class_label()
        .ok_or(DiffusionError::MissingClassLabel)?;
    target.class(c)?;
    Ok(c)
}

fn reverse_step(
    x: &SamplePoint,
    models: &StepModels,
    alpha_prev: f64,
    condition: &Condition,
    guidance: &GuidanceSpec,
) -> Result<SamplePoint, DiffusionError> {
    let t = x.step;
    let a = x.alpha_bar;
    let eps = models.epsilon(&x.coords, a, guidance.cfg_weight);
    let sigma = (1.0 - a).sqrt();
    let sigma_prev = (1.0 - alpha_prev).sqrt();
    let x0: Vec<f64> = x
        .coords
        .iter()
        .zip(&eps)
        .map(|(xi, ei)| (xi - sigma * ei) / a.sqrt())
        .collect();
    let mut next: Vec<f64> = x0
        .iter()
        .zip(&eps)
        .map(|(x0i, ei)| alpha_prev.sqrt() * x0i + sigma_prev * ei)
        .collect();

    if guidance.gradient_active() {
        let ensemble = guidance.ensemble.as_ref().expect("checked");
        let grad = compose_gradients(x, ensemble, condition)?;
        for (n, g) in next.iter_mut().zip(&grad) {
            *n -= guidance.lambda * g;
        }
    }
    if next.iter().any(|v| !v.is_finite()) {
        return Err(DiffusionError::GuidanceBlowup {
            lambda: guidance.lambda,
            cfg_weight: guidance.cfg_weight,
            t,
        });
    }
    Ok(SamplePoint {
        coords: next,
        step: t - 1,
        alpha_bar: alpha_prev,
    })
}

/// One deterministic (DDIM) reverse step from `x.step` to `x.step - 1`,
/// followed by the ensemble gradient correction `- lambda * grad E(x)`.
///
/// The gradient is taken at the incoming point, before the denoiser update.
pub fn guided_reverse_step(
    x: &SamplePoint,
    target: &MixtureTarget,
    schedule: &NoiseSchedule,
    condition: &Condition,
    guidance: &GuidanceSpec,
) -> Result<SamplePoint, DiffusionError> {
    guidance.validate()?;
    if x.step == 0 || x.step > schedule.len() {
        return Err(DiffusionError::StepOutOfRange {
            t: x.step,
            max: schedule.len(),
        });
    }
    let class = condition_class(condition, target)?;
    let models = StepModels::new(target, class, x.alpha_bar, guidance.cfg_weight > 0.0)?;
    reverse_step(
        x,
        &models,
        schedule.alpha_bar(x.step - 1),
        condition,
        guidance,
    )
}

/// Samples plus the mean composed ensemble energy at every visited step
/// (from `T` down to 0). The trace is empty without an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTrace {
    pub samples: Vec<SamplePoint>,
    pub mean_energy: Vec<f64>,
}

/// Runs guided reverse trajectories for one target and schedule.
pub struct Sampler {
    target: Arc<MixtureTarget>,
    schedule: NoiseSchedule,
    guidance: GuidanceSpec,
    parallel: bool,
}

impl Sampler {
    pub fn new(
        target: Arc<MixtureTarget>,
        schedule: NoiseSchedule,
        guidance: GuidanceSpec,
    ) -> Result<Self, DiffusionError> {
        guidance.validate()?;
        Ok(Self {
            target,
            schedule,
            guidance,
            parallel: true,
        })
    }

    /// Default schedule: the 1000-step base respaced to `steps`.
    pub fn with_steps(
        target: Arc<MixtureTarget>,
        steps: usize,
        guidance: GuidanceSpec,
    ) -> Result<Self, DiffusionError> {
        Self::new(
            target,
            NoiseSchedule::default_base().respaced(steps)?,
            guidance,
        )
    }

    /// Serial and parallel execution give identical output; this only picks
    /// the executor.
    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn schedule(&self) -> &NoiseSchedule {
        &self.schedule
    }

    pub fn guidance(&self) -> &GuidanceSpec {
        &self.guidance
    }

    fn models(&self, class: usize) -> Result<Vec<StepModels>, DiffusionError> {
        let cfg = self.guidance.cfg_weight > 0.0;
        (1..=self.schedule.len())
            .map(|t| StepModels::new(&self.target, class, self.schedule.alpha_bar(t), cfg))
            .collect()
    }

    fn trajectory(
        &self,
        models: &[StepModels],
        condition: &Condition,
        seed: u64,
        index: usize,
        trace: bool,
    ) -> Result<(SamplePoint, Vec<f64>), DiffusionError> {
        let mut rng = stream_rng(seed, index as u64);
        let t_max = self.schedule.len();
        let mut x = SamplePoint {
            coords: (0..self.target.dim())
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect(),
            step: t_max,
            alpha_bar: self.schedule.alpha_bar(t_max),
        };
        let ensemble = self.guidance.ensemble.as_ref().filter(|_| trace);
        let mut energies = Vec::new();
        for t in (1..=t_max).rev() {
            if let Some(ens) = ensemble {
                energies.push(ens.evaluate(&x, condition)?.composed.value());
            }
            x = reverse_step(
                &x,
                &models[t - 1],
                self.schedule.alpha_bar(t - 1),
                condition,
                &self.guidance,
            )?;
        }
        if let Some(ens) = ensemble {
            energies.push(ens.evaluate(&x, condition)?.composed.value());
        }
        Ok((x, energies))
    }

    fn run(
        &self,
        class: usize,
        n: usize,
        seed: u64,
        trace: bool,
    ) -> Result<SampleTrace, DiffusionError> {
        self.target.class(class)?;
        let models = self.models(class)?;
        let condition = Condition::ClassLabel(class);
        let one = |i: usize| self.trajectory(&models, &condition, seed, i, trace);
        let results: Vec<(SamplePoint, Vec<f64>)> = if self.parallel {
            (0..n).into_par_iter().map(one).collect::<Result<_, _>>()?
        } else {
            (0..n).map(one).collect::<Result<_, _>>()?
        };
        let steps = results.first().map_or(0, |r| r.1.len());
        let mut mean_energy = vec![0.0; steps];
        for (_, e) in &results {
            for (m, v) in mean_energy.iter_mut().zip(e) {
                *m += v;
            }
        }
        mean_energy.iter_mut().for_each(|m| *m /= n as f64);
        Ok(SampleTrace {
            samples: results.into_iter().map(|r| r.0).collect(),
            mean_energy,
        })
    }

    /// `n` independent trajectories started from N(0, I). Sample `i` draws its
    /// noise from the stream `(seed, i)`.
    pub fn sample(
        &self,
        class: usize,
        n: usize,
        seed: u64,
    ) -> Result<Vec<SamplePoint>, DiffusionError> {
        Ok(self.run(class, n, seed, false)?.samples)
    }

    pub fn sample_traced(
        &self,
        class: usize,
        n: usize,
        seed: u64,
    ) -> Result<SampleTrace, DiffusionError> {
        self.run(class, n, seed, true)
    }
}

/// Samples `n` points of class `class` with the default 100-step schedule.
pub fn sample_class(
    target: Arc<MixtureTarget>,
    class: usize,
    guidance: GuidanceSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<SamplePoint>, DiffusionError> {
    Sampler::with_steps(target, DEFAULT_SAMPLING_STEPS, guidance)?.sample(class, n, seed)
}
