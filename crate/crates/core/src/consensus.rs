use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{compose_gradients, Condition, Continuous, EnsembleSpec, Error, Evaluation, Proposal};

/// Parameters of the propose / score / refine loop.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementConfig {
    pub step_size: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Stop once an iteration improves the composed energy by less than this.
    /// Off by default.
    pub early_stop_tolerance: Option<f64>,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        Self {
            step_size: 0.1,
            iterations: 10,
            seed: 0,
            early_stop_tolerance: None,
        }
    }
}

impl RefinementConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "step size must be positive and finite, got {}",
                self.step_size
            )));
        }
        if let Some(tol) = self.early_stop_tolerance {
            if tol.is_nan() || tol < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "early-stop tolerance must be nonnegative, got {tol}"
                )));
            }
        }
        Ok(())
    }
}

/// What the scorers said about the current proposal.
pub struct Feedback<'a, P> {
    pub ensemble: &'a EnsembleSpec<P>,
    pub condition: &'a Condition,
    pub evaluation: &'a Evaluation,
    pub step_size: f64,
    pub iteration: usize,
}

/// The proposal side of the loop. Task suites implement this.
pub trait Generator<P> {
    fn initial(&mut self, condition: &Condition, rng: &mut ChaCha8Rng) -> Result<P, Error>;

    fn propose(&mut self, current: &P, iteration: usize, rng: &mut ChaCha8Rng) -> Result<P, Error>;

    fn refine(
        &mut self,
        proposal: P,
        feedback: &Feedback<'_, P>,
        rng: &mut ChaCha8Rng,
    ) -> Result<P, Error>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusResult<P> {
    pub final_proposal: P,
    /// Composed energy of the refined proposal after each iteration.
    pub energy_trajectory: Vec<f64>,
    /// Unweighted per-scorer energies after each iteration, one row per iteration.
    pub per_scorer_trajectory: Vec<Vec<f64>>,
    pub iterations_run: usize,
}

/// Runs up to `config.iterations` rounds of propose, score and refine.
///
/// The driver owns the random stream (seeded from `config.seed`), so two calls
/// with equal inputs return identical results.
pub fn run_consensus<P, G>(
    generator: &mut G,
    ensemble: &EnsembleSpec<P>,
    condition: &Condition,
    config: &RefinementConfig,
) -> Result<ConsensusResult<P>, Error>
where
    P: Proposal,
    G: Generator<P> + ?Sized,
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut current = generator.initial(condition, &mut rng)?;
    let mut previous = ensemble.evaluate(&current, condition)?.composed.value();

    let mut energy_trajectory = Vec::with_capacity(config.iterations);
    let mut per_scorer_trajectory = Vec::with_capacity(config.iterations);

    for iteration in 0..config.iterations {
        let proposal = generator.propose(&current, iteration, &mut rng)?;
        let evaluation = ensemble.evaluate(&proposal, condition)?;
        let feedback = Feedback {
            ensemble,
            condition,
            evaluation: &evaluation,
            step_size: config.step_size,
            iteration,
        };
        let refined = generator.refine(proposal, &feedback, &mut rng)?;
        let after = ensemble.evaluate(&refined, condition)?;
        let energy = after.composed.value();
        energy_trajectory.push(energy);
        per_scorer_trajectory.push(after.per_scorer);
        current = refined;

        if let Some(tol) = config.early_stop_tolerance {
            if previous - energy < tol {
                break;
            }
        }
        previous = energy;
    }

    Ok(ConsensusResult {
        final_proposal: current,
        iterations_run: energy_trajectory.len(),
        energy_trajectory,
        per_scorer_trajectory,
    })
}

/// Identity proposals refined by a plain gradient step on the composed energy:
/// `x <- x - step_size * grad`.
#[derive(Debug, Clone)]
pub struct GradientDescent<P> {
    start: P,
}

impl<P> GradientDescent<P> {
    pub fn new(start: P) -> Self {
        Self { start }
    }
}

impl<P: Continuous> Generator<P> for GradientDescent<P> {
    fn initial(&mut self, _condition: &Condition, _rng: &mut ChaCha8Rng) -> Result<P, Error> {
        Ok(self.start.clone())
    }

    fn propose(
        &mut self,
        current: &P,
        _iteration: usize,
        _rng: &mut ChaCha8Rng,
    ) -> Result<P, Error> {
        Ok(current.clone())
    }

    fn refine(
        &mut self,
        proposal: P,
        feedback: &Feedback<'_, P>,
        _rng: &mut ChaCha8Rng,
    ) -> Result<P, Error> {
        let grad = compose_gradients(&proposal, feedback.ensemble, feedback.condition)?;
        let coords = proposal
            .coords()
            .iter()
            .zip(&grad)
            .map(|(x, g)| x - feedback.step_size * g)
            .collect();
        Ok(proposal.with_coords(coords))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorers::QuadraticEnergy;

    #[test]
    fn zero_iterations_rejected() {
        let cfg = RefinementConfig {
            iterations: 0,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        let ens = EnsembleSpec::single(QuadraticEnergy::centered("q", vec![0.0]));
        let mut g = GradientDescent::new(vec![1.0]);
        assert!(run_consensus(&mut g, &ens, &Condition::ClassLabel(0), &cfg).is_err());
    }

    #[test]
    fn nonpositive_step_rejected() {
        for s in [0.0, -1.0, f64::NAN] {
            let cfg = RefinementConfig {
                step_size: s,
                ..Default::default()
            };
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn convex_descent_is_monotone() {
        let ens = EnsembleSpec::single(QuadraticEnergy::new("q", vec![1.0, -2.0, 0.5], 3.0));
        let mut g = GradientDescent::new(vec![4.0, 4.0, -4.0]);
        let cfg = RefinementConfig {
            step_size: 0.05,
            iterations: 50,
            ..Default::default()
        };
        let r = run_consensus(&mut g, &ens, &Condition::ClassLabel(0), &cfg).unwrap();
        assert_eq!(r.iterations_run, 50);
        assert_eq!(r.energy_trajectory.len(), 50);
        assert!(r.per_scorer_trajectory.iter().all(|row| row.len() == 1));
        for w in r.energy_trajectory.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(r.energy_trajectory.last().unwrap() < &1e-3);
    }

    #[test]
    fn huge_tolerance_stops_after_one_iteration() {
        let ens = EnsembleSpec::single(QuadraticEnergy::centered("q", vec![0.0]));
        let mut g = GradientDescent::new(vec![3.0]);
        let cfg = RefinementConfig {
            step_size: 0.1,
            iterations: 100,
            early_stop_tolerance: Some(1e300),
            ..Default::default()
        };
        let r = run_consensus(&mut g, &ens, &Condition::ClassLabel(0), &cfg).unwrap();
        assert_eq!(r.iterations_run, 1);
    }
}
