use crate::DiffusionError;

/// Forward noising schedule. Step `t` runs over `1..=T`; step 0 is clean data
/// with `alpha_bar = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    betas: Vec<f64>,
    alpha_bars: Vec<f64>,
}

impl NoiseSchedule {
    pub fn from_betas(betas: Vec<f64>) -> Result<Self, DiffusionError> {
        if betas.is_empty() {
            return Err(DiffusionError::InvalidSchedule("no steps".into()));
        }
        if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
            return Err(DiffusionError::InvalidSchedule(format!(
                "beta {b} outside (0, 1)"
            )));
        }
        let mut acc = 1.0;
        let alpha_bars = betas
            .iter()
            .map(|b| {
                acc *= 1.0 - b;
                acc
            })
            .collect();
        Ok(Self { betas, alpha_bars })
    }

    /// Betas spaced linearly from `start` to `end` over `steps` steps.
    pub fn linear(steps: usize, start: f64, end: f64) -> Result<Self, DiffusionError> {
        if steps == 0 {
            return Err(DiffusionError::InvalidSchedule("no steps".into()));
        }
        let betas = (0..steps)
            .map(|i| {
                if steps == 1 {
                    start
                } else {
                    start + (end - start) * i as f64 / (steps - 1) as f64
                }
            })
            .collect();
        Self::from_betas(betas)
    }

    /// The 1000-step linear schedule (1e-4 to 0.02) that sampling is respaced
    /// from. Its final `alpha_bar` is about 4e-5, so starting from N(0, I) is
    /// an accurate approximation of the fully noised marginal.
    pub fn default_base() -> Self {
        Self::linear(1000, 1e-4, 0.02).expect("valid constants")
    }

    /// Sub-sampled schedule with `steps` steps ending at the same noise level.
    ///
    /// Keeps the timesteps `round(i * T / steps)` and recomputes the betas so
    /// that the cumulative products match the original schedule there.
    pub fn respaced(&self, steps: usize) -> Result<Self, DiffusionError> {
        let total = self.len();
        if steps == 0 || steps > total {
            return Err(DiffusionError::InvalidSchedule(format!(
                "cannot respace {total} steps into {steps}"
            )));
        }
        let kept: Vec<usize> = (0..=steps)
            .map(|i| ((i * total) as f64 / steps as f64).round() as usize)
            .collect();
        let betas = kept
            .windows(2)
            .map(|w| 1.0 - self.alpha_bar(w[1]) / self.alpha_bar(w[0]))
            .collect();
        Self::from_betas(betas)
    }

    /// Number of steps `T`.
    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// `alpha_bar_t` for `t` in `0..=T`; `t = 0` gives 1.
    pub fn alpha_bar(&self, t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.alpha_bars[t - 1]
        }
    }

    pub fn checked_alpha_bar(&self, t: usize) -> Result<f64, DiffusionError> {
        if t > self.len() {
            return Err(DiffusionError::StepOutOfRange { t, max: self.len() });
        }
        Ok(self.alpha_bar(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_bars_strictly_decrease() {
        let s = NoiseSchedule::linear(100, 1e-4, 0.05).unwrap();
        assert_eq!(s.len(), 100);
        assert_eq!(s.alpha_bar(0), 1.0);
        for t in 1..=100 {
            assert!(s.alpha_bar(t) < s.alpha_bar(t - 1));
            assert!(s.alpha_bar(t) > 0.0);
        }
    }

    #[test]
    fn respacing_preserves_endpoints() {
        let base = NoiseSchedule::default_base();
        for steps in [1, 10, 25, 50, 100, 1000] {
            let r = base.respaced(steps).unwrap();
            assert_eq!(r.len(), steps);
            let rel = (r.alpha_bar(steps) - base.alpha_bar(1000)).abs() / base.alpha_bar(1000);
            assert!(rel < 1e-9, "steps={steps} rel={rel}");
        }
        assert!(base.alpha_bar(1000) < 1e-4);
    }

    #[test]
    fn rejects_bad_betas() {
        assert!(NoiseSchedule::from_betas(vec![]).is_err());
        assert!(NoiseSchedule::from_betas(vec![0.1, 1.0]).is_err());
        assert!(NoiseSchedule::from_betas(vec![0.0]).is_err());
        assert!(NoiseSchedule::default_base().respaced(0).is_err());
        assert!(NoiseSchedule::default_base().respaced(1001).is_err());
        assert!(NoiseSchedule::default_base()
            .checked_alpha_bar(1001)
            .is_err());
    }
}
