use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::{DiffusionError, MixtureClass, MixtureTarget, NoisedMixture, SamplePoint};

/// First two moments of a distribution or of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl Moments {
    pub fn of_mixture(class: &MixtureClass) -> Self {
        let (mean, cov) = class.moments();
        Self { mean, cov }
    }
}

/// Sample mean and unbiased sample covariance. Needs at least `d + 1` points.
pub fn fit_moments(points: &[Vec<f64>]) -> Result<Moments, DiffusionError> {
    let d = points.first().map_or(0, Vec::len);
    if points.len() < d + 1 || d == 0 {
        return Err(DiffusionError::TooFewSamples {
            needed: d.max(1) + 1,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mut mean = DVector::zeros(d);
    for p in points {
        mean += DVector::from_column_slice(p);
    }
    mean /= n;
    let mut cov = DMatrix::zeros(d, d);
    for p in points {
        let diff = DVector::from_column_slice(p) - &mean;
        cov += &diff * diff.transpose();
    }
    cov /= n - 1.0;
    Ok(Moments { mean, cov })
}

/// Squared Fréchet (2-Wasserstein) distance between two Gaussians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrechetDistance {
    pub squared: f64,
    /// True when a covariance had to be regularized by `1e-8 * I`.
    pub regularized: bool,
}

impl FrechetDistance {
    pub fn distance(&self) -> f64 {
        self.squared.sqrt()
    }
}

const RIDGE: f64 = 1e-8;

/// `|mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a^{1/2} S_b S_a^{1/2})^{1/2})`.
///
/// The trace of the matrix square root is evaluated through the Cholesky
/// factor `S_a = L L^T`: `L^T S_b L` is similar to `S_a S_b`, so the trace
/// equals the sum of square roots of its eigenvalues.
pub fn frechet_gaussian_distance(a: &Moments, b: &Moments) -> FrechetDistance {
    let d = a.mean.len();
    let mut regularized = false;
    let (cov_a, cov_b) =
        if Cholesky::new(a.cov.clone()).is_some() && Cholesky::new(b.cov.clone()).is_some() {
            (a.cov.clone(), b.cov.clone())
        } else {
            regularized = true;
            let ridge = DMatrix::identity(d, d) * RIDGE;
            (&a.cov + &ridge, &b.cov + &ridge)
        };
    let chol = Cholesky::new(cov_a.clone())
        .or_else(|| {
            regularized = true;
            Cholesky::new(&cov_a + DMatrix::identity(d, d) * RIDGE)
        })
        .expect("ridge makes a symmetric PSD matrix definite");
    let l = chol.l();
    let m = l.transpose() * &cov_b * &l;
    let m = (&m + m.transpose()) * 0.5;
    let tr_sqrt: f64 = SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .sum();
    let diff = &a.mean - &b.mean;
    let squared = diff.norm_squared() + cov_a.trace() + cov_b.trace() - 2.0 * tr_sqrt;
    FrechetDistance {
        squared: squared.max(0.0),
        regularized,
    }
}

/// Label chosen by the exact Bayes classifier on clean data (equal priors).
/// Exact ties go to the lowest class id.
pub fn bayes_label(x: &[f64], mixtures: &[NoisedMixture]) -> usize {
    let mut best = 0;
    let mut best_log = f64::NEG_INFINITY;
    for (c, m) in mixtures.iter().enumerate() {
        let l = m.log_density(x);
        if l > best_log {
            best = c;
            best_log = l;
        }
    }
    best
}

/// Fraction of `samples` that the exact Bayes classifier assigns to `class`.
pub fn bayes_accuracy(
    samples: &[SamplePoint],
    class: usize,
    target: &MixtureTarget,
) -> Result<f64, DiffusionError> {
    if target.num_classes() < 2 {
        return Err(DiffusionError::InvalidMixture(
            "Bayes accuracy needs at least two classes".into(),
        ));
    }
    target.class(class)?;
    if samples.is_empty() {
        return Ok(0.0);
    }
    let clean = clean_mixtures(target)?;
    let hits = samples
        .iter()
        .filter(|s| bayes_label(&s.coords, &clean) == class)
        .count();
    Ok(hits as f64 / samples.len() as f64)
}

pub(crate) fn clean_mixtures(target: &MixtureTarget) -> Result<Vec<NoisedMixture>, DiffusionError> {
    target
        .classes()
        .iter()
        .map(|c| NoisedMixture::at(c, 1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(mean: &[f64], cov: &[f64]) -> Moments {
        let d = mean.len();
        Moments {
            mean: DVector::from_column_slice(mean),
            cov: DMatrix::from_row_slice(d, d, cov),
        }
    }

    #[test]
    fn identical_moments_are_zero() {
        let a = moments(&[1.0, -2.0], &[2.0, 0.3, 0.3, 1.0]);
        let fd = frechet_gaussian_distance(&a, &a);
        assert!(fd.squared.abs() < 1e-12);
        assert!(!fd.regularized);
    }

    #[test]
    fn equal_covariance_reduces_to_mean_gap() {
        let a = moments(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]);
        let b = moments(&[3.0, 4.0], &[1.0, 0.0, 0.0, 1.0]);
        let fd = frechet_gaussian_distance(&a, &b);
        assert!((fd.squared - 25.0).abs() < 1e-12);
        assert!((fd.distance() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_covariance_is_regularized() {
        let a = moments(&[0.0, 0.0], &[1.0, 1.0, 1.0, 1.0]);
        let b = moments(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]);
        let fd = frechet_gaussian_distance(&a, &b);
        assert!(fd.regularized);
        assert!(fd.squared.is_finite() && fd.squared >= 0.0);
    }

    #[test]
    fn fit_needs_enough_points() {
        assert!(fit_moments(&[vec![0.0, 1.0], vec![1.0, 0.0]]).is_err());
        let m = fit_moments(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 3.0]]).unwrap();
        assert!((m.mean[0] - 1.0).abs() < 1e-15 && (m.mean[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn points_at_isolated_means_are_classified_perfectly() {
        let target = MixtureTarget::default_target();
        for c in 0..target.num_classes() {
            let pts: Vec<SamplePoint> = target.classes()[c]
                .components
                .iter()
                .map(|comp| SamplePoint {
                    coords: comp.mean.iter().copied().collect(),
                    step: 0,
                    alpha_bar: 1.0,
                })
                .collect();
            assert_eq!(bayes_accuracy(&pts, c, &target).unwrap(), 1.0);
        }
    }

    #[test]
    fn boundary_ties_go_to_lowest_class() {
        // Two mirrored classes; the origin is equidistant from both.
        let target = MixtureTarget::rays(2, 1, 8.0).unwrap();
        let origin = SamplePoint {
            coords: vec![0.0, 0.0],
            step: 0,
            alpha_bar: 1.0,
        };
        let clean = clean_mixtures(&target).unwrap();
        assert_eq!(bayes_label(&origin.coords, &clean), 0);
        assert_eq!(
            bayes_accuracy(std::slice::from_ref(&origin), 0, &target).unwrap(),
            1.0
        );
        assert_eq!(bayes_accuracy(&[origin], 1, &target).unwrap(), 0.0);
    }

    #[test]
    fn single_class_targets_are_rejected() {
        let t = MixtureTarget::single_gaussian(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
        assert!(bayes_accuracy(&[], 0, &t).is_err());
    }
}
