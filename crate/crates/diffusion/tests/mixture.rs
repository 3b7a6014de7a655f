use consensus_core::numeric::stream_rng;
use consensus_diffusion::{
    exact_score, noised_mixture, tweedie_denoise, Component, Denoiser, MixtureClass, MixtureTarget,
    NoiseSchedule, NoisedMixture,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn schedule() -> NoiseSchedule {
    NoiseSchedule::default_base().respaced(100).unwrap()
}

fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + h;
            let fp = f(&p);
            p[i] = x[i] - h;
            let fm = f(&p);
            p[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn spd(d: usize, raw: &[f64], jitter: f64) -> DMatrix<f64> {
    let a = DMatrix::from_column_slice(d, d, &raw[..d * d]);
    &a * a.transpose() + DMatrix::identity(d, d) * jitter
}

#[test]
fn clean_step_returns_the_class_mixture() {
    let target = MixtureTarget::default_target();
    for c in 0..4 {
        let m = noised_mixture(&target, Denoiser::Class(c), 0, &schedule()).unwrap();
        assert_eq!(&m, &target.classes()[c]);
    }
}

#[test]
fn pure_noise_limit_is_standard_normal() {
    let target = MixtureTarget::default_target();
    let m = target.classes()[2].noised(0.0);
    for c in &m.components {
        assert!(c.mean.iter().all(|v| v.abs() < 1e-15));
        assert!((&c.cov - DMatrix::<f64>::identity(2, 2)).amax() < 1e-15);
    }
}

#[test]
fn out_of_range_step_is_an_error() {
    let target = MixtureTarget::default_target();
    assert!(noised_mixture(&target, Denoiser::Class(0), 101, &schedule()).is_err());
    assert!(noised_mixture(&target, Denoiser::Class(9), 1, &schedule()).is_err());
}

#[test]
fn noising_twice_equals_noising_once() {
    let target = MixtureTarget::default_target();
    let s = schedule();
    for (t1, t2) in [(5, 40), (1, 100), (30, 31)] {
        let (a1, a2) = (s.alpha_bar(t1), s.alpha_bar(t2));
        let twice = target.classes()[1].noised(a1).noised(a2 / a1);
        let once = target.classes()[1].noised(a2);
        for (x, y) in twice.components.iter().zip(&once.components) {
            assert!((&x.mean - &y.mean).amax() < 1e-12);
            assert!((&x.cov - &y.cov).amax() < 1e-12);
        }
    }
}

/// Forward-process Monte Carlo: draw clean points, noise them, compare the
/// first two moments with the closed-form noised mixture (3 sigma bands).
#[test]
fn forward_process_matches_noised_moments() {
    let class = MixtureClass {
        components: vec![
            Component {
                weight: 0.3,
                mean: DVector::from_vec(vec![2.0, -1.0]),
                cov: DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 0.8]),
            },
            Component {
                weight: 0.7,
                mean: DVector::from_vec(vec![-3.0, 2.5]),
                cov: DMatrix::from_row_slice(2, 2, &[0.5, -0.1, -0.1, 2.0]),
            },
        ],
    };
    let s = schedule();
    let mut rng = stream_rng(11, 0);
    for t in [10usize, 50, 90] {
        let a = s.alpha_bar(t);
        let n = 100_000;
        let draws: Vec<DVector<f64>> = (0..n)
            .map(|_| {
                let x0 = class.sample(&mut rng);
                let eps = DVector::from_fn(2, |_, _| rng.sample::<f64, _>(StandardNormal));
                x0 * a.sqrt() + eps * (1.0 - a).sqrt()
            })
            .collect();
        let (mean, cov) = class.noised(a).moments();
        let nf = n as f64;
        let emp_mean = draws.iter().fold(DVector::zeros(2), |acc, x| acc + x) / nf;
        for i in 0..2 {
            let se = (cov[(i, i)] / nf).sqrt();
            assert!((emp_mean[i] - mean[i]).abs() < 3.0 * se, "t={t} mean[{i}]");
        }
        for i in 0..2 {
            for j in 0..2 {
                let prods: Vec<f64> = draws
                    .iter()
                    .map(|x| (x[i] - emp_mean[i]) * (x[j] - emp_mean[j]))
                    .collect();
                let m = prods.iter().sum::<f64>() / nf;
                let var = prods.iter().map(|p| (p - m).powi(2)).sum::<f64>() / nf;
                let se = (var / nf).sqrt();
                assert!((m - cov[(i, j)]).abs() < 3.0 * se, "t={t} cov[{i},{j}]");
            }
        }
    }
}

#[test]
fn standard_gaussian_score_is_minus_x() {
    let target =
        MixtureTarget::single_gaussian(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
    let s = exact_score(&[1.0, 0.0], 0, &target, Denoiser::Class(0), &schedule()).unwrap();
    assert_eq!(s, vec![-1.0, 0.0]);
}

#[test]
fn symmetric_pair_has_zero_score_at_origin() {
    let target = MixtureTarget::rays(2, 1, 8.0).unwrap();
    let s = exact_score(&[0.0, 0.0], 20, &target, Denoiser::Marginal, &schedule()).unwrap();
    assert!(s.iter().all(|v| v.abs() < 1e-12), "{s:?}");
}

#[test]
fn tweedie_is_identity_at_clean_step() {
    let target = MixtureTarget::default_target();
    let x = [3.0, -7.5];
    let x0 = tweedie_denoise(&x, 0, &target, Denoiser::Class(3), &schedule()).unwrap();
    assert_eq!(x0, x.to_vec());
}

#[test]
fn tweedie_matches_conjugate_gaussian_posterior() {
    let mu = DVector::from_vec(vec![1.0, -2.0, 0.5]);
    let sigma = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.7]);
    let target = MixtureTarget::single_gaussian(mu.clone(), sigma.clone()).unwrap();
    let s = schedule();
    for t in [1usize, 10, 50, 99] {
        let a = s.alpha_bar(t);
        let x = DVector::from_vec(vec![0.4, 1.1, -0.9]);
        let c = &sigma * a + DMatrix::identity(3, 3) * (1.0 - a);
        let post = &mu + &sigma * a.sqrt() * c.try_inverse().unwrap() * (&x - &mu * a.sqrt());
        let got = tweedie_denoise(x.as_slice(), t, &target, Denoiser::Class(0), &s).unwrap();
        for (g, p) in got.iter().zip(post.iter()) {
            assert!((g - p).abs() < 1e-10 * (1.0 + p.abs()), "t={t}: {g} vs {p}");
        }
    }
}

#[test]
fn tweedie_concentrates_on_the_nearest_component() {
    let target = MixtureTarget::default_target();
    let s = schedule();
    let t = (1..=100).rev().find(|&t| s.alpha_bar(t) >= 0.5).unwrap();
    let a = s.alpha_bar(t);
    for c in 0..4 {
        for comp in &target.classes()[c].components {
            let x: Vec<f64> = comp.mean.iter().map(|m| m * a.sqrt()).collect();
            let x0 = tweedie_denoise(&x, t, &target, Denoiser::Class(c), &s).unwrap();
            for (g, m) in x0.iter().zip(comp.mean.iter()) {
                assert!((g - m).abs() < 1e-3, "class {c}: {g} vs {m}");
            }
        }
    }
}

#[derive(Debug, Clone)]
struct RandomMixture {
    dim: usize,
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    covs: Vec<Vec<f64>>,
}

fn random_mixture() -> impl Strategy<Value = RandomMixture> {
    (1usize..4, 1usize..4).prop_flat_map(|(dim, k)| {
        (
            Just(dim),
            prop::collection::vec(0.1..1.0f64, k),
            prop::collection::vec(prop::collection::vec(-5.0..5.0f64, dim), k),
            prop::collection::vec(prop::collection::vec(-1.0..1.0f64, dim * dim), k),
        )
            .prop_map(|(dim, weights, means, covs)| RandomMixture {
                dim,
                weights,
                means,
                covs,
            })
    })
}

impl RandomMixture {
    fn build(&self) -> MixtureClass {
        let total: f64 = self.weights.iter().sum();
        MixtureClass {
            components: (0..self.weights.len())
                .map(|k| Component {
                    weight: self.weights[k] / total,
                    mean: DVector::from_vec(self.means[k].clone()),
                    cov: spd(self.dim, &self.covs[k], 0.2),
                })
                .collect(),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn score_matches_finite_differences(
        mix in random_mixture(),
        t in 0usize..=100,
        raw_x in prop::collection::vec(-6.0..6.0f64, 3),
    ) {
        let s = schedule();
        let m = NoisedMixture::at(&mix.build(), s.alpha_bar(t)).unwrap();
        let x = &raw_x[..mix.dim];
        let g = m.score(x);
        let fd = central_difference(|p| m.log_density(p), x, 1e-5);
        let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
        prop_assert!(norm(&diff) <= 1e-5 * norm(&fd).max(1e-2), "g={g:?} fd={fd:?}");
    }
}
