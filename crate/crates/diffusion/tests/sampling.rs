use std::sync::Arc;

use consensus_core::scorers::QuadraticEnergy;
use consensus_core::{Condition, EnsembleSpec, ScorerHandle};
use consensus_diffusion::{
    bayes_accuracy, exact_score, guided_reverse_step, sample_class, Denoiser, DiffusionSettings,
    GuidanceSpec, MixtureTarget, NoiseSchedule, SamplePoint, Sampler, ScorerSet,
};
use nalgebra::{DMatrix, DVector};

fn schedule() -> NoiseSchedule {
    NoiseSchedule::default_base().respaced(100).unwrap()
}

fn point(coords: Vec<f64>, step: usize, s: &NoiseSchedule) -> SamplePoint {
    SamplePoint {
        coords,
        step,
        alpha_bar: s.alpha_bar(step),
    }
}

fn ddim(x: &[f64], eps: &[f64], a: f64, a_prev: f64) -> Vec<f64> {
    x.iter()
        .zip(eps)
        .map(|(xi, ei)| {
            let x0 = (xi - (1.0 - a).sqrt() * ei) / a.sqrt();
            a_prev.sqrt() * x0 + (1.0 - a_prev).sqrt() * ei
        })
        .collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[test]
fn guidance_off_is_a_plain_marginal_ddim_step() {
    let target = MixtureTarget::default_target();
    let s = schedule();
    let x = point(vec![0.7, -1.9], 60, &s);
    let out = guided_reverse_step(
        &x,
        &target,
        &s,
        &Condition::ClassLabel(1),
        &GuidanceSpec::unguided(),
    )
    .unwrap();
    let sigma = (1.0 - x.alpha_bar).sqrt();
    let eps: Vec<f64> = exact_score(&x.coords, 60, &target, Denoiser::Marginal, &s)
        .unwrap()
        .iter()
        .map(|v| -sigma * v)
        .collect();
    let expect = ddim(&x.coords, &eps, x.alpha_bar, s.alpha_bar(59));
    assert_eq!(out.step, 59);
    assert!(dist(&out.coords, &expect) < 1e-12);
}

#[test]
fn classifier_free_step_combines_both_denoisers() {
    let target = MixtureTarget::default_target();
    let s = schedule();
    for (t, w) in [(80usize, 3.0), (30, 0.5), (5, 7.0)] {
        let x = point(vec![-2.0, 3.1], t, &s);
        let g = GuidanceSpec {
            lambda: 0.0,
            cfg_weight: w,
            ensemble: None,
        };
        let out = guided_reverse_step(&x, &target, &s, &Condition::ClassLabel(2), &g).unwrap();
        let sigma = (1.0 - x.alpha_bar).sqrt();
        let sc = exact_score(&x.coords, t, &target, Denoiser::Class(2), &s).unwrap();
        let sm = exact_score(&x.coords, t, &target, Denoiser::Marginal, &s).unwrap();
        let eps: Vec<f64> = sc
            .iter()
            .zip(&sm)
            .map(|(c, m)| (1.0 + w) * (-sigma * c) - w * (-sigma * m))
            .collect();
        let expect = ddim(&x.coords, &eps, x.alpha_bar, s.alpha_bar(t - 1));
        assert!(dist(&out.coords, &expect) < 1e-10, "t={t} w={w}");
    }
}

#[test]
fn quadratic_energy_pulls_the_step_toward_its_center() {
    let target = MixtureTarget::default_target();
    let s = schedule();
    let mu = target.class_mean(3).unwrap();
    let quad = QuadraticEnergy::new("quadratic", mu.as_slice().to_vec(), 1.0);
    let ensemble = EnsembleSpec::new(vec![ScorerHandle::<SamplePoint>::new(quad)]).unwrap();
    let cond = Condition::ClassLabel(3);
    for t in [90usize, 50, 10] {
        let x = point(vec![1.0, 1.0], t, &s);
        let plain = guided_reverse_step(&x, &target, &s, &cond, &GuidanceSpec::unguided()).unwrap();
        let guided = guided_reverse_step(
            &x,
            &target,
            &s,
            &cond,
            &GuidanceSpec {
                lambda: 0.05,
                cfg_weight: 0.0,
                ensemble: Some(ensemble.clone()),
            },
        )
        .unwrap();
        assert!(dist(&guided.coords, mu.as_slice()) < dist(&plain.coords, mu.as_slice()));
    }
}

#[test]
fn steps_outside_the_schedule_are_rejected() {
    let target = MixtureTarget::default_target();
    let s = schedule();
    let g = GuidanceSpec::unguided();
    let cond = Condition::ClassLabel(0);
    assert!(guided_reverse_step(&point(vec![0.0, 0.0], 0, &s), &target, &s, &cond, &g).is_err());
    let far = SamplePoint {
        coords: vec![0.0, 0.0],
        step: 101,
        alpha_bar: 0.1,
    };
    assert!(guided_reverse_step(&far, &target, &s, &cond, &g).is_err());
    let missing = Condition::Question(vec![1]);
    assert!(guided_reverse_step(&point(vec![0.0, 0.0], 3, &s), &target, &s, &missing, &g).is_err());
}

#[test]
fn exploding_guidance_is_reported() {
    let target = MixtureTarget::default_target();
    let s = schedule();
    let quad = QuadraticEnergy::new("quadratic", vec![0.0, 0.0], 1e308);
    let g = GuidanceSpec {
        lambda: 1e308,
        cfg_weight: 0.0,
        ensemble: Some(EnsembleSpec::new(vec![ScorerHandle::<SamplePoint>::new(quad)]).unwrap()),
    };
    let r = guided_reverse_step(
        &point(vec![5.0, 5.0], 50, &s),
        &target,
        &s,
        &Condition::ClassLabel(0),
        &g,
    );
    assert!(r.is_err());
}

#[test]
fn unguided_samples_match_single_gaussian_moments() {
    let mean = DVector::from_vec(vec![1.5, -1.0]);
    let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5]);
    let target = Arc::new(MixtureTarget::single_gaussian(mean.clone(), cov.clone()).unwrap());
    let n = 10_000;
    // 100 DDIM steps shrink the variance by a few percent, which is larger than
    // the Monte Carlo band at this n; the full base schedule is used instead.
    let sampler = Sampler::new(
        target,
        NoiseSchedule::default_base(),
        GuidanceSpec::unguided(),
    )
    .unwrap();
    let pts = sampler.sample(0, n, 7).unwrap();
    let nf = n as f64;
    let m: Vec<f64> = (0..2)
        .map(|i| pts.iter().map(|p| p.coords[i]).sum::<f64>() / nf)
        .collect();
    for i in 0..2 {
        assert!(
            (m[i] - mean[i]).abs() < 3.0 * (cov[(i, i)] / nf).sqrt(),
            "mean[{i}] {}",
            m[i]
        );
        for j in 0..2 {
            let c = pts
                .iter()
                .map(|p| (p.coords[i] - m[i]) * (p.coords[j] - m[j]))
                .sum::<f64>()
                / (nf - 1.0);
            // Gaussian: Var[x_i x_j] = S_ii S_jj + S_ij^2
            let se = ((cov[(i, i)] * cov[(j, j)] + cov[(i, j)].powi(2)) / nf).sqrt();
            assert!((c - cov[(i, j)]).abs() < 3.0 * se, "cov[{i},{j}] {c}");
        }
    }
}

#[test]
fn sampling_is_deterministic_and_executor_independent() {
    let target = Arc::new(MixtureTarget::default_target());
    let settings = DiffusionSettings::default();
    let g = settings
        .guidance(&target, ScorerSet::new(true, true, true))
        .unwrap();
    let par = Sampler::with_steps(target.clone(), 30, g.clone()).unwrap();
    let ser = Sampler::with_steps(target, 30, g).unwrap().parallel(false);
    let a = par.sample(1, 64, 42).unwrap();
    assert_eq!(a, par.sample(1, 64, 42).unwrap());
    assert_eq!(a, ser.sample(1, 64, 42).unwrap());
    assert_ne!(a, par.sample(1, 64, 43).unwrap());
}

#[test]
fn traced_energy_decreases_under_guidance() {
    let target = Arc::new(MixtureTarget::default_target());
    let settings = DiffusionSettings::default();
    let g = settings
        .guidance(&target, ScorerSet::new(true, true, false))
        .unwrap();
    let trace = Sampler::with_steps(target, 50, g)
        .unwrap()
        .sample_traced(0, 64, 3)
        .unwrap();
    assert_eq!(trace.mean_energy.len(), 51);
    assert!(trace.mean_energy.last().unwrap() < trace.mean_energy.first().unwrap());
}

#[test]
fn guidance_improves_bayes_accuracy_on_every_seed() {
    let target = Arc::new(MixtureTarget::default_target());
    let settings = DiffusionSettings {
        samples_per_class: 100,
        ..DiffusionSettings::default()
    };
    let mut gain = 0.0;
    for seed in 0..5 {
        let plain = settings
            .mean_accuracy(&target, ScorerSet::GENERATOR_ONLY, seed)
            .unwrap();
        let guided = settings
            .mean_accuracy(&target, ScorerSet::new(true, true, true), seed)
            .unwrap();
        assert!(guided >= plain, "seed {seed}: {guided} < {plain}");
        gain += guided - plain;
    }
    assert!(gain > 0.0);
}

#[test]
fn unguided_two_class_samples_split_evenly() {
    let target = Arc::new(MixtureTarget::rays(2, 1, 8.0).unwrap());
    let n = 4000;
    let pts = sample_class(target.clone(), 0, GuidanceSpec::unguided(), n, 5).unwrap();
    let acc = bayes_accuracy(&pts, 0, &target).unwrap();
    let band = 3.0 * (0.25 / n as f64).sqrt();
    assert!((acc - 0.5).abs() < band, "{acc}");
}
