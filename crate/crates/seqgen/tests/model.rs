use std::collections::HashSet;

use consensus_core::numeric::softmax;
use consensus_core::EnsembleSpec;
use consensus_seqgen::*;
use proptest::prelude::*;

fn corpus_of(lines: &[&str]) -> Corpus {
    let v = Vocabulary::standard();
    Corpus {
        lines: lines.iter().map(|l| v.tokenize(l).unwrap()).collect(),
        problems: HashSet::new(),
    }
}

fn exact() -> EnsembleSpec<Continuation> {
    EnsembleSpec::single(SolutionScorer::exact())
}

#[test]
fn measured_wrong_fraction_is_within_binomial_band() {
    for (fraction, seed) in [(0.3, 0u64), (0.1, 1), (0.5, 2)] {
        let spec = CorpusSpec {
            size: 5000,
            wrong_answer_fraction: fraction,
            operators: vec![Op::Add, Op::Sub, Op::Mul, Op::Div],
            ..CorpusSpec::default()
        };
        let corpus = build_corpus(&spec, seed).unwrap();
        let wrong = corpus
            .lines
            .iter()
            .filter(|line| {
                let eq = line.iter().position(|&t| t == EQUALS).unwrap();
                let lhs: Vec<String> = Vocabulary::standard()
                    .render(&line[..eq])
                    .split(' ')
                    .map(String::from)
                    .collect();
                let a: i64 = lhs[0].parse().unwrap();
                let b: i64 = lhs[2].parse().unwrap();
                let truth = match lhs[1].as_str() {
                    "+" => a + b,
                    "-" => a - b,
                    "*" => a * b,
                    "/" => a / b,
                    other => panic!("{other}"),
                };
                let c: i64 = Vocabulary::standard()
                    .render(&line[eq + 1..line.len() - 1])
                    .parse()
                    .unwrap();
                assert!(c >= 0);
                if c != truth {
                    assert!((1..=3).contains(&(c - truth).abs()));
                }
                c != truth
            })
            .count();
        let n = spec.size as f64;
        let band = 3.0 * (fraction * (1.0 - fraction) / n).sqrt();
        let measured = wrong as f64 / n;
        assert!(
            (measured - fraction).abs() < band,
            "{measured} vs {fraction}"
        );
    }
}

#[test]
fn corpus_is_deterministic_per_seed() {
    let spec = CorpusSpec::default();
    assert_eq!(
        build_corpus(&spec, 9).unwrap(),
        build_corpus(&spec, 9).unwrap()
    );
    assert_ne!(
        build_corpus(&spec, 9).unwrap().lines,
        build_corpus(&spec, 10).unwrap().lines
    );
}

/// Counts by hand for the bigram model over five short lines.
#[test]
fn smoothed_logits_recover_hand_counts() {
    let corpus = corpus_of(&[
        "1 + 1 = 2 <eos>",
        "1 + 2 = 3 <eos>",
        "2 + 1 = 3 <eos>",
        "1 - 1 = 0 <eos>",
        "3 + 1 = 4 <eos>",
    ]);
    let g = fit_generator(&corpus, 2).unwrap();
    let counts =
        |ctx: Token| -> Vec<f64> { g.logits(&[ctx]).iter().map(|l| l.exp() - 1.0).collect() };
    // after "1": "+" x2, "-" x1, "=" x4
    let after_one = counts(1);
    assert!((after_one[PLUS as usize] / after_one[EQUALS as usize] - 2.0 / 4.0).abs() < 1e-9);
    assert!((after_one[MINUS as usize] / after_one[PLUS as usize] - 0.5).abs() < 1e-9);
    // after "=": 2, 3, 3, 0, 4
    let after_eq = counts(EQUALS);
    assert!((after_eq[3] / after_eq[2] - 2.0).abs() < 1e-9);
    assert!((after_eq[0] / after_eq[4] - 1.0).abs() < 1e-9);
    // line starts: "1" x3, "2" x1, "3" x1
    let start = counts(SEP);
    assert!((start[1] / start[2] - 3.0).abs() < 1e-9);
    assert!(start[EOS as usize].abs() < 1e-9);
}

fn toy() -> ToyGenerator {
    fit_generator(&build_corpus(&CorpusSpec::default(), 0).unwrap(), 3).unwrap()
}

#[test]
fn unbiased_candidates_are_the_generator_top_k() {
    let g = toy();
    let ctx = Problem::new(12, Op::Add, 7).unwrap().question_tokens();
    let c = propose_candidates(&g, &ctx, &ContextBias::zeros(17), 5).unwrap();
    let l = g.logits(&ctx);
    let mut order: Vec<usize> = (0..17).collect();
    order.sort_by(|&a, &b| l[b].partial_cmp(&l[a]).unwrap().then(a.cmp(&b)));
    let expect: Vec<Token> = order[..5].iter().map(|&i| i as Token).collect();
    assert_eq!(c.tokens, expect);
    assert!((c.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn large_bias_forces_a_token_in_and_dominates() {
    let g = toy();
    let ctx = Problem::new(12, Op::Add, 7).unwrap().question_tokens();
    let mut bias = ContextBias::zeros(17);
    bias.values[TIMES as usize] = 10.0;
    let c = propose_candidates(&g, &ctx, &bias, 4).unwrap();
    let i = c.tokens.iter().position(|&t| t == TIMES).unwrap();
    assert!(c.probs[i] > 0.99);
}

#[test]
fn full_vocabulary_candidates_match_softmax() {
    let g = toy();
    let ctx = vec![3, PLUS];
    let mut bias = ContextBias::zeros(17);
    bias.values[4] = 0.7;
    bias.values[EOS as usize] = -1.3;
    let c = propose_candidates(&g, &ctx, &bias, 17).unwrap();
    let direct = softmax(&bias.apply(g.logits(&ctx)));
    for (t, p) in c.tokens.iter().zip(&c.probs) {
        assert!((p - direct[*t as usize]).abs() < 1e-12);
    }
    assert!(matches!(
        propose_candidates(&g, &ctx, &bias, 18),
        Err(SeqgenError::TooManyCandidates { .. })
    ));
}

#[test]
fn all_wrong_candidates_give_uniform_q() {
    let q = scorer_distribution(&exact(), &[2, PLUS, 2, EQUALS], &[], &[1, 2, 3], 0.3).unwrap();
    assert!(q.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
}

#[test]
fn cold_temperature_concentrates_on_the_correct_candidate() {
    let q = scorer_distribution(&exact(), &[2, PLUS, 2, EQUALS], &[], &[1, 4, 3], 1e-3).unwrap();
    assert!(q[1] > 1.0 - 1e-12);
}

#[test]
fn unit_temperature_matches_direct_softmax() {
    let q = scorer_distribution(&exact(), &[2, PLUS, 2, EQUALS], &[], &[4, 5, 6, 7], 1.0).unwrap();
    let z = 1.0 + 3.0 * (-1.0f64).exp();
    let direct = [
        1.0 / z,
        (-1.0f64).exp() / z,
        (-1.0f64).exp() / z,
        (-1.0f64).exp() / z,
    ];
    for (a, b) in q.iter().zip(direct) {
        assert!((a - b).abs() < 1e-15);
    }
    assert!((q[0] - 0.4754).abs() < 5e-5 && (q[1] - 0.1749).abs() < 5e-5);
}

#[test]
fn question_without_equals_is_malformed() {
    assert!(scorer_distribution(&exact(), &[2, PLUS, 2], &[], &[4, 5], 1.0).is_err());
}

#[test]
fn eos_is_correct_only_after_the_full_answer() {
    let p = Problem::new(7, Op::Add, 5).unwrap();
    assert!(is_correct_prefix(&p, &[1]));
    assert!(is_correct_prefix(&p, &[1, 2, EOS]));
    assert!(!is_correct_prefix(&p, &[1, EOS]));
    assert!(!is_correct_prefix(&p, &[1, 2, EOS, EOS]));
}

/// Brute force: enumerate every prefix/candidate and compare with the
/// definition of the exact oracle, over random problems.
#[test]
fn exact_oracle_agrees_with_string_prefix_check() {
    let spec = CorpusSpec {
        operators: vec![Op::Add, Op::Sub, Op::Mul, Op::Div],
        ..CorpusSpec::default()
    };
    let mut rng = consensus_core::numeric::stream_rng(5, 0);
    let v = Vocabulary::standard();
    let all: Vec<Token> = (0..17).collect();
    for _ in 0..1000 {
        let p = spec.draw(&mut rng);
        let truth = format!("{}<eos>", p.answer());
        let digits = p.answer().to_string().len();
        let prefix_len = rand::Rng::random_range(&mut rng, 0..=digits);
        let prefix = v.tokenize(&truth[..prefix_len]).unwrap();
        let energies = candidate_energies(&exact(), &p.question_tokens(), &prefix, &all).unwrap();
        for (&c, e) in all.iter().zip(&energies) {
            let mut s = v.render(&prefix).replace(' ', "");
            s.push_str(v.surface(c));
            let expected = if truth.starts_with(&s) { 0.0 } else { 1.0 };
            assert_eq!(*e, expected, "{} prefix {s}", p.question_text());
        }
    }
}

#[test]
fn noisy_oracle_is_repeatable_and_flips_at_its_rate() {
    let scorer = SolutionScorer::new(OracleMode::Noisy {
        flip_probability: 0.2,
        seed: 3,
    })
    .unwrap();
    let ens = EnsembleSpec::single(scorer);
    let all: Vec<Token> = (0..17).collect();
    let mut flips = 0;
    let mut n = 0;
    for a in 0..60u64 {
        let q = Problem::new(a, Op::Add, 3).unwrap().question_tokens();
        let noisy = candidate_energies(&ens, &q, &[], &all).unwrap();
        assert_eq!(noisy, candidate_energies(&ens, &q, &[], &all).unwrap());
        let clean = candidate_energies(&exact(), &q, &[], &all).unwrap();
        flips += noisy.iter().zip(&clean).filter(|(x, y)| x != y).count();
        n += all.len();
    }
    let rate = flips as f64 / n as f64;
    assert!(
        (rate - 0.2).abs() < 3.0 * (0.16 / n as f64).sqrt(),
        "{rate}"
    );
    assert!(SolutionScorer::new(OracleMode::Noisy {
        flip_probability: 0.5,
        seed: 0
    })
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn candidate_probabilities_are_normalized(
        logits in prop::collection::vec(-5.0..5.0f64, 17),
        bias in prop::collection::vec(-3.0..3.0f64, 17),
        k in 2usize..=17,
    ) {
        let c = top_candidates(&logits, &ContextBias { values: bias }, k).unwrap();
        prop_assert_eq!(c.tokens.len(), k);
        prop_assert!((c.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
