use consensus_blockworld::scenario::{random_episode, EpisodeSpec};
use consensus_blockworld::{
    render_view, standard_views, view_energy, view_ensemble, Cell, GoalQuery, Object,
    ObservationTime, Predicate, Region, Relation, ViewSpec, WorldState,
};
use consensus_core::Energy;
use proptest::prelude::*;

fn at(episode: u64, step: u64) -> ObservationTime {
    ObservationTime { episode, step }
}

fn line_state() -> WorldState {
    WorldState::new(
        8,
        8,
        vec![
            Object {
                id: 0,
                label: "a".into(),
                cell: Cell::new(1, 2),
            },
            Object {
                id: 1,
                label: "b".into(),
                cell: Cell::new(6, 2),
            },
            Object {
                id: 2,
                label: "c".into(),
                cell: Cell::new(3, 5),
            },
        ],
    )
    .unwrap()
}

/// Recount from the observation alone: a relation counts as met only when
/// the view senses its axis and both labels are seen in the right order.
fn recount(state: &WorldState, view: &ViewSpec, goal: &[Relation], t: ObservationTime) -> u32 {
    let obs = render_view(state, view, t);
    let mut violated = 0;
    for r in goal {
        let sensed = match r.predicate {
            Predicate::LeftOf | Predicate::RightOf => obs.horizontal,
            Predicate::Above | Predicate::Below => obs.vertical,
        };
        let label = |id| &state.object(id).unwrap().label;
        let s = obs.objects.iter().find(|o| &o.label == label(r.subject));
        let o = obs.objects.iter().find(|o| &o.label == label(r.object));
        let met = match (sensed, s, o) {
            (true, Some(s), Some(o)) => match r.predicate {
                Predicate::LeftOf => s.cell.col < o.cell.col,
                Predicate::RightOf => s.cell.col > o.cell.col,
                Predicate::Above => s.cell.row < o.cell.row,
                Predicate::Below => s.cell.row > o.cell.row,
            },
            _ => false,
        };
        violated += u32::from(!met);
    }
    violated
}

#[test]
fn identity_view_sees_the_true_state() {
    let s = line_state();
    let obs = render_view(&s, &ViewSpec::identity(0, 8, 8), at(0, 0));
    assert_eq!(obs.objects.len(), 3);
    for (o, seen) in s.objects.iter().zip(&obs.objects) {
        assert_eq!((&o.label, o.cell), (&seen.label, seen.cell));
    }
    let goal = [
        Relation::new(0, Predicate::LeftOf, 1).unwrap(),
        Relation::new(2, Predicate::Below, 0).unwrap(),
        Relation::new(2, Predicate::RightOf, 1).unwrap(),
    ];
    assert_eq!(
        view_energy(&s, &ViewSpec::identity(0, 8, 8), &goal, at(0, 0)),
        1
    );
}

#[test]
fn partial_views_are_pessimistic() {
    let s = line_state();
    let views = standard_views(8, 8, 0.0).unwrap();
    let left = Relation::new(0, Predicate::LeftOf, 1).unwrap();
    let below = Relation::new(2, Predicate::Below, 0).unwrap();
    // Object 1 sits in the right half: the left camera cannot confirm it.
    assert_eq!(view_energy(&s, &views[1], &[left], at(0, 0)), 1);
    assert_eq!(view_energy(&s, &views[1], &[below], at(0, 0)), 0);
    let obs = render_view(&s, &views[1], at(0, 0));
    assert!(obs.objects.iter().all(|o| o.cell.col < 4));
    // Axis-limited cameras cannot confirm the other axis.
    assert_eq!(view_energy(&s, &views[3], &[left, below], at(0, 0)), 1);
    assert_eq!(view_energy(&s, &views[4], &[left, below], at(0, 0)), 1);
}

#[test]
fn confusion_rate_matches_the_setting() {
    let spec = EpisodeSpec::default();
    let view = ViewSpec::new(9, Region::full(8, 8), 0.2, true, true, 17).unwrap();
    let (mut n, mut swapped) = (0u32, 0u32);
    for e in 0..2000 {
        let (s, _) = random_episode(&spec, 0, e % 50).unwrap();
        let obs = render_view(&s, &view, at(e, 1));
        for (o, seen) in s.objects.iter().zip(&obs.objects) {
            n += 1;
            if o.label != seen.label {
                assert!(s.objects.iter().any(|x| x.label == seen.label));
                swapped += 1;
            }
        }
    }
    let p = swapped as f64 / n as f64;
    let sigma = (0.2 * 0.8 / n as f64).sqrt();
    assert!((p - 0.2).abs() < 3.0 * sigma, "rate {p}");
}

#[test]
fn observations_are_fixed_per_time_and_vary_across_time() {
    let (s, _) = random_episode(&EpisodeSpec::default(), 4, 0).unwrap();
    let view = ViewSpec::new(1, Region::full(8, 8), 0.3, true, true, 5).unwrap();
    assert_eq!(
        render_view(&s, &view, at(3, 2)),
        render_view(&s, &view, at(3, 2))
    );
    let differs =
        (0..50).any(|k| render_view(&s, &view, at(3, k)) != render_view(&s, &view, at(3, 2)));
    assert!(differs);
}

#[test]
fn ensemble_energy_equals_summed_recount() {
    let spec = EpisodeSpec::default();
    let views = standard_views(spec.width, spec.height, 0.1).unwrap();
    let ensemble = view_ensemble(&views).unwrap();
    for e in 0..1000 {
        let (s, goal) = random_episode(&spec, 9, e).unwrap();
        let t = at(e, e % 3);
        let want: u32 = views.iter().map(|v| recount(&s, v, &goal, t)).sum();
        let got = ensemble
            .evaluate(&s, &GoalQuery::condition(goal.clone(), t))
            .unwrap();
        assert_eq!(
            got.composed,
            Energy::new(want as f64).unwrap(),
            "episode {e}"
        );
        for (v, per) in views.iter().zip(&got.per_scorer) {
            assert_eq!(*per, recount(&s, v, &goal, t) as f64);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn adding_a_view_never_lowers_energy(seed in 0u64..1000, episode in 0u64..1000, n in 1usize..5) {
        let spec = EpisodeSpec::default();
        let (s, goal) = random_episode(&spec, seed, episode).unwrap();
        let views = standard_views(8, 8, 0.1).unwrap();
        let t = at(episode, 0);
        let fewer = view_ensemble(&views[..n]).unwrap();
        let more = view_ensemble(&views[..n + 1]).unwrap();
        let c = GoalQuery::condition(goal, t);
        let a = fewer.evaluate(&s, &c).unwrap().composed.value();
        let b = more.evaluate(&s, &c).unwrap().composed.value();
        prop_assert!(b >= a);
    }

    #[test]
    fn energy_is_bounded_by_goal_size(seed in 0u64..1000, episode in 0u64..1000) {
        let (s, goal) = random_episode(&EpisodeSpec::default(), seed, episode).unwrap();
        for v in standard_views(8, 8, 0.1).unwrap() {
            prop_assert!(view_energy(&s, &v, &goal, at(episode, 0)) as usize <= goal.len());
        }
    }
}
