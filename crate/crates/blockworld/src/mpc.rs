//! Random-shooting MPC against a view ensemble, and the open-loop baseline.

use rand::Rng;
use serde::{Deserialize, Serialize};

use consensus_core::numeric::stream_rng;
use consensus_core::{argmin_composed, EnsembleSpec, ScorerHandle};

use crate::goal::GoalSpec;
use crate::view::{GoalQuery, ObservationTime, ViewScorer, ViewSpec};
use crate::world::{satisfies, world_step, Action, Cell, Relation, WorldState};
use crate::WorldError;

#[derive(Debug, Clone, PartialEq)]
pub struct MpcConfig {
    /// Candidate actions scored per step, `K`.
    pub candidates: usize,
    /// Steps per episode; `None` uses the number of goal relations.
    pub horizon: Option<usize>,
    pub seed: u64,
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self {
            candidates: 64,
            horizon: None,
            seed: 0,
        }
    }
}

impl MpcConfig {
    pub fn horizon_for(&self, goal: &[Relation]) -> usize {
        self.horizon.unwrap_or(goal.len()).max(1)
    }
}

/// Sums the views' energies with unit weights.
pub fn view_ensemble(views: &[ViewSpec]) -> Result<EnsembleSpec<WorldState>, WorldError> {
    Ok(EnsembleSpec::new(
        views
            .iter()
            .cloned()
            .map(|v| ScorerHandle::new(ViewScorer::new(v)))
            .collect(),
    )?)
}

/// One uniform draw over (object, cell); `None` if the cell is occupied.
fn draw_action<R: Rng>(state: &WorldState, rng: &mut R) -> Option<Action> {
    let o = &state.objects[rng.random_range(0..state.objects.len())];
    let target = Cell::new(
        rng.random_range(0..state.width),
        rng.random_range(0..state.height),
    );
    state.occupant(target).is_none().then_some(Action {
        object: o.id,
        target,
    })
}

/// `k` valid actions, redrawing occupied targets, at most `10 k` draws.
pub fn sample_actions<R: Rng>(
    state: &WorldState,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Action>, WorldError> {
    if state.objects.is_empty() {
        return Err(WorldError::Stuck { attempts: 0 });
    }
    let budget = 10 * k;
    let mut out = Vec::with_capacity(k);
    let mut attempts = 0;
    while out.len() < k {
        if attempts == budget {
            return Err(WorldError::Stuck { attempts });
        }
        attempts += 1;
        if let Some(a) = draw_action(state, rng) {
            out.push(a);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub action: Action,
    pub index: usize,
    pub energy: f64,
    pub candidates: Vec<Action>,
}

/// Scores `k` sampled actions by the summed view energy of the state they
/// lead to and returns the lowest (ties to the earliest candidate).
pub fn select_action<R: Rng>(
    state: &WorldState,
    goal: &[Relation],
    views: &EnsembleSpec<WorldState>,
    k: usize,
    rng: &mut R,
    at: ObservationTime,
) -> Result<Selection, WorldError> {
    if k == 0 {
        return Err(WorldError::InvalidConfig("zero candidates".into()));
    }
    let candidates = sample_actions(state, k, rng)?;
    let next: Vec<WorldState> = candidates
        .iter()
        .map(|&a| world_step(state, a))
        .collect::<Result<_, _>>()?;
    let condition = GoalQuery::condition(goal.to_vec(), at);
    let (index, energy) = argmin_composed(&next, views, &condition)?.expect("k >= 1");
    Ok(Selection {
        action: candidates[index],
        index,
        energy: energy.value(),
        candidates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub success: bool,
    pub trajectory: Vec<Action>,
    /// Summed view energy of the initial state, then of each selected move.
    pub energy_trace: Vec<f64>,
    pub final_state: WorldState,
    pub failure: Option<String>,
}

fn composed(
    state: &WorldState,
    goal: &[Relation],
    views: &EnsembleSpec<WorldState>,
    at: ObservationTime,
) -> Result<f64, WorldError> {
    Ok(views
        .evaluate(state, &GoalQuery::condition(goal.to_vec(), at))?
        .composed
        .value())
}

/// Closed loop: observe, pick the best of `K` candidates, act; stop once the
/// true state satisfies the goal or after the horizon. Success is judged on
/// the true final state.
pub fn run_episode(
    initial: &WorldState,
    goal: &GoalSpec,
    views: &EnsembleSpec<WorldState>,
    config: &MpcConfig,
    episode: u64,
) -> Result<EpisodeResult, WorldError> {
    let relations = goal.resolve(initial)?;
    let horizon = config.horizon_for(&relations);
    let mut rng = stream_rng(config.seed, episode);
    let mut state = initial.clone();
    let mut trajectory = Vec::new();
    let mut energy_trace = vec![composed(
        &state,
        &relations,
        views,
        ObservationTime { episode, step: 0 },
    )?];
    let mut failure = None;
    for step in 0..horizon {
        if satisfies(&state, &relations) {
            break;
        }
        let at = ObservationTime {
            episode,
            step: step as u64 + 1,
        };
        match select_action(&state, &relations, views, config.candidates, &mut rng, at) {
            Ok(sel) => {
                state = world_step(&state, sel.action)?;
                trajectory.push(sel.action);
                energy_trace.push(sel.energy);
            }
            Err(e @ WorldError::Stuck { .. }) => {
                failure = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(EpisodeResult {
        success: satisfies(&state, &relations),
        trajectory,
        energy_trace,
        final_state: state,
        failure,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenLoopResult {
    pub episode: EpisodeResult,
    /// Final summed view energy of every sampled trajectory.
    pub final_energies: Vec<f64>,
    pub chosen: usize,
}

/// Samples `n` random action sequences of horizon length without feedback,
/// keeps the one whose final state has the lowest summed view energy (ties
/// to the first).
pub fn baseline_openloop(
    initial: &WorldState,
    goal: &GoalSpec,
    views: &EnsembleSpec<WorldState>,
    n: usize,
    config: &MpcConfig,
    episode: u64,
) -> Result<OpenLoopResult, WorldError> {
    if n == 0 {
        return Err(WorldError::InvalidConfig("zero trajectories".into()));
    }
    let relations = goal.resolve(initial)?;
    let horizon = config.horizon_for(&relations);
    let mut rng = stream_rng(config.seed, episode);
    let at = ObservationTime {
        episode,
        step: horizon as u64,
    };
    let mut runs = Vec::with_capacity(n);
    for _ in 0..n {
        let mut state = initial.clone();
        let mut actions = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let a = sample_actions(&state, 1, &mut rng)?[0];
            state = world_step(&state, a)?;
            actions.push(a);
        }
        let e = composed(&state, &relations, views, at)?;
        runs.push((state, actions, e));
    }
    let final_energies: Vec<f64> = runs.iter().map(|r| r.2).collect();
    let chosen = (0..n).fold(0, |best, i| {
        if final_energies[i] < final_energies[best] {
            i
        } else {
            best
        }
    });
    let (state, trajectory, _) = runs.swap_remove(chosen);
    let start = composed(
        initial,
        &relations,
        views,
        ObservationTime { episode, step: 0 },
    )?;
    Ok(OpenLoopResult {
        episode: EpisodeResult {
            success: satisfies(&state, &relations),
            trajectory,
            energy_trace: vec![start, final_energies[chosen]],
            final_state: state,
            failure: None,
        },
        final_energies,
        chosen,
    })
}
