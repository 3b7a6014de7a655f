//! Partial observations and per-view relation energies.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use consensus_core::numeric::{hash_words, stream_rng};
use consensus_core::{Condition, ProposalKind, Scorer, ScorerError};

use crate::world::{Axis, Cell, Relation, WorldState};
use crate::WorldError;

/// Half-open rectangle `[col_min, col_max) x [row_min, row_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub col_min: u32,
    pub row_min: u32,
    pub col_max: u32,
    pub row_max: u32,
}

impl Region {
    pub fn full(width: u32, height: u32) -> Self {
        Self {
            col_min: 0,
            row_min: 0,
            col_max: width,
            row_max: height,
        }
    }

    pub fn contains(&self, c: Cell) -> bool {
        (self.col_min..self.col_max).contains(&c.col)
            && (self.row_min..self.row_max).contains(&c.row)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewSpec {
    pub id: usize,
    pub region: Region,
    /// Chance that an object is reported under another object's label.
    pub label_confusion: f64,
    pub horizontal: bool,
    pub vertical: bool,
    pub seed: u64,
}

impl ViewSpec {
    pub fn new(
        id: usize,
        region: Region,
        label_confusion: f64,
        horizontal: bool,
        vertical: bool,
        seed: u64,
    ) -> Result<Self, WorldError> {
        if region.col_min >= region.col_max || region.row_min >= region.row_max {
            return Err(WorldError::InvalidView(format!(
                "view {id} has an empty region"
            )));
        }
        if !(0.0..0.5).contains(&label_confusion) {
            return Err(WorldError::InvalidView(format!(
                "view {id} confusion {label_confusion} outside [0, 0.5)"
            )));
        }
        if !horizontal && !vertical {
            return Err(WorldError::InvalidView(format!("view {id} senses no axis")));
        }
        Ok(Self {
            id,
            region,
            label_confusion,
            horizontal,
            vertical,
            seed,
        })
    }

    pub fn identity(id: usize, width: u32, height: u32) -> Self {
        Self::new(
            id,
            Region::full(width, height),
            0.0,
            true,
            true,
            id as u64 + 1,
        )
        .expect("valid view")
    }

    pub fn senses(&self, axis: Axis) -> bool {
        match axis {
            Axis::Horizontal => self.horizontal,
            Axis::Vertical => self.vertical,
        }
    }
}

/// The five standard cameras: identity, left half, right half,
/// horizontal-only and vertical-only. Partial views use `confusion`.
pub fn standard_views(
    width: u32,
    height: u32,
    confusion: f64,
) -> Result<Vec<ViewSpec>, WorldError> {
    let half = width / 2;
    let full = Region::full(width, height);
    Ok(vec![
        ViewSpec::identity(0, width, height),
        ViewSpec::new(
            1,
            Region {
                col_max: half,
                ..full
            },
            confusion,
            true,
            true,
            2,
        )?,
        ViewSpec::new(
            2,
            Region {
                col_min: half,
                ..full
            },
            confusion,
            true,
            true,
            3,
        )?,
        ViewSpec::new(3, full, confusion, true, false, 4)?,
        ViewSpec::new(4, full, confusion, false, true, 5)?,
    ])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservedObject {
    pub label: String,
    pub cell: Cell,
}

/// What one view reports: visible objects (in id order) under possibly wrong
/// labels, plus which axes it can judge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub objects: Vec<ObservedObject>,
    pub horizontal: bool,
    pub vertical: bool,
}

impl Observation {
    /// First visible object carrying `label`.
    pub fn find(&self, label: &str) -> Option<&ObservedObject> {
        self.objects.iter().find(|o| o.label == label)
    }
}

/// Where in a run an observation is taken; seeds label confusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ObservationTime {
    pub episode: u64,
    pub step: u64,
}

/// Confusion draws depend on `(view.seed, episode, step)` and every object in
/// id order, visible or not, so all candidates at one step see the same
/// label mix-ups.
pub fn render_view(state: &WorldState, view: &ViewSpec, at: ObservationTime) -> Observation {
    let mut rng = stream_rng(hash_words(view.seed, [at.episode, at.step]), 0);
    let n = state.objects.len();
    let mut objects = Vec::new();
    for (i, o) in state.objects.iter().enumerate() {
        let mut label = &o.label;
        if n > 1 && rng.random_bool(view.label_confusion) {
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            label = &state.objects[j].label;
        }
        if view.region.contains(o.cell) {
            objects.push(ObservedObject {
                label: label.clone(),
                cell: o.cell,
            });
        }
    }
    Observation {
        objects,
        horizontal: view.horizontal,
        vertical: view.vertical,
    }
}

/// True only when the view can confirm the relation.
pub fn observed_holds(obs: &Observation, state: &WorldState, r: &Relation) -> bool {
    let sensed = match r.predicate.axis() {
        Axis::Horizontal => obs.horizontal,
        Axis::Vertical => obs.vertical,
    };
    if !sensed {
        return false;
    }
    let (Some(s), Some(o)) = (state.object(r.subject), state.object(r.object)) else {
        return false;
    };
    match (obs.find(&s.label), obs.find(&o.label)) {
        (Some(a), Some(b)) => r.predicate.holds(a.cell, b.cell),
        _ => false,
    }
}

/// Number of goal relations the view cannot confirm. Relations on unseen
/// objects or unsensed axes count as violated.
pub fn view_energy(
    state: &WorldState,
    view: &ViewSpec,
    goal: &[Relation],
    at: ObservationTime,
) -> u32 {
    let obs = render_view(state, view, at);
    goal.iter()
        .filter(|r| !observed_holds(&obs, state, r))
        .count() as u32
}

/// Goal payload handed to view scorers through [`Condition::Goal`].
#[derive(Debug, Clone, PartialEq)]
pub struct GoalQuery {
    pub relations: Vec<Relation>,
    pub at: ObservationTime,
}

impl GoalQuery {
    pub fn condition(relations: Vec<Relation>, at: ObservationTime) -> Condition {
        Condition::Goal(Arc::new(Self { relations, at }))
    }
}

/// One camera as an ensemble member.
#[derive(Debug, Clone)]
pub struct ViewScorer {
    name: String,
    view: ViewSpec,
}

impl ViewScorer {
    pub fn new(view: ViewSpec) -> Self {
        Self {
            name: format!("view-{}", view.id),
            view,
        }
    }

    pub fn view(&self) -> &ViewSpec {
        &self.view
    }
}

impl Scorer<WorldState> for ViewScorer {
    fn name(&self) -> &str {
        &self.name
    }

    fn accepts(&self) -> ProposalKind {
        ProposalKind::WorldState
    }

    fn energy(&self, state: &WorldState, condition: &Condition) -> Result<f64, ScorerError> {
        let q = condition
            .goal::<GoalQuery>()
            .ok_or_else(|| ScorerError::Condition("expected a relation goal".into()))?;
        Ok(view_energy(state, &self.view, &q.relations, q.at) as f64)
    }
}
