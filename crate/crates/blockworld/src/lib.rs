//! Manipulation task suite on a 2D grid.
//!
//! Objects sit on grid cells and goals are sets of pairwise spatial
//! relations. A deterministic world model predicts the effect of a move, a
//! random-shooting planner proposes moves, and a set of partial cameras
//! scores each predicted state by counting goal relations it cannot confirm.

mod error;
mod goal;
mod mpc;
pub mod scenario;
mod suite;
mod view;
mod world;

pub use error::WorldError;
pub use goal::{check_relations, GoalSpec};
pub use mpc::{
    baseline_openloop, run_episode, sample_actions, select_action, view_ensemble, EpisodeResult,
    MpcConfig, OpenLoopResult, Selection,
};
pub use suite::{BlockworldArm, BlockworldSettings, EpisodeRecord};
pub use view::{
    observed_holds, render_view, standard_views, view_energy, GoalQuery, Observation,
    ObservationTime, ObservedObject, Region, ViewScorer, ViewSpec,
};
pub use world::{
    extract_relations, satisfies, world_step, Action, Axis, Cell, Object, ObjectId, Predicate,
    Relation, WorldState,
};
