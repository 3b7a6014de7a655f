//! Episode grids for the view-count and feedback ablations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use consensus_core::numeric::hash_words;

use crate::goal::GoalSpec;
use crate::mpc::{baseline_openloop, run_episode, view_ensemble, EpisodeResult, MpcConfig};
use crate::scenario::{random_episode, EpisodeSpec};
use crate::view::{standard_views, ViewSpec};
use crate::WorldError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockworldArm {
    /// Closed-loop MPC with the first `views` cameras of the ablation order.
    ClosedLoop { views: usize },
    /// Open-loop random trajectories reranked once by the first `views` cameras.
    OpenLoop { views: usize },
}

impl BlockworldArm {
    pub fn label(&self) -> String {
        match self {
            Self::ClosedLoop { views } => format!("closed-{views}v"),
            Self::OpenLoop { views } => format!("open-{views}v"),
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        let (kind, rest) = s.split_once('-')?;
        let views: usize = rest.strip_suffix('v')?.parse().ok()?;
        match kind {
            "closed" => Some(Self::ClosedLoop { views }),
            "open" => Some(Self::OpenLoop { views }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockworldSettings {
    pub episode: EpisodeSpec,
    /// `K` for the closed loop.
    pub candidates: usize,
    /// Sampled trajectories for the open loop.
    pub trajectories: usize,
    pub confusion: f64,
    pub episodes: usize,
    /// Indices into the standard views; an arm with `n` views uses the first
    /// `n` of them.
    pub view_order: Vec<usize>,
}

impl Default for BlockworldSettings {
    fn default() -> Self {
        Self {
            episode: EpisodeSpec::default(),
            candidates: 64,
            trajectories: 100,
            confusion: 0.1,
            episodes: 30,
            view_order: vec![1, 2, 3, 4, 0],
        }
    }
}

/// One episode of one arm, as persisted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub arm: String,
    pub seed: u64,
    pub episode: u64,
    pub views: Vec<usize>,
    pub result: EpisodeResult,
}

impl BlockworldSettings {
    pub fn views(&self, n: usize) -> Result<Vec<ViewSpec>, WorldError> {
        if n == 0 || n > self.view_order.len() {
            return Err(WorldError::InvalidConfig(format!(
                "{n} views requested, {} available",
                self.view_order.len()
            )));
        }
        let all = standard_views(self.episode.width, self.episode.height, self.confusion)?;
        self.view_order[..n]
            .iter()
            .map(|&i| {
                all.get(i)
                    .cloned()
                    .ok_or_else(|| WorldError::InvalidConfig(format!("no standard view {i}")))
            })
            .collect()
    }

    /// Closed-loop `K` whose total scored candidates over the horizon match
    /// the open loop's trajectory count.
    pub fn matched_candidates(&self) -> usize {
        (self.trajectories / self.episode.relations.max(1)).max(1)
    }

    pub fn run_one(
        &self,
        arm: BlockworldArm,
        seed: u64,
        episode: u64,
    ) -> Result<EpisodeRecord, WorldError> {
        let (state, relations) = random_episode(&self.episode, seed, episode)?;
        let goal = GoalSpec::Text(relations);
        let n = match arm {
            BlockworldArm::ClosedLoop { views } | BlockworldArm::OpenLoop { views } => views,
        };
        let views = self.views(n)?;
        let ensemble = view_ensemble(&views)?;
        let config = MpcConfig {
            candidates: self.candidates,
            horizon: None,
            seed,
        };
        // Observation seeds differ between run seeds for the same episode index.
        let key = hash_words(seed, [episode]);
        let result = match arm {
            BlockworldArm::ClosedLoop { .. } => {
                run_episode(&state, &goal, &ensemble, &config, key)?
            }
            BlockworldArm::OpenLoop { .. } => {
                baseline_openloop(&state, &goal, &ensemble, self.trajectories, &config, key)?
                    .episode
            }
        };
        Ok(EpisodeRecord {
            arm: arm.label(),
            seed,
            episode,
            views: views.iter().map(|v| v.id).collect(),
            result,
        })
    }

    /// All episodes of one arm for one seed.
    pub fn run_arm(
        &self,
        arm: BlockworldArm,
        seed: u64,
        parallel: bool,
    ) -> Result<Vec<EpisodeRecord>, WorldError> {
        let one = |e: usize| self.run_one(arm, seed, e as u64);
        if parallel {
            (0..self.episodes).into_par_iter().map(one).collect()
        } else {
            (0..self.episodes).map(one).collect()
        }
    }

    pub fn success_rate(&self, arm: BlockworldArm, seed: u64) -> Result<f64, WorldError> {
        let records = self.run_arm(arm, seed, true)?;
        Ok(
            records.iter().filter(|r| r.result.success).count() as f64
                / records.len().max(1) as f64,
        )
    }
}
