//! Arms of each ablation and the metrics one cell produces.

use std::collections::BTreeMap;
use std::sync::Arc;

use consensus_blockworld::BlockworldArm;
use consensus_diffusion::{MixtureTarget, ScorerSet};
use consensus_seqgen::{DecodeArm, SeqgenTask};

use crate::config::{Ablation, ExperimentConfig, Suite};

/// Arm labels of `suite` under `ablation`, in presentation order.
///
/// An ablation a suite has no axis for runs that suite's full arm only.
pub fn arms(suite: Suite, ablation: Ablation) -> Vec<String> {
    let labels: Vec<String> = match (suite, ablation) {
        (Suite::Diffusion, Ablation::Scorers) => ScorerSet::ablation_arms()
            .iter()
            .map(ScorerSet::label)
            .collect(),
        (Suite::Diffusion, _) => vec![ScorerSet::new(true, true, true).label()],
        (Suite::Seqgen, Ablation::Refinement) => DecodeArm::ALL
            .iter()
            .map(|a| a.label().to_string())
            .collect(),
        (Suite::Seqgen, _) => vec![DecodeArm::Iterative.label().to_string()],
        (Suite::Blockworld, Ablation::Scorers) => [1, 3, 5]
            .into_iter()
            .map(|views| BlockworldArm::ClosedLoop { views }.label())
            .collect(),
        (Suite::Blockworld, Ablation::Refinement) => vec![
            BlockworldArm::ClosedLoop { views: 5 }.label(),
            BlockworldArm::OpenLoop { views: 5 }.label(),
        ],
        (Suite::Blockworld, Ablation::None) => vec![BlockworldArm::ClosedLoop { views: 5 }.label()],
    };
    labels
}

/// Runs one (suite, arm, seed) cell and returns its named metrics.
pub fn run_cell(
    config: &ExperimentConfig,
    suite: Suite,
    arm: &str,
    seed: u64,
) -> Result<BTreeMap<String, f64>, String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let mut metrics = BTreeMap::new();
    match suite {
        Suite::Diffusion => {
            let settings = config.diffusion().map_err(|e| err(&e))?;
            let set = ScorerSet::from_label(arm)
                .ok_or_else(|| format!("unknown diffusion arm {arm:?}"))?;
            let target = Arc::new(MixtureTarget::default_target());
            let acc = settings
                .mean_accuracy(&target, set, seed)
                .map_err(|e| err(&e))?;
            metrics.insert("bayes_accuracy".into(), acc);
        }
        Suite::Seqgen => {
            let settings = config.seqgen().map_err(|e| err(&e))?;
            let decode =
                DecodeArm::from_label(arm).ok_or_else(|| format!("unknown seqgen arm {arm:?}"))?;
            let task = SeqgenTask::prepare(settings, seed).map_err(|e| err(&e))?;
            let report = task.run(decode).map_err(|e| err(&e))?;
            metrics.insert("accuracy_bs1".into(), report.metrics.accuracy_bs1);
            metrics.insert("accuracy_bs5".into(), report.metrics.accuracy_bs5);
            metrics.insert("vocab_size".into(), report.metrics.vocab_size as f64);
        }
        Suite::Blockworld => {
            let mut settings = config.blockworld().map_err(|e| err(&e))?;
            let parsed = BlockworldArm::from_label(arm)
                .ok_or_else(|| format!("unknown blockworld arm {arm:?}"))?;
            if config.ablation == Ablation::Refinement {
                // Match total scored candidates to the open loop's trajectories.
                settings.candidates = settings.matched_candidates();
            }
            let records = settings.run_arm(parsed, seed, true).map_err(|e| err(&e))?;
            let n = records.len().max(1) as f64;
            let successes = records.iter().filter(|r| r.result.success).count() as f64;
            let steps: usize = records.iter().map(|r| r.result.trajectory.len()).sum();
            metrics.insert("success_rate".into(), successes / n);
            metrics.insert("mean_steps".into(), steps as f64 / n);
        }
    }
    if let Some((name, v)) = metrics.iter().find(|(_, v)| !v.is_finite()) {
        return Err(format!("metric {name} is not finite ({v})"));
    }
    Ok(metrics)
}
