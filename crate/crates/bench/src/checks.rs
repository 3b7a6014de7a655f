//! Directional checks evaluated on a finished matrix.
//!
//! A check is emitted only when the arms it compares were run. The CLI exits
//! nonzero when any emitted check fails.

use crate::record::RunRecord;
use crate::summary::Summary;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

fn means(summary: &Summary, suite: &str, metric: &str, arms: &[&str]) -> Option<Vec<f64>> {
    arms.iter()
        .map(|a| summary.get(suite, a, metric).map(|r| r.mean))
        .collect()
}

pub fn evaluate_checks(summary: &Summary, records: &[RunRecord]) -> Vec<Check> {
    let mut out = Vec::new();
    let failed = records.iter().filter(|r| r.failed()).count();
    out.push(Check::new(
        "no-failed-cells",
        failed == 0,
        format!("{failed} failed"),
    ));

    if let Some(m) = means(
        summary,
        "diffusion",
        "bayes_accuracy",
        &["G+E1", "G+E1+E2", "G+E1+E3", "G+E1+E2+E3"],
    ) {
        let ordered = m[3] >= m[1] && m[3] >= m[2] && m[1] >= m[0] && m[2] >= m[0];
        out.push(Check::new(
            "diffusion-ensemble-order",
            ordered,
            format!(
                "single {:.4}, pairs {:.4}/{:.4}, full {:.4}",
                m[0], m[1], m[2], m[3]
            ),
        ));
        out.push(Check::new(
            "diffusion-ensemble-gap",
            m[3] - m[0] >= 0.02,
            format!("full - single = {:.4}", m[3] - m[0]),
        ));
    }

    if let Some(m) = means(
        summary,
        "seqgen",
        "accuracy_bs1",
        &["generator-only", "end-only", "iterative"],
    ) {
        out.push(Check::new(
            "seqgen-refinement-order",
            m[2] - m[1] >= 0.05 && m[1] - m[0] >= 0.05,
            format!(
                "generator-only {:.4}, end-only {:.4}, iterative {:.4}",
                m[0], m[1], m[2]
            ),
        ));
    }
    let seq: Vec<&RunRecord> = records
        .iter()
        .filter(|r| r.suite == "seqgen" && !r.failed())
        .collect();
    if !seq.is_empty() {
        let ok = seq
            .iter()
            .all(|r| r.metrics["accuracy_bs5"] >= r.metrics["accuracy_bs1"]);
        out.push(Check::new("seqgen-beam", ok, format!("{} runs", seq.len())));
    }

    if let Some(m) = means(
        summary,
        "blockworld",
        "success_rate",
        &["closed-1v", "closed-3v", "closed-5v"],
    ) {
        out.push(Check::new(
            "blockworld-views",
            m[1] >= m[0] && m[2] >= m[1] && m[2] - m[0] >= 0.15,
            format!("1v {:.4}, 3v {:.4}, 5v {:.4}", m[0], m[1], m[2]),
        ));
    }
    if let Some(m) = means(
        summary,
        "blockworld",
        "success_rate",
        &["closed-5v", "open-5v"],
    ) {
        out.push(Check::new(
            "blockworld-feedback",
            m[0] >= m[1] + 0.10,
            format!("closed {:.4}, open {:.4}", m[0], m[1]),
        ));
    }
    out
}
