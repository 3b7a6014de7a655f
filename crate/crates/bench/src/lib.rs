//! Experiment harness for the three task suites.
//!
//! A config selects suites, an ablation and seeds; [`run_matrix`] executes
//! every (arm, seed) cell in parallel and persists each [`RunRecord`] through
//! a single writer; [`summarize`] aggregates across seeds; [`write_report`]
//! emits the text table, CSV and SVG plots next to the records.

mod checks;
pub mod config;
mod error;
mod matrix;
mod record;
mod suites;
mod summary;

use std::fs;
use std::path::Path;

pub use checks::{evaluate_checks, Check};
pub use config::{load_config, Ablation, ExperimentConfig, Suite, SuiteSelection};
pub use error::BenchError;
pub use matrix::{plan, run_matrix, run_one, Cell};
pub use record::{read_index, RecordSink, RecordStore, RunRecord, ARTIFACT_VERSION};
pub use suites::{arms, run_cell};
pub use summary::{mean_std, read_summary_csv, summarize, Failure, Summary, SummaryRow};

/// Writes `summary.txt`, `summary.csv` and one `<suite>_<metric>.svg` per
/// suite and metric into `dir`.
pub fn write_report(summary: &Summary, dir: &Path) -> Result<(), BenchError> {
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let txt = dir.join("summary.txt");
    fs::write(&txt, summary.render_text()).map_err(|e| BenchError::io(&txt, e))?;
    let csv_path = dir.join("summary.csv");
    let file = fs::File::create(&csv_path).map_err(|e| BenchError::io(&csv_path, e))?;
    summary.write_csv(file)?;
    let mut seen = std::collections::BTreeSet::new();
    for r in &summary.rows {
        if seen.insert((r.suite.as_str(), r.metric.as_str())) {
            if let Some(svg) = summary.render_svg(&r.suite, &r.metric) {
                let p = dir.join(format!("{}_{}.svg", r.suite, r.metric));
                fs::write(&p, svg).map_err(|e| BenchError::io(&p, e))?;
            }
        }
    }
    Ok(())
}
