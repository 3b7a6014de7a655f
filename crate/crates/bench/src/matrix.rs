//! The experiment matrix: arms × seeds for every selected suite.

use std::sync::mpsc;
use std::time::Instant;

use crate::config::{ExperimentConfig, Suite};
use crate::record::{RecordSink, RunRecord, ARTIFACT_VERSION};
use crate::suites::{arms, run_cell};
use crate::BenchError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub suite: Suite,
    pub arm: String,
    pub seed: u64,
}

/// Cells in suite, arm, seed order.
pub fn plan(config: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for suite in config.suite.suites() {
        for arm in arms(suite, config.ablation) {
            for &seed in &config.seeds {
                cells.push(Cell {
                    suite,
                    arm: arm.clone(),
                    seed,
                });
            }
        }
    }
    cells
}

pub fn run_one(config: &ExperimentConfig, hash: &str, cell: &Cell) -> RunRecord {
    let start = Instant::now();
    let outcome = run_cell(config, cell.suite, &cell.arm, cell.seed);
    let wall_time_secs = start.elapsed().as_secs_f64();
    let (metrics, error) = match outcome {
        Ok(m) => (m, None),
        Err(e) => (Default::default(), Some(e)),
    };
    RunRecord {
        config_hash: hash.to_string(),
        suite: cell.suite.name().to_string(),
        arm: cell.arm.clone(),
        seed: cell.seed,
        metrics,
        wall_time_secs,
        version: ARTIFACT_VERSION.to_string(),
        error,
    }
}

/// Runs every cell on a pool of `config.workers` threads. Records reach
/// `sink` one at a time from the calling thread, in completion order; the
/// returned list is in [`plan`] order. A failing cell yields a failed record
/// and the matrix continues. Only a sink error aborts, after the running cells
/// finish.
pub fn run_matrix(
    config: &ExperimentConfig,
    sink: &mut dyn RecordSink,
) -> Result<Vec<RunRecord>, BenchError> {
    config.validate()?;
    let cells = plan(config);
    let hash = config.hash();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| BenchError::Invalid(format!("thread pool: {e}")))?;
    let mut slots: Vec<Option<RunRecord>> = vec![None; cells.len()];
    let mut sink_error = None;
    let (tx, rx) = mpsc::channel::<(usize, RunRecord)>();
    pool.in_place_scope(|scope| {
        for (i, cell) in cells.iter().enumerate() {
            let tx = tx.clone();
            let hash = &hash;
            scope.spawn(move |_| {
                let _ = tx.send((i, run_one(config, hash, cell)));
            });
        }
        drop(tx);
        for (i, record) in rx {
            if sink_error.is_none() {
                if let Err(e) = sink.persist(&record) {
                    sink_error = Some(e);
                }
            }
            slots[i] = Some(record);
        }
    });
    if let Some(e) = sink_error {
        return Err(e);
    }
    Ok(slots
        .into_iter()
        .map(|r| r.expect("every cell reports"))
        .collect())
}
