//! Run records and their on-disk store.
//!
//! Layout under the output directory:
//!
//! ```text
//! records/<suite>_<arm>_<seed>.json   one pretty-printed RunRecord each
//! index.jsonl                         one compact RunRecord per line, append-only
//! ```

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::BenchError;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One cell of the experiment matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunRecord {
    pub config_hash: String,
    pub suite: String,
    pub arm: String,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
    pub wall_time_secs: f64,
    pub version: String,
    /// Set when the cell failed; `metrics` is then empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    pub fn file_name(&self) -> String {
        let arm: String = self
            .arm
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        format!("{}_{}_{}.json", self.suite, arm, self.seed)
    }
}

/// Receives records as cells finish, one at a time.
pub trait RecordSink {
    fn persist(&mut self, record: &RunRecord) -> Result<(), BenchError>;
}

impl RecordSink for Vec<RunRecord> {
    fn persist(&mut self, record: &RunRecord) -> Result<(), BenchError> {
        self.push(record.clone());
        Ok(())
    }
}

/// Writes each record to its own file, then appends it to the index.
#[derive(Debug)]
pub struct RecordStore {
    root: PathBuf,
    index: File,
}

impl RecordStore {
    pub const INDEX: &'static str = "index.jsonl";

    pub fn open(root: &Path) -> Result<Self, BenchError> {
        let records = root.join("records");
        fs::create_dir_all(&records).map_err(|e| BenchError::io(&records, e))?;
        let path = root.join(Self::INDEX);
        let index = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| BenchError::io(&path, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            index,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}

impl RecordSink for RecordStore {
    fn persist(&mut self, record: &RunRecord) -> Result<(), BenchError> {
        let path = self.root.join("records").join(record.file_name());
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_string_pretty(record)? + "\n")
            .map_err(|e| BenchError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| BenchError::io(&path, e))?;
        let line = serde_json::to_string(record)? + "\n";
        let index = self.root.join(Self::INDEX);
        self.index
            .write_all(line.as_bytes())
            .and_then(|()| self.index.flush())
            .map_err(|e| BenchError::io(&index, e))
    }
}

/// Reads every record listed in `root/index.jsonl`.
pub fn read_index(root: &Path) -> Result<Vec<RunRecord>, BenchError> {
    let path = root.join(RecordStore::INDEX);
    let file = File::open(&path).map_err(|e| BenchError::io(&path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| BenchError::io(&path, e))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}
