//! Experiment configuration files.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! # comment (also allowed after a value)
//! suite = all                # diffusion | seqgen | blockworld | all
//! ablation = none            # scorers | refinement | none
//! seeds = 0,1,2,3,4
//! out = runs
//! workers = 0                # 0 lets the thread pool decide
//!
//! [diffusion]
//! steps = 100
//! ```
//!
//! Top-level keys must come before the first `[section]` header. Section keys
//! override suite parameters; the accepted keys and their defaults are listed
//! by [`documented_keys`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use consensus_blockworld::scenario::EpisodeSpec;
use consensus_blockworld::BlockworldSettings;
use consensus_diffusion::DiffusionSettings;
use consensus_seqgen::{CorpusSpec, Op, RefineConfig, SeqgenSettings};

use crate::BenchError;

pub const OUT_DIR_ENV: &str = "PIC_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Diffusion,
    Seqgen,
    Blockworld,
}

impl Suite {
    pub const ALL: [Self; 3] = [Self::Diffusion, Self::Seqgen, Self::Blockworld];

    pub fn name(self) -> &'static str {
        match self {
            Self::Diffusion => "diffusion",
            Self::Seqgen => "seqgen",
            Self::Blockworld => "blockworld",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which suites a config runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteSelection {
    One(Suite),
    All,
}

impl SuiteSelection {
    pub fn suites(self) -> Vec<Suite> {
        match self {
            Self::One(s) => vec![s],
            Self::All => Suite::ALL.to_vec(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::One(s) => s.name(),
            Self::All => "all",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        if s == "all" {
            Some(Self::All)
        } else {
            Suite::from_name(s).map(Self::One)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ablation {
    /// Vary the scorer ensemble.
    Scorers,
    /// Vary how scorer feedback reaches the generator.
    Refinement,
    None,
}

impl Ablation {
    pub const ALL: [Self; 3] = [Self::Scorers, Self::Refinement, Self::None];

    pub fn name(self) -> &'static str {
        match self {
            Self::Scorers => "scorers",
            Self::Refinement => "refinement",
            Self::None => "none",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

/// A typed parameter value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(u64),
    Float(f64),
    Ops(Vec<Op>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Int(v) => write!(f, "{v}"),
            Self::Float(v) => write!(f, "{v}"),
            Self::Ops(ops) => {
                let s: String = ops.iter().map(|o| o.symbol()).collect();
                f.write_str(&s)
            }
        }
    }
}

fn parse_ops(s: &str) -> Option<Vec<Op>> {
    let mut ops = Vec::new();
    for c in s.chars().filter(|c| !c.is_whitespace() && *c != ',') {
        let op = match c {
            '+' => Op::Add,
            '-' => Op::Sub,
            '*' => Op::Mul,
            '/' => Op::Div,
            _ => return None,
        };
        if !ops.contains(&op) {
            ops.push(op);
        }
    }
    ops.sort_by_key(|o| o.token());
    (!ops.is_empty()).then_some(ops)
}

impl Value {
    /// Parses `raw` into the same variant as `self`.
    fn parse_like(&self, raw: &str) -> Option<Self> {
        match self {
            Self::Int(_) => raw.parse().ok().map(Self::Int),
            Self::Float(_) => raw
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Self::Float),
            Self::Ops(_) => parse_ops(raw).map(Self::Ops),
        }
    }

    fn int(&self) -> u64 {
        match self {
            Self::Int(v) => *v,
            _ => unreachable!("typed by the key table"),
        }
    }

    fn float(&self) -> f64 {
        match self {
            Self::Float(v) => *v,
            _ => unreachable!("typed by the key table"),
        }
    }
}

/// Every accepted section key with its default value, keyed `section.key`.
pub fn documented_keys() -> BTreeMap<String, Value> {
    let d = DiffusionSettings::default();
    let s = SeqgenSettings::default();
    let b = BlockworldSettings::default();
    let entries = [
        ("diffusion.steps", Value::Int(d.steps as u64)),
        ("diffusion.lambda", Value::Float(d.lambda)),
        ("diffusion.cfg_weight", Value::Float(d.cfg_weight)),
        ("diffusion.cosine_weight", Value::Float(d.cosine_weight)),
        (
            "diffusion.classifier_weight",
            Value::Float(d.classifier_weight),
        ),
        ("diffusion.embed_dim", Value::Int(d.embed_dim as u64)),
        ("diffusion.embed_seed", Value::Int(d.embed_seed)),
        (
            "diffusion.samples_per_class",
            Value::Int(d.samples_per_class as u64),
        ),
        ("seqgen.order", Value::Int(s.order as u64)),
        ("seqgen.corpus_size", Value::Int(s.corpus.size as u64)),
        ("seqgen.min_digits", Value::Int(s.corpus.min_digits as u64)),
        ("seqgen.max_digits", Value::Int(s.corpus.max_digits as u64)),
        ("seqgen.operators", Value::Ops(s.corpus.operators.clone())),
        (
            "seqgen.wrong_answer_fraction",
            Value::Float(s.corpus.wrong_answer_fraction),
        ),
        ("seqgen.eval_size", Value::Int(s.eval_size as u64)),
        ("seqgen.candidates", Value::Int(s.refine.candidates as u64)),
        (
            "seqgen.inner_iterations",
            Value::Int(s.refine.inner_iterations as u64),
        ),
        ("seqgen.step_size", Value::Float(s.refine.step_size)),
        (
            "seqgen.fluency_weight",
            Value::Float(s.refine.fluency_weight),
        ),
        ("seqgen.temperature", Value::Float(s.refine.temperature)),
        (
            "seqgen.max_answer_len",
            Value::Int(s.refine.max_answer_len as u64),
        ),
        ("seqgen.beam_size", Value::Int(s.beam_size as u64)),
        (
            "seqgen.rerank_candidates",
            Value::Int(s.rerank_candidates as u64),
        ),
        ("seqgen.flip_probability", Value::Float(s.flip_probability)),
        ("blockworld.width", Value::Int(b.episode.width as u64)),
        ("blockworld.height", Value::Int(b.episode.height as u64)),
        ("blockworld.objects", Value::Int(b.episode.objects as u64)),
        (
            "blockworld.relations",
            Value::Int(b.episode.relations as u64),
        ),
        ("blockworld.candidates", Value::Int(b.candidates as u64)),
        ("blockworld.trajectories", Value::Int(b.trajectories as u64)),
        ("blockworld.confusion", Value::Float(b.confusion)),
        ("blockworld.episodes", Value::Int(b.episodes as u64)),
    ];
    entries
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub suite: SuiteSelection,
    pub ablation: Ablation,
    pub seeds: Vec<u64>,
    /// Effective value of every documented key, defaults filled.
    pub params: BTreeMap<String, Value>,
    pub out_dir: PathBuf,
    /// Matrix worker threads; `0` uses the pool default.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            suite: SuiteSelection::All,
            ablation: Ablation::None,
            seeds: vec![0, 1, 2, 3, 4],
            params: documented_keys(),
            out_dir: std::env::var_os(OUT_DIR_ENV)
                .map_or_else(|| PathBuf::from("runs"), PathBuf::from),
            workers: 0,
        }
    }
}

fn parse_seeds(raw: &str) -> Option<Vec<u64>> {
    raw.split(',').map(|s| s.trim().parse().ok()).collect()
}

impl ExperimentConfig {
    /// Parses the config grammar. See the module docs.
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut cfg = Self::default();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| BenchError::Parse {
                line: line_no,
                message,
            };
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err("unterminated section header".into()))?
                    .trim();
                if Suite::from_name(name).is_none() {
                    return Err(err(format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            match &section {
                None => match key {
                    "suite" => {
                        cfg.suite = SuiteSelection::from_name(value)
                            .ok_or_else(|| err(format!("unknown suite {value:?}")))?
                    }
                    "ablation" => {
                        cfg.ablation = Ablation::from_name(value)
                            .ok_or_else(|| err(format!("unknown ablation {value:?}")))?
                    }
                    "seeds" => {
                        cfg.seeds = parse_seeds(value)
                            .ok_or_else(|| err(format!("bad seed list {value:?}")))?
                    }
                    "out" => cfg.out_dir = PathBuf::from(value),
                    "workers" => {
                        cfg.workers = value
                            .parse()
                            .map_err(|_| err(format!("bad worker count {value:?}")))?
                    }
                    _ => {
                        return Err(BenchError::UnknownKey {
                            line: line_no,
                            key: key.to_string(),
                        })
                    }
                },
                Some(sec) => {
                    let full = format!("{sec}.{key}");
                    let slot = cfg
                        .params
                        .get_mut(&full)
                        .ok_or_else(|| BenchError::UnknownKey {
                            line: line_no,
                            key: full.clone(),
                        })?;
                    *slot = slot
                        .parse_like(value)
                        .ok_or_else(|| err(format!("bad value {value:?} for {full}")))?;
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.seeds.is_empty() {
            return Err(BenchError::Invalid("no seeds".into()));
        }
        let documented = documented_keys();
        if self.params.len() != documented.len()
            || self.params.keys().any(|k| !documented.contains_key(k))
        {
            return Err(BenchError::Invalid(
                "parameters do not match the documented keys".into(),
            ));
        }
        let d = self.diffusion()?;
        if d.steps == 0 || d.samples_per_class == 0 || d.embed_dim == 0 {
            return Err(BenchError::Invalid(
                "diffusion counts must be positive".into(),
            ));
        }
        if d.lambda < 0.0
            || d.cfg_weight < 0.0
            || d.cosine_weight < 0.0
            || d.classifier_weight < 0.0
        {
            return Err(BenchError::Invalid(
                "diffusion weights must be non-negative".into(),
            ));
        }
        let s = self.seqgen()?;
        s.refine
            .validate(consensus_seqgen::Vocabulary::standard().len())
            .map_err(|e| BenchError::Invalid(e.to_string()))?;
        if s.eval_size == 0
            || s.beam_size == 0
            || s.rerank_candidates == 0
            || !(0.0..0.5).contains(&s.flip_probability)
        {
            return Err(BenchError::Invalid(
                "seqgen sizes must be positive and flip < 0.5".into(),
            ));
        }
        if !(2..=3).contains(&s.order) {
            return Err(BenchError::Invalid(format!(
                "n-gram order {} (2 or 3)",
                s.order
            )));
        }
        let c = &s.corpus;
        if c.min_digits == 0 || c.min_digits > c.max_digits || c.max_digits > 9 || c.size == 0 {
            return Err(BenchError::Invalid("seqgen corpus shape".into()));
        }
        let b = self.blockworld()?;
        if b.candidates == 0
            || b.trajectories == 0
            || b.episodes == 0
            || !(0.0..0.5).contains(&b.confusion)
        {
            return Err(BenchError::Invalid(
                "blockworld counts must be positive and confusion < 0.5".into(),
            ));
        }
        consensus_blockworld::scenario::random_episode(&b.episode, 0, 0)
            .map_err(|e| BenchError::Invalid(e.to_string()))?;
        Ok(())
    }

    fn get(&self, key: &str) -> &Value {
        &self.params[key]
    }

    fn usize(&self, key: &str) -> Result<usize, BenchError> {
        usize::try_from(self.get(key).int())
            .map_err(|_| BenchError::Invalid(format!("{key} too large")))
    }

    fn u32(&self, key: &str) -> Result<u32, BenchError> {
        u32::try_from(self.get(key).int())
            .map_err(|_| BenchError::Invalid(format!("{key} too large")))
    }

    pub fn diffusion(&self) -> Result<DiffusionSettings, BenchError> {
        Ok(DiffusionSettings {
            steps: self.usize("diffusion.steps")?,
            lambda: self.get("diffusion.lambda").float(),
            cfg_weight: self.get("diffusion.cfg_weight").float(),
            cosine_weight: self.get("diffusion.cosine_weight").float(),
            classifier_weight: self.get("diffusion.classifier_weight").float(),
            embed_dim: self.usize("diffusion.embed_dim")?,
            embed_seed: self.get("diffusion.embed_seed").int(),
            samples_per_class: self.usize("diffusion.samples_per_class")?,
        })
    }

    pub fn seqgen(&self) -> Result<SeqgenSettings, BenchError> {
        let Value::Ops(operators) = self.get("seqgen.operators").clone() else {
            unreachable!("typed by the key table")
        };
        Ok(SeqgenSettings {
            corpus: CorpusSpec {
                min_digits: self.u32("seqgen.min_digits")?,
                max_digits: self.u32("seqgen.max_digits")?,
                operators,
                size: self.usize("seqgen.corpus_size")?,
                wrong_answer_fraction: self.get("seqgen.wrong_answer_fraction").float(),
                problems: None,
            },
            order: self.usize("seqgen.order")?,
            eval_size: self.usize("seqgen.eval_size")?,
            refine: RefineConfig {
                candidates: self.usize("seqgen.candidates")?,
                inner_iterations: self.usize("seqgen.inner_iterations")?,
                step_size: self.get("seqgen.step_size").float(),
                fluency_weight: self.get("seqgen.fluency_weight").float(),
                temperature: self.get("seqgen.temperature").float(),
                max_answer_len: self.usize("seqgen.max_answer_len")?,
            },
            beam_size: self.usize("seqgen.beam_size")?,
            rerank_candidates: self.usize("seqgen.rerank_candidates")?,
            flip_probability: self.get("seqgen.flip_probability").float(),
        })
    }

    pub fn blockworld(&self) -> Result<BlockworldSettings, BenchError> {
        Ok(BlockworldSettings {
            episode: EpisodeSpec {
                width: self.u32("blockworld.width")?,
                height: self.u32("blockworld.height")?,
                objects: self.usize("blockworld.objects")?,
                relations: self.usize("blockworld.relations")?,
            },
            candidates: self.usize("blockworld.candidates")?,
            trajectories: self.usize("blockworld.trajectories")?,
            confusion: self.get("blockworld.confusion").float(),
            episodes: self.usize("blockworld.episodes")?,
            ..Default::default()
        })
    }

    /// Sets one documented key from its text form.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), BenchError> {
        let slot = self
            .params
            .get_mut(key)
            .ok_or_else(|| BenchError::UnknownKey {
                line: 0,
                key: key.into(),
            })?;
        *slot = slot
            .parse_like(raw)
            .ok_or_else(|| BenchError::Invalid(format!("bad value {raw:?} for {key}")))?;
        Ok(())
    }

    /// One `name=value` line per setting that affects results, sorted.
    /// Seeds, output location and worker count are excluded.
    pub fn canonical(&self) -> String {
        let mut out = format!(
            "ablation={}\nsuite={}\n",
            self.ablation.name(),
            self.suite.name()
        );
        for (k, v) in &self.params {
            out.push_str(&format!("{k}={v}\n"));
        }
        out
    }

    /// Hex SHA-256 of [`Self::canonical`].
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    ExperimentConfig::parse(&text)
}
