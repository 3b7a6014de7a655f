use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use consensus_bench::{
    arms, evaluate_checks, load_config, run_matrix, summarize, write_report, Ablation,
    ExperimentConfig, RecordStore, SuiteSelection,
};

/// Run ablation matrices for the consensus task suites.
#[derive(Debug, Parser)]
#[command(name = "pic-bench", version)]
struct Cli {
    #[command(subcommand)]
    suite: SuiteCommand,
    /// Experiment config file (key = value with [section] headers).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run this single seed instead of the config's seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's `out`, then $PIC_OUT_DIR, then ./runs.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// scorers, refinement or none.
    #[arg(long, global = true)]
    ablation: Option<String>,
    /// Print the arms that would run and exit.
    #[arg(long, global = true)]
    list_arms: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum SuiteCommand {
    Diffusion,
    Seqgen,
    Blockworld,
    All,
}

impl SuiteCommand {
    fn selection(self) -> SuiteSelection {
        let name = match self {
            Self::Diffusion => "diffusion",
            Self::Seqgen => "seqgen",
            Self::Blockworld => "blockworld",
            Self::All => "all",
        };
        SuiteSelection::from_name(name).expect("subcommands match suite names")
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p).with_context(|| format!("loading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    cfg.suite = cli.suite.selection();
    if let Some(a) = &cli.ablation {
        let Some(ablation) = Ablation::from_name(a) else {
            bail!("unknown ablation {a:?}; expected scorers, refinement or none");
        };
        cfg.ablation = ablation;
    }
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = build_config(cli)?;
    if cli.list_arms {
        for suite in cfg.suite.suites() {
            for arm in arms(suite, cfg.ablation) {
                println!("{suite}\t{arm}");
            }
        }
        return Ok(true);
    }
    let mut store = RecordStore::open(&cfg.out_dir)?;
    eprintln!(
        "config {} -> {} ({} seeds)",
        &cfg.hash()[..12],
        cfg.out_dir.display(),
        cfg.seeds.len()
    );
    let records = run_matrix(&cfg, &mut store)?;
    let summary = summarize(&records)?;
    write_report(&summary, &cfg.out_dir)?;
    print!("{}", summary.render_text());
    let checks = evaluate_checks(&summary, &records);
    for c in &checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
