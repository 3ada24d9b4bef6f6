//! Experiment configuration: flags, optional flat JSON config file, and
//! validation. Flags override file values; defaults fill the rest.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::Parser;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Closed-form exponent tables and curves.
    Theory,
    /// Cover-time runs with field and excursion-ledger persistence.
    Simulate,
    /// Recompute statistics from persisted fields.
    Analyze,
    /// Exact-chain comparison tables against the asymptotic forms.
    Oracle,
    /// Threshold runs over (n, α, β) with late-set statistics and fits.
    Sweep,
}

impl Mode {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "theory" => Ok(Mode::Theory),
            "simulate" => Ok(Mode::Simulate),
            "analyze" => Ok(Mode::Analyze),
            "oracle" => Ok(Mode::Oracle),
            "sweep" => Ok(Mode::Sweep),
            other => Err(CliError::Usage(format!("unknown mode '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Theory => "theory",
            Mode::Simulate => "simulate",
            Mode::Analyze => "analyze",
            Mode::Oracle => "oracle",
            Mode::Sweep => "sweep",
        }
    }
}

/// Fully resolved configuration, echoed verbatim into the run manifest.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub n: Vec<u32>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub seeds: u32,
    pub master_seed: u64,
    pub workers: usize,
    pub out: PathBuf,
    pub schedule_r0: f64,
    pub schedule_base: f64,
}

#[derive(Parser, Debug)]
#[command(
    name = "latewalk",
    about = "Late points of the simple random walk on the two-dimensional torus: \
             simulation sweeps, exponent tables, and exact-chain oracles",
    disable_help_flag = false
)]
struct Cli {
    /// theory | simulate | analyze | oracle | sweep
    #[arg(long)]
    mode: Option<String>,
    /// Comma-separated torus sides, e.g. 128,256,512
    #[arg(long)]
    n: Option<String>,
    /// Comma-separated lateness levels in (0, 1]
    #[arg(long)]
    alpha: Option<String>,
    /// Comma-separated distance-scale exponents in (0, 1)
    #[arg(long)]
    beta: Option<String>,
    /// Number of replicas per torus side
    #[arg(long)]
    seeds: Option<u32>,
    /// Master seed; replica streams derive from it
    #[arg(long)]
    master_seed: Option<u64>,
    /// Worker threads
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat JSON config file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Geometric radii schedule base (> 1)
    #[arg(long)]
    schedule_base: Option<f64>,
    /// Geometric radii schedule innermost radius (>= 1)
    #[arg(long)]
    schedule_r0: Option<f64>,
}

/// The flat JSON config file: every key optional, unknown keys rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    mode: Option<String>,
    n: Option<Vec<u32>>,
    alpha: Option<Vec<f64>>,
    beta: Option<Vec<f64>>,
    seeds: Option<u32>,
    master_seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
    schedule_base: Option<f64>,
    schedule_r0: Option<f64>,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|_| CliError::Usage(format!("cannot parse '{tok}' in --{what}")))
        })
        .collect()
}

/// Parses argv (excluding the program name handled by clap) plus the
/// optional config file into a validated configuration.
pub fn parse_config<I, S>(args: I) -> Result<ExperimentConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;

    let file: FileConfig = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("config file {path:?}: {e}")))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("config file {path:?}: {e}")))?
        }
        None => FileConfig::default(),
    };

    let mode = match (&cli.mode, &file.mode) {
        (Some(m), _) => Mode::parse(m)?,
        (None, Some(m)) => Mode::parse(m)?,
        (None, None) => {
            return Err(CliError::Usage(
                "--mode is required (theory|simulate|analyze|oracle|sweep)".into(),
            ))
        }
    };

    let n = match &cli.n {
        Some(s) => parse_list(s, "n")?,
        None => file.n.unwrap_or_else(|| vec![64]),
    };
    let alpha = match &cli.alpha {
        Some(s) => parse_list(s, "alpha")?,
        None => file.alpha.unwrap_or_else(|| vec![0.5]),
    };
    let beta = match &cli.beta {
        Some(s) => parse_list(s, "beta")?,
        None => file.beta.unwrap_or_else(|| vec![0.5]),
    };
    let config = ExperimentConfig {
        mode,
        n,
        alpha,
        beta,
        seeds: cli.seeds.or(file.seeds).unwrap_or(4),
        master_seed: cli.master_seed.or(file.master_seed).unwrap_or(1),
        workers: cli.workers.or(file.workers).unwrap_or(1),
        out: cli.out.or(file.out).unwrap_or_else(|| PathBuf::from("out")),
        schedule_r0: cli.schedule_r0.or(file.schedule_r0).unwrap_or(4.0),
        schedule_base: cli.schedule_base.or(file.schedule_base).unwrap_or(2.0),
    };
    validate(&config)?;
    Ok(config)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let needs_lattice = matches!(cfg.mode, Mode::Simulate | Mode::Sweep | Mode::Analyze);
    if needs_lattice && cfg.n.is_empty() {
        return Err(CliError::Usage("--n must be nonempty for this mode".into()));
    }
    if matches!(cfg.mode, Mode::Theory | Mode::Sweep | Mode::Analyze) {
        if cfg.alpha.is_empty() {
            return Err(CliError::Usage(
                "--alpha must be nonempty for this mode".into(),
            ));
        }
        if cfg.beta.is_empty() {
            return Err(CliError::Usage(
                "--beta must be nonempty for this mode".into(),
            ));
        }
    }
    for &n in &cfg.n {
        if n < 2 {
            return Err(CliError::Usage(format!("torus side {n} must be >= 2")));
        }
    }
    let distinct: BTreeSet<u32> = cfg.n.iter().copied().collect();
    if distinct.len() != cfg.n.len() {
        return Err(CliError::Usage("duplicate values in --n".into()));
    }
    for &a in &cfg.alpha {
        if !(a > 0.0 && a <= 1.0) {
            return Err(CliError::Usage(format!("alpha {a} outside (0, 1]")));
        }
    }
    for &b in &cfg.beta {
        if !(b > 0.0 && b < 1.0) {
            return Err(CliError::Usage(format!("beta {b} outside (0, 1)")));
        }
    }
    if cfg.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    if cfg.workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    if !(cfg.schedule_r0 >= 1.0) {
        return Err(CliError::Usage("--schedule-r0 must be >= 1".into()));
    }
    if !(cfg.schedule_base > 1.0) {
        return Err(CliError::Usage("--schedule-base must be > 1".into()));
    }
    Ok(())
}
