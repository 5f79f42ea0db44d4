//! `lhz` command-line harness: configuration, dispatch and result persistence.
//!
//! Exit status is 0 on success, 1 when a run fails or only partly succeeds,
//! and 2 for invalid configuration. Failures also print a JSON object on
//! stderr.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub mod commands;
pub mod config;
pub mod manifest;
pub mod summarize;

use config::{ExperimentConfig, OUTPUT_DIR_ENV};
use manifest::OutputSet;

pub const FAILURES_FILE: &str = "failures.json";

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<lhz_core::Error> for CliError {
    fn from(e: lhz_core::Error) -> Self {
        match e {
            lhz_core::Error::InvalidArgument(_) | lhz_core::Error::DimensionCap { .. } => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

/// One failed unit of work inside an otherwise completed run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_physical: Option<usize>,
    pub error: String,
}

impl Failure {
    pub fn seed(seed: u64, error: String) -> Self {
        Self {
            seed: Some(seed),
            n_physical: None,
            error,
        }
    }

    pub fn size(n_physical: Option<usize>, error: String) -> Self {
        Self {
            seed: None,
            n_physical,
            error,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lhz", version, about = "Annealing and free-energy experiments on the parity (LHZ) lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep each seeded instance under one schedule.
    Sweep(Params),
    /// Paired homogeneous and inhomogeneous sweeps with minimal gaps.
    Ensemble(Params),
    /// Lowest levels of H(s) on an s grid for the first seed.
    Spectrum(Params),
    /// Minimal gap and its location for both schedules.
    GapStats(Params),
    /// Constraint energy statistics on fixed-magnetization shells.
    EnergyScan(Params),
    /// Energy scan plus the quartic-plus-cubic fit.
    Fit(Params),
    /// Free energy over an m grid at fixed (s, tau).
    FreeEnergy(Params),
    /// Critical point (m_c, s_c, tau_c) of each free-energy family.
    Critical(Params),
    /// First-order transition line and its endpoint.
    TransitionLine(Params),
    /// Statistics over a sweep, ensemble or gap-stats CSV.
    Summarize(SummarizeArgs),
}

/// Every flag mirrors a config-file key of the same name.
#[derive(Debug, Args)]
struct Params {
    /// Plain-text `key = value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_logical: Option<String>,
    /// direct or auxiliary
    #[arg(long)]
    representation: Option<String>,
    /// Constraint strength.
    #[arg(long = "C", alias = "c")]
    c: Option<String>,
    #[arg(long)]
    aux_field: Option<String>,
    /// Bounds of the uniform local-field distribution.
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["LOW", "HIGH"])]
    j_uniform: Option<Vec<String>>,
    /// homogeneous or inhomogeneous
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    r: Option<String>,
    /// ascending or descending
    #[arg(long)]
    order: Option<String>,
    /// Comma-separated sweep times.
    #[arg(long)]
    t_f: Option<String>,
    #[arg(long)]
    steps_per_unit_time: Option<String>,
    /// s grid size for gaps and spectra.
    #[arg(long)]
    grid_points: Option<String>,
    #[arg(long)]
    levels: Option<String>,
    /// Samples per magnetization shell.
    #[arg(long)]
    ms: Option<String>,
    /// Comma-separated magnetizations, or `all`.
    #[arg(long, allow_negative_numbers = true)]
    m: Option<String>,
    /// abs_mean or max_energy
    #[arg(long)]
    normalization: Option<String>,
    /// thermo, finite-size, scaled or finite-temperature
    #[arg(long)]
    variant: Option<String>,
    /// Comma-separated physical qubit counts.
    #[arg(long)]
    n_p: Option<String>,
    #[arg(long)]
    quad_nodes: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    m_grid: Option<String>,
    #[arg(long)]
    s_grid: Option<String>,
    #[arg(long)]
    tau_grid: Option<String>,
    /// Seeds such as `1..100` (inclusive) or `3,5,8`.
    #[arg(long)]
    seeds: Option<String>,
    /// Worker threads; defaults to every available core.
    #[arg(long)]
    threads: Option<String>,
    /// Defaults to $LHZ_OUTPUT_DIR, then `lhz-output`.
    #[arg(long)]
    output_dir: Option<String>,
}

impl Params {
    fn flags(&self) -> Vec<(&'static str, String)> {
        let j = self.j_uniform.as_ref().map(|v| v.join(","));
        [
            ("n-logical", &self.n_logical),
            ("representation", &self.representation),
            ("C", &self.c),
            ("aux-field", &self.aux_field),
            ("j-uniform", &j),
            ("kind", &self.kind),
            ("r", &self.r),
            ("order", &self.order),
            ("t-f", &self.t_f),
            ("steps-per-unit-time", &self.steps_per_unit_time),
            ("grid-points", &self.grid_points),
            ("levels", &self.levels),
            ("ms", &self.ms),
            ("m", &self.m),
            ("normalization", &self.normalization),
            ("variant", &self.variant),
            ("n-p", &self.n_p),
            ("quad-nodes", &self.quad_nodes),
            ("beta", &self.beta),
            ("s", &self.s),
            ("tau", &self.tau),
            ("m-grid", &self.m_grid),
            ("s-grid", &self.s_grid),
            ("tau-grid", &self.tau_grid),
            ("seeds", &self.seeds),
            ("threads", &self.threads),
            ("output-dir", &self.output_dir),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect()
    }

    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let file = match &self.config {
            Some(path) => Some(
                fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?,
            ),
            None => None,
        };
        ExperimentConfig::resolve(std::env::var(OUTPUT_DIR_ENV).ok(), file.as_deref(), &self.flags())
    }
}

#[derive(Debug, Args)]
struct SummarizeArgs {
    /// CSV written by sweep, ensemble or gap-stats.
    input: PathBuf,
    /// Defaults to $LHZ_OUTPUT_DIR, then `lhz-output`.
    #[arg(long)]
    output_dir: Option<String>,
}

type Runner = fn(&ExperimentConfig, &mut OutputSet) -> Result<Vec<Failure>, CliError>;

fn runner(command: &Command) -> Option<(&'static str, Runner, &Params)> {
    Some(match command {
        Command::Sweep(p) => ("sweep", commands::sweep as Runner, p),
        Command::Ensemble(p) => ("ensemble", commands::ensemble, p),
        Command::Spectrum(p) => ("spectrum", commands::spectrum, p),
        Command::GapStats(p) => ("gap-stats", commands::gap_stats, p),
        Command::EnergyScan(p) => ("energy-scan", commands::energy_scan, p),
        Command::Fit(p) => ("fit", commands::fit, p),
        Command::FreeEnergy(p) => ("free-energy", commands::free_energy, p),
        Command::Critical(p) => ("critical", commands::critical, p),
        Command::TransitionLine(p) => ("transition-line", commands::transition, p),
        Command::Summarize(_) => return None,
    })
}

fn io(e: std::io::Error) -> CliError {
    CliError::Runtime(format!("i/o: {e}"))
}

fn run_experiment(name: &str, run: Runner, params: &Params) -> Result<Vec<Failure>, CliError> {
    let cfg = params.resolve()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut out = OutputSet::create(&cfg.output_dir).map_err(io)?;
    let failures = pool.install(|| run(&cfg, &mut out))?;
    if !failures.is_empty() {
        out.write_json(FAILURES_FILE, &failures).map_err(io)?;
    }
    out.finish(name, cfg.pairs()).map_err(io)?;
    Ok(failures)
}

fn run_summarize(args: &SummarizeArgs) -> Result<Vec<Failure>, CliError> {
    let input = fs::File::open(&args.input)
        .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", args.input.display())))?;
    let report = summarize::summarize(input)?;
    let dir = args
        .output_dir
        .clone()
        .or_else(|| std::env::var(OUTPUT_DIR_ENV).ok().filter(|d| !d.is_empty()))
        .unwrap_or_else(|| config::DEFAULT_OUTPUT_DIR.to_string());
    let mut out = OutputSet::create(PathBuf::from(&dir).as_path()).map_err(io)?;
    out.write_json("summary.json", &report).map_err(io)?;
    let echo = [
        ("input".to_string(), args.input.display().to_string()),
        ("output-dir".to_string(), dir),
    ]
    .into_iter()
    .collect();
    out.finish("summarize", echo).map_err(io)?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?);
    Ok(Vec::new())
}

fn error_json(kind: &str, message: &str, failures: &[Failure]) -> String {
    let mut value = serde_json::json!({ "error": kind, "message": message });
    if !failures.is_empty() {
        value["failures"] = serde_json::to_value(failures).unwrap_or_default();
    }
    value.to_string()
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            eprintln!("{}", error_json("usage", e.to_string().trim(), &[]));
            return 2;
        }
    };
    let result = match runner(&cli.command) {
        Some((name, run, params)) => run_experiment(name, run, params),
        None => match &cli.command {
            Command::Summarize(args) => run_summarize(args),
            _ => unreachable!(),
        },
    };
    match result {
        Ok(failures) if failures.is_empty() => 0,
        Ok(failures) => {
            let msg = format!("{} unit(s) failed; partial results written", failures.len());
            eprintln!("{}", error_json("partial", &msg, &failures));
            1
        }
        Err(e) => {
            let (kind, msg) = match &e {
                CliError::Usage(m) => ("usage", m),
                CliError::Runtime(m) => ("runtime", m),
            };
            eprintln!("{}", error_json(kind, msg, &[]));
            e.exit_code()
        }
    }
}
