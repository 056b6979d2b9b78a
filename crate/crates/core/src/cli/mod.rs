//! Command-line front end.

mod config;
mod output;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use config::{load_file, resolve_ids, FileConfig, Overrides};
pub use output::{to_csv, to_json};

use crate::error::{Error, Result};
use crate::experiments::{list_experiments, run_experiment, ExperimentId, ExperimentReport, ExperimentSpec};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub const BUILD_ID: &str = env!("BMTRANSFORM_BUILD_ID");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ListFormat {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "bmtransform", version = BUILD_ID, about = "Verify path transformations of Brownian motion by simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Show the registered experiments.
    List {
        #[arg(long, value_enum, default_value = "text")]
        format: ListFormat,
    },
    /// Run experiments and write their reports.
    Run(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment id, comma list, or `all`; repeatable.
    #[arg(long = "id")]
    ids: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_paths: Option<usize>,
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long = "truncation-T")]
    truncation_t: Option<f64>,
    /// Comma-separated fractions of t.
    #[arg(long, value_parser = config::parse_marginals)]
    marginals: Option<Vec<f64>>,
    #[arg(long)]
    family_alpha: Option<f64>,
    #[arg(long)]
    n_permutations: Option<usize>,
    #[arg(long)]
    energy_sample: Option<usize>,
    /// Replace each identity by a deliberately wrong one.
    #[arg(long)]
    negative_control: bool,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Directory receiving one report per experiment and `summary.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(short, action = clap::ArgAction::Count)]
    verbose: u8,
}

/// Fully resolved `run` invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub ids: Vec<ExperimentId>,
    pub overrides: Overrides,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub verbosity: u8,
}

impl RunConfig {
    pub fn specs(&self) -> Result<Vec<ExperimentSpec>> {
        self.ids
            .iter()
            .map(|&id| {
                let mut spec = ExperimentSpec::for_id(id);
                self.overrides.apply(&mut spec);
                spec.validate()?;
                Ok(spec)
            })
            .collect()
    }
}

fn resolve(args: RunArgs) -> Result<RunConfig> {
    let file = match &args.config {
        Some(p) => load_file(p)?,
        None => FileConfig::default(),
    };
    let flags = Overrides {
        seed: args.seed,
        n_paths: args.n_paths,
        n_steps: args.n_steps,
        t: args.t,
        mu: args.mu,
        x: args.x,
        alpha: args.alpha,
        u: args.u,
        truncation_t: args.truncation_t,
        marginals: args.marginals,
        family_alpha: args.family_alpha,
        n_permutations: args.n_permutations,
        energy_sample: args.energy_sample,
        negative_control: args.negative_control.then_some(true),
    };
    let ids = if args.ids.is_empty() { file.id.clone() } else { args.ids };
    let format = match (args.format, file.format.as_deref()) {
        (Some(f), _) => f,
        (None, Some(s)) => Format::from_str(s, true).map_err(|_| Error::Config(format!("unknown format {s:?}")))?,
        (None, None) => Format::Json,
    };
    let workers = args.workers.map(|w| w as usize).or(file.workers).unwrap_or(1);
    if workers == 0 {
        return Err(Error::config("workers must be at least 1"));
    }
    Ok(RunConfig {
        ids: resolve_ids(&ids)?,
        overrides: flags.over(file.overrides),
        format,
        out: args.out.or(file.out.map(PathBuf::from)),
        workers,
        verbosity: args.verbose,
    })
}

pub fn cmd_list(format: ListFormat) -> Result<String> {
    let entries = list_experiments();
    Ok(match format {
        ListFormat::Json => to_json(&entries)?,
        ListFormat::Text => {
            let mut s = String::new();
            for e in entries {
                let mu = if e.requires_positive_mu { "  [mu>0]" } else { "" };
                s.push_str(&format!("{:<16} {}{mu}\n", e.id.name(), e.description));
            }
            s
        }
    })
}

#[derive(Serialize)]
struct SummaryEntry<'a> {
    id: ExperimentId,
    overall_pass: bool,
    n_tests: usize,
    n_failed: usize,
    wall_time_s: f64,
    spec: &'a ExperimentSpec,
}

#[derive(Serialize)]
struct Summary<'a> {
    build_id: &'static str,
    seed: Option<u64>,
    workers: usize,
    overall_pass: bool,
    experiments: Vec<SummaryEntry<'a>>,
}

fn summary(cfg: &RunConfig, reports: &[ExperimentReport]) -> Result<String> {
    let s = Summary {
        build_id: BUILD_ID,
        seed: cfg.overrides.seed,
        workers: cfg.workers,
        overall_pass: reports.iter().all(|r| r.overall_pass),
        experiments: reports
            .iter()
            .map(|r| SummaryEntry {
                id: r.spec.id,
                overall_pass: r.overall_pass,
                n_tests: r.tests.len(),
                n_failed: r.tests.iter().filter(|t| !t.pass).count(),
                wall_time_s: r.wall_time_s,
                spec: &r.spec,
            })
            .collect(),
    };
    to_json(&s)
}

fn render(format: Format, reports: &[ExperimentReport]) -> Result<String> {
    match format {
        Format::Csv => to_csv(reports),
        Format::Json if reports.len() == 1 => to_json(&reports[0]),
        Format::Json => to_json(reports),
    }
}

fn prepare_out(dir: &PathBuf) -> Result<()> {
    let fail = |e: std::io::Error| Error::Config(format!("output path {} is not writable: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(fail)?;
    let probe = dir.join(".bmtransform-probe");
    fs::write(&probe, b"").map_err(fail)?;
    fs::remove_file(&probe).map_err(fail)
}

/// Runs every selected experiment; `Err` only for configuration problems.
pub fn cmd_run(cfg: &RunConfig) -> Result<i32> {
    let specs = cfg.specs()?;
    if let Some(dir) = &cfg.out {
        prepare_out(dir)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let mut reports = Vec::with_capacity(specs.len());
    let mut failed_runs = false;
    for spec in &specs {
        if cfg.verbosity > 0 {
            eprintln!("running {}", spec.id);
        }
        match pool.install(|| run_experiment(spec)) {
            Ok(r) => {
                if cfg.verbosity > 0 {
                    eprintln!(
                        "{} {} in {:.1}s",
                        spec.id,
                        if r.overall_pass { "passed" } else { "FAILED" },
                        r.wall_time_s
                    );
                }
                reports.push(r);
            }
            Err(e) => {
                eprintln!("{}: {e}", spec.id);
                failed_runs = true;
            }
        }
    }
    match &cfg.out {
        Some(dir) => {
            let ext = match cfg.format {
                Format::Json => "json",
                Format::Csv => "csv",
            };
            for r in &reports {
                let path = dir.join(format!("{}.{ext}", r.spec.id.name()));
                fs::write(&path, render(cfg.format, std::slice::from_ref(r))?)?;
            }
            fs::write(dir.join("summary.json"), summary(cfg, &reports)?)?;
        }
        None => print!("{}", render(cfg.format, &reports)?),
    }
    let all_pass = !failed_runs && reports.iter().all(|r| r.overall_pass);
    Ok(if all_pass { EXIT_PASS } else { EXIT_FAIL })
}

/// Entry point shared by the binary and tests; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    let result = match cli.command {
        Command::List { format } => cmd_list(format).map(|s| {
            print!("{s}");
            EXIT_PASS
        }),
        Command::Run(args) => resolve(args).and_then(|cfg| cmd_run(&cfg)),
    };
    match result {
        Ok(code) => code,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAIL
        }
    }
}
