//! Experiment harness: one subcommand per computation, every run seeded,
//! every result written as CSV/JSON next to a manifest.

mod commands;
pub mod output;
pub mod params;

use std::ffi::OsString;
use std::path::Path;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use lpideal::report::digest_bytes;
use lpideal::ErrorClass;
use serde::{Deserialize, Serialize};

pub use output::{emit_plot_data, Output, PlotSummary};
pub use params::Params;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_ASSERTION: i32 = 4;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] lpideal::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("configuration error: {0}")]
    Config(String),
}

impl LabError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        LabError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Core(e) => match e.class() {
                ErrorClass::Config => EXIT_CONFIG,
                ErrorClass::Capacity => EXIT_CAPACITY,
                ErrorClass::Numerical => EXIT_NUMERICAL,
            },
            LabError::Io { .. } | LabError::Config(_) => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lplab", version, about = "Finite-section experiments on operators between lp spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Bracket ‖T‖_{p→q} for an operator read from JSON.
    Opnorm(Params),
    /// Write one of the named operators as JSON.
    Construct(Params),
    /// Measured equivalence and projection constants of a Rademacher system.
    Khintchine(Params),
    /// Small-ℓq unit vectors in random subspaces of ℓp.
    Fss(Params),
    /// Flat vectors in random subspaces of ℓ∞.
    FlatVector(Params),
    /// Fuzz campaigns for the counting, column-average and factorization bounds.
    Verify {
        #[arg(value_enum)]
        check: VerifyCheck,
        #[command(flatten)]
        params: Params,
    },
    /// Decay experiments for the separating functionals.
    Functionals {
        #[arg(value_enum)]
        which: FunctionalsCheck,
        #[command(flatten)]
        params: Params,
    },
    /// Full separation certificate.
    Certify(Params),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyCheck {
    Lemma25,
    Cor26,
    FactorBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalsCheck {
    Phi,
    Psi,
    Certify,
}

impl Command {
    fn split(self) -> (String, Params) {
        match self {
            Command::Opnorm(p) => ("opnorm".into(), p),
            Command::Construct(p) => ("construct".into(), p),
            Command::Khintchine(p) => ("khintchine".into(), p),
            Command::Fss(p) => ("fss".into(), p),
            Command::FlatVector(p) => ("flat-vector".into(), p),
            Command::Verify { check, params } => (format!("verify {}", kebab(check)), params),
            Command::Functionals { which, params } => (format!("functionals {}", kebab(which)), params),
            Command::Certify(p) => ("certify".into(), p),
        }
    }
}

fn kebab<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

/// The resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub version: String,
    pub params: Params,
}

impl ExperimentConfig {
    /// SHA-256 of the config as written into the manifest.
    pub fn digest(&self) -> String {
        let text = lpideal::json::to_string(self).expect("config serializes");
        digest_bytes(text.as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: usize,
    pub total: usize,
}

impl CheckResult {
    pub fn new(name: &str, outcomes: impl IntoIterator<Item = bool>) -> Self {
        let (mut passed, mut total) = (0, 0);
        for ok in outcomes {
            total += 1;
            passed += ok as usize;
        }
        CheckResult { name: name.to_string(), passed, total }
    }

    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub digest: String,
    pub version: String,
    pub results: Vec<CheckResult>,
    pub exit: i32,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_s: Option<f64>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit: i32,
    pub manifest: Option<RunManifest>,
    pub error: Option<LabError>,
    /// Console lines produced by the command.
    pub notes: Vec<String>,
}

/// Executes one command, writes its outputs and the manifest, and returns
/// the exit code: 0, 2 (configuration), 3 (capacity), 4 (a check failed; all
/// outputs are still written) or 1 (numerical failure).
pub fn run(cli: Cli) -> RunOutcome {
    let start = Instant::now();
    let (command, params) = cli.command.split();
    let fail = |e: LabError| RunOutcome { exit: e.exit_code(), manifest: None, error: Some(e), notes: Vec::new() };
    let mut params = match params.resolve() {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let mut out = match Output::create(&params.out_dir()) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let results = match commands::dispatch(&command, &mut params, &mut out) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let exit = if results.iter().all(CheckResult::ok) { EXIT_OK } else { EXIT_ASSERTION };
    let wall_clock = params.wall_clock.unwrap_or(false);
    let config = ExperimentConfig { command, version: env!("CARGO_PKG_VERSION").into(), params };
    let mut outputs = out.files().to_vec();
    outputs.push(MANIFEST_FILE.into());
    let manifest = RunManifest {
        digest: config.digest(),
        version: config.version.clone(),
        config,
        results,
        exit,
        outputs,
        wall_clock_s: wall_clock.then(|| start.elapsed().as_secs_f64()),
    };
    if let Err(e) = out.json(MANIFEST_FILE, &manifest) {
        return fail(e);
    }
    RunOutcome { exit, manifest: Some(manifest), error: None, notes: out.notes().to_vec() }
}

/// Parses `args` (program name first) and runs without printing anything.
pub fn run_args<I, T>(args: I) -> Result<RunOutcome, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Ok(run(Cli::try_parse_from(args)?))
}

/// Parses `args` (program name first), runs, prints a summary and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let outcome = match run_args(args) {
        Ok(o) => o,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if let Some(e) = &outcome.error {
        eprintln!("error: {e}");
    }
    for line in &outcome.notes {
        println!("{line}");
    }
    if let Some(m) = &outcome.manifest {
        for r in &m.results {
            println!("{}: {}/{} pass", r.name, r.passed, r.total);
        }
    }
    outcome.exit
}
