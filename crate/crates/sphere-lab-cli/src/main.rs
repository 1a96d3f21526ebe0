//! Command-line driver for the sphere laboratory.
//!
//! Four subcommands cover the library surface: `constants` evaluates the
//! recursive exponent constants for an inductive configuration, `spectral`
//! tabulates averaging-operator eigenvalues at one latitude, `estimate` runs a
//! single Monte Carlo experiment from a JSON spec, and `verify` replays the
//! pinned-seed acceptance suite.
//!
//! Stdout carries only deterministic payloads; wall-clock timings live in the
//! run manifest written next to `--out` files. Exit codes: 0 success, 1 input
//! error, 2 invalid configuration, 3 criterion failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use sphere_lab::constants::{derived_constants, DerivedConstants};
use sphere_lab::geometry::InductiveConfiguration;
use sphere_lab::harness::{self, ExperimentReport, ExperimentSpec};
use sphere_lab::spectral::EigenTable;
use sphere_lab::{acceptance, Error};

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_CRITERION: u8 = 3;

#[derive(Parser)]
#[command(name = "sphere-lab", version, about = "Numerical laboratory for spherical averaging operators")]
struct Cli {
    /// Worker threads for the Monte Carlo pool (default: one per core)
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Directory for output files; a run manifest with sha256 digests is
    /// written alongside them
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Stdout payload format (spectral defaults to csv, the rest to json)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Derived constants for an inductive configuration
    Constants {
        /// Configuration as inline JSON ({"r_values": [...]}) or a file path
        config: String,
    },
    /// Eigenvalue table of the averaging operator at latitude r
    Spectral {
        /// Ambient dimension
        #[arg(long)]
        n: usize,
        /// Latitude of the averaging operator, |r| < 1
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        /// Largest degree in the table
        #[arg(long = "K", default_value_t = 64)]
        k_max: usize,
        /// Restrict output to this single degree
        #[arg(long)]
        k: Option<usize>,
    },
    /// Run one experiment from a JSON spec
    Estimate {
        /// Experiment spec as inline JSON or a file path
        spec: String,
        /// Override the spec's sample budget
        #[arg(long)]
        samples: Option<u64>,
        /// Override the spec's seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Replay the pinned-seed acceptance suite
    Verify,
}

#[derive(Serialize)]
struct OutputDigest {
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    version: String,
    seed: Option<u64>,
    params: serde_json::Value,
    runtime_seconds: f64,
    outputs: Vec<OutputDigest>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(workers) = cli.workers {
        if workers == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(EXIT_INPUT);
        }
        // The pool is process-global and must be sized before first use.
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }

    let started = Instant::now();
    let result = match &cli.command {
        Command::Constants { config } => cmd_constants(config),
        Command::Spectral { n, r, k_max, k } => cmd_spectral(&cli, *n, *r, *k_max, *k),
        Command::Estimate { spec, samples, seed } => cmd_estimate(&cli, spec, *samples, *seed),
        Command::Verify => cmd_verify(),
    };

    match result {
        Ok(run) => {
            if let Some(dir) = &cli.out {
                if let Err(e) = write_outputs(dir, &run, started) {
                    eprintln!("error: writing outputs: {e}");
                    return ExitCode::from(EXIT_INPUT);
                }
            }
            ExitCode::from(run.exit)
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.exit)
        }
    }
}

/// Completed run: stdout has been printed, files wait for the manifest pass.
struct RunOutput {
    command: &'static str,
    seed: Option<u64>,
    params: serde_json::Value,
    files: Vec<(String, String)>,
    exit: u8,
}

struct Failure {
    message: String,
    exit: u8,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { message: message.into(), exit: EXIT_INPUT }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match e {
            Error::InvalidConfiguration(_)
            | Error::DiameterCondition(_)
            | Error::NotPositiveSemidefinite { .. } => EXIT_CONFIG,
            _ => EXIT_INPUT,
        };
        Failure { message: e.to_string(), exit }
    }
}

/// Accepts either inline JSON (first non-space byte `{`) or a file path.
fn read_json_arg(arg: &str) -> Result<String, Failure> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        fs::read_to_string(arg)
            .map_err(|e| Failure::input(format!("reading {arg}: {e}")))
    }
}

fn stdout_format(cli: &Cli, default: Format) -> Format {
    cli.format.unwrap_or(default)
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

fn cmd_constants(config_arg: &str) -> Result<RunOutput, Failure> {
    let text = read_json_arg(config_arg)?;
    let config: InductiveConfiguration = serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("configuration: {e}")))?;

    let derived: DerivedConstants = derived_constants(&config);
    let payload = to_pretty_json(&derived);
    print!("{payload}");

    Ok(RunOutput {
        command: "constants",
        seed: None,
        params: serde_json::json!({ "r_values": config.r_values() }),
        files: vec![("constants.json".to_string(), payload)],
        exit: if derived.valid { EXIT_OK } else { EXIT_CONFIG },
    })
}

fn spectral_csv(table: &EigenTable, r: f64, only: Option<usize>) -> String {
    let mut csv = String::from("# schema=1\nk,mu,r_pow_k,deviation\n");
    for (k, &mu) in table.values().iter().enumerate() {
        if only.is_some_and(|want| want != k) {
            continue;
        }
        let power = r.powi(k as i32);
        csv.push_str(&format!("{k},{mu},{power},{}\n", (mu - power).abs()));
    }
    csv
}

fn spectral_json(table: &EigenTable, r: f64, only: Option<usize>) -> String {
    let rows: Vec<serde_json::Value> = table
        .values()
        .iter()
        .enumerate()
        .filter(|(k, _)| only.is_none_or(|want| want == *k))
        .map(|(k, &mu)| {
            let power = r.powi(k as i32);
            serde_json::json!({
                "k": k,
                "mu": mu,
                "r_pow_k": power,
                "deviation": (mu - power).abs(),
            })
        })
        .collect();
    to_pretty_json(&rows)
}

fn cmd_spectral(
    cli: &Cli,
    n: usize,
    r: f64,
    k_max: usize,
    only: Option<usize>,
) -> Result<RunOutput, Failure> {
    let table = EigenTable::compute(n, r, k_max).map_err(Failure::from)?;
    if let Some(k) = only {
        if k > k_max {
            return Err(Failure::input(format!("--k {k} exceeds --K {k_max}")));
        }
    }

    let csv = spectral_csv(&table, r, only);
    match stdout_format(cli, Format::Csv) {
        Format::Csv => print!("{csv}"),
        Format::Json => print!("{}", spectral_json(&table, r, only)),
    }

    Ok(RunOutput {
        command: "spectral",
        seed: None,
        params: serde_json::json!({ "n": n, "r": r, "K": k_max, "k": only }),
        files: vec![("spectral.csv".to_string(), csv)],
        exit: EXIT_OK,
    })
}

fn report_csv(report: &ExperimentReport) -> String {
    format!("# schema=1\n{}\n{}\n", harness::csv_header(), report.csv_row())
}

fn cmd_estimate(
    cli: &Cli,
    spec_arg: &str,
    samples: Option<u64>,
    seed: Option<u64>,
) -> Result<RunOutput, Failure> {
    let text = read_json_arg(spec_arg)?;
    let mut spec: ExperimentSpec = serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("experiment spec: {e}")))?;
    if let Some(samples) = samples {
        spec.samples = samples;
    }
    if let Some(seed) = seed {
        spec.seed = seed;
    }

    let report = harness::run(&spec).map_err(Failure::from)?;
    let payload = to_pretty_json(&report);
    let csv = report_csv(&report);
    match stdout_format(cli, Format::Json) {
        Format::Json => print!("{payload}"),
        Format::Csv => print!("{csv}"),
    }

    Ok(RunOutput {
        command: "estimate",
        seed: Some(report.spec.seed),
        params: serde_json::to_value(&report.spec).expect("spec serializes"),
        files: vec![
            ("report.json".to_string(), payload),
            ("report.csv".to_string(), csv),
        ],
        exit: if report.passed() { EXIT_OK } else { EXIT_CRITERION },
    })
}

fn cmd_verify() -> Result<RunOutput, Failure> {
    let reports = acceptance::run_all();

    let mut matrix = String::new();
    for report in &reports {
        matrix.push_str(&format!(
            "criterion {:2} {:<32} {}  {}\n",
            report.index,
            report.id,
            if report.passed { "PASS" } else { "FAIL" },
            report.detail
        ));
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    matrix.push_str(&format!("{passed}/{} criteria passed\n", reports.len()));
    print!("{matrix}");

    Ok(RunOutput {
        command: "verify",
        seed: None,
        params: serde_json::json!({}),
        files: vec![
            ("verify.json".to_string(), to_pretty_json(&reports)),
            ("verify.txt".to_string(), matrix),
        ],
        exit: if passed == reports.len() { EXIT_OK } else { EXIT_CRITERION },
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

fn write_outputs(dir: &Path, run: &RunOutput, started: Instant) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut outputs = Vec::with_capacity(run.files.len());
    for (name, contents) in &run.files {
        fs::write(dir.join(name), contents)?;
        outputs.push(OutputDigest {
            file: name.clone(),
            sha256: sha256_hex(contents.as_bytes()),
        });
    }
    let manifest = RunManifest {
        command: run.command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: run.seed,
        params: run.params.clone(),
        runtime_seconds: started.elapsed().as_secs_f64(),
        outputs,
    };
    fs::write(dir.join("manifest.json"), to_pretty_json(&manifest))
}
