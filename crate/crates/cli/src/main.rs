//! `qudit-verify`: build target states, derive verification strategies,
//! reproduce the cost table and simulate the protocol.
//!
//! Exit codes: 0 ok, 2 input error, 3 unsupported feature, 4 internal error.
//!
//! Files written with `--out DIR`:
//! - `state`: `amplitudes.csv` (`index,label,re,im`) and `state.json`.
//! - `verify`: `report.json` or `report.md`.
//! - `table1`: `table1.md`, `table1.csv` or `table1.json`.
//! - `simulate`: `simulation.json`.
//!
//! Complex matrices, where exported, are CSV with one row per matrix row and
//! entries written as `re+imj`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qudit_verify::io::{amplitudes_csv, complex_pair, parse_state_spec, SCHEMA};
use qudit_verify::qlinalg::norm_sqr;
use qudit_verify::report::{analyze, table1, table1_csv, table1_markdown, verify, VerificationReport};
use qudit_verify::simulate::{run_protocol, worst_case_state, ProtocolReport, SourceModel};
use qudit_verify::{build, Error, StateSpec};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "qudit-verify", version, about = "Verification of hybrid-dimensional multi-qudit states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a state and export its amplitudes.
    State {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Optimize the test weights and report the gap and sample counts.
    Verify {
        spec: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Reproduce the verification-cost table.
    Table1 {
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
    },
    /// Monte Carlo run of the protocol against an i.i.d. source.
    Simulate {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = Source::WorstCase)]
        source: Source,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 100)]
        copies: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Md,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Source {
    Honest,
    WorstCase,
    Depolarized,
}

/// Failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::Capacity(_) | Error::Domain(_) => 2,
            Error::Unsupported(_) => 3,
            Error::Internal(_) => 4,
        };
        Self { code, message: e.to_string() }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn read_spec(path: &Path) -> std::result::Result<StateSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_state_spec(&text)?)
}

fn check_unit_interval(name: &str, x: f64) -> CmdResult {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Failure::input(format!("{name} must lie in (0,1), got {x}")))
    }
}

/// Writes `files` under `out`, or prints the first one when no directory is given.
fn emit(out: Option<&Path>, files: &[(&str, String)]) -> CmdResult {
    match out {
        None => {
            print!("{}", files[0].1);
            Ok(())
        }
        Some(dir) => {
            let io = |e: std::io::Error| Failure::input(format!("cannot write to {}: {e}", dir.display()));
            fs::create_dir_all(dir).map_err(io)?;
            for (name, body) in files {
                fs::write(dir.join(name), body).map_err(io)?;
            }
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct StateMetadata {
    schema: &'static str,
    state: String,
    dims: Vec<usize>,
    split_dims: Vec<usize>,
    norm: f64,
    amplitudes: Vec<[f64; 2]>,
}

fn cmd_state(spec: &Path, out: Option<&Path>, format: Format) -> CmdResult {
    let spec = read_spec(spec)?;
    let state = build(&spec)?;
    let norm = norm_sqr(&state.psi.amplitudes).sqrt();
    eprintln!("norm check: {norm:.15} ({})", if (norm - 1.0).abs() < 1e-12 { "ok" } else { "off" });
    let meta = StateMetadata {
        schema: SCHEMA,
        state: spec.label(),
        dims: state.dims.dims().to_vec(),
        split_dims: state.dims.split().dims().to_vec(),
        norm,
        amplitudes: state.psi.amplitudes.iter().map(|&a| complex_pair(a)).collect(),
    };
    let json = ("state.json", to_json(&meta));
    let csv = ("amplitudes.csv", amplitudes_csv(&state.psi));
    match format {
        Format::Csv => emit(out, &[csv, json]),
        Format::Json | Format::Md => emit(out, &[json, csv]),
    }
}

fn report_markdown(r: &VerificationReport) -> String {
    let mut s = format!("# Verification of {}\n\n", r.state);
    s.push_str(&format!("- dims: {:?} (prime split {:?})\n", r.dims, r.split_dims));
    s.push_str(&format!("- subsets: {}\n", r.tau));
    s.push_str(&format!("- beta: {} ({:.12}), spectral {:.12}\n", r.beta, r.beta_f64, r.beta_spectral));
    s.push_str(&format!("- nu: {} ({:.12}), certified: {}\n", r.nu, r.nu_f64, r.certified));
    if let Some(c) = &r.closed_form_nu {
        s.push_str(&format!("- closed-form nu: {c}\n"));
    }
    s.push_str(&format!(
        "- samples at epsilon={}, delta={}: exact {}, bound {}\n\n",
        r.epsilon, r.delta, r.n_opt.exact, r.n_opt.bound
    ));
    s.push_str("| subset | size | weight | description |\n|---|---|---|---|\n");
    for (i, sub) in r.subsets.iter().enumerate() {
        s.push_str(&format!("| {i} | {} | {} | {} |\n", sub.size, sub.weight, sub.description));
    }
    s
}

fn cmd_verify(spec: &Path, epsilon: f64, delta: f64, out: Option<&Path>, format: Format) -> CmdResult {
    check_unit_interval("epsilon", epsilon)?;
    check_unit_interval("delta", delta)?;
    let spec = read_spec(spec)?;
    let report = verify(&spec, epsilon, delta)?;
    match format {
        Format::Md => emit(out, &[("report.md", report_markdown(&report))]),
        Format::Json => emit(out, &[("report.json", to_json(&report))]),
        Format::Csv => Err(Failure::input("verify supports --format json or md")),
    }
}

fn cmd_table1(epsilon: f64, delta: f64, out: Option<&Path>, format: Format) -> CmdResult {
    check_unit_interval("epsilon", epsilon)?;
    check_unit_interval("delta", delta)?;
    let rows = table1(epsilon, delta)?;
    let file = match format {
        Format::Md => ("table1.md", table1_markdown(&rows)),
        Format::Csv => ("table1.csv", table1_csv(&rows)),
        Format::Json => ("table1.json", to_json(&rows)),
    };
    emit(out, &[file])?;
    let failed: Vec<_> = rows.iter().filter(|r| !r.ok).map(|r| format!("{} [{}]", r.family, r.instance)).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure { code: 4, message: format!("rows outside their stated bound: {}", failed.join(", ")) })
    }
}

#[derive(Serialize)]
struct SimulationOutput {
    schema: &'static str,
    state: String,
    source: String,
    epsilon: f64,
    nu: String,
    expected_pass: f64,
    report: ProtocolReport,
}

fn cmd_simulate(
    spec: &Path,
    source: Source,
    epsilon: f64,
    copies: u64,
    trials: u64,
    seed: u64,
    out: Option<&Path>,
) -> CmdResult {
    check_unit_interval("epsilon", epsilon)?;
    if copies == 0 || trials == 0 {
        return Err(Failure::input("copies and trials must be at least 1"));
    }
    let spec = read_spec(spec)?;
    let a = analyze(&spec)?;
    let model = match source {
        Source::Honest => SourceModel::honest(&a.state),
        Source::WorstCase => worst_case_state(&a.operator, &a.state, epsilon)?,
        Source::Depolarized => SourceModel::depolarized(&a.state, epsilon)?,
    };
    let expected_pass = qudit_verify::simulate::exact_pass_probability(&a.operator, &a.state, &model)?;
    let report = run_protocol(&a.state, &a.partition, &model, copies, trials, seed)?;
    let doc = SimulationOutput {
        schema: SCHEMA,
        state: spec.label(),
        source: format!("{source:?}"),
        epsilon,
        nu: qudit_verify::io::rational_to_string(&a.operator.nu_exact()),
        expected_pass,
        report,
    };
    emit(out, &[("simulation.json", to_json(&doc))])
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::State { spec, out, format } => cmd_state(&spec, out.as_deref(), format),
        Command::Verify { spec, epsilon, delta, out, format } => cmd_verify(&spec, epsilon, delta, out.as_deref(), format),
        Command::Table1 { epsilon, delta, out, format } => cmd_table1(epsilon, delta, out.as_deref(), format),
        Command::Simulate { spec, source, epsilon, copies, trials, seed, out } => {
            cmd_simulate(&spec, source, epsilon, copies, trials, seed, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
