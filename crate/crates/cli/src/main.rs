//! `rosenblatt`: computations and verifications from the command line.
//!
//! Exit codes: 0 when every check passes, 1 when a check misses its tolerance or a computation
//! fails numerically, 2 for bad flags or configuration. `--config file.json` supplies flags as a
//! JSON object (keys are long flag names); flags on the command line win. The thread count is
//! taken from `RAYON_NUM_THREADS`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]


mod commands;
mod output;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::Value;

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "rosenblatt", version, about = "Rosenblatt process numerics and verifications")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    out: Format,
    /// Directory for `<command>.csv|json` and `<command>.manifest.json`; stdout/stderr otherwise.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// JSON file of flag values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cumulants κ_r by closed form, quadrature, eigenvalues and Nyström traces.
    Cumulants(commands::cumulants::Args),
    /// Eigenvalues of T_1 and their power sums; reads or writes the cache file.
    Spectrum(commands::spectrum::Args),
    /// Characteristic function by series, eigen-product and sampling, plain or shifted by ξ.
    Charfn(commands::charfn::Args),
    /// Paths on a time grid by discretizing the double Wiener integral.
    Simulate(commands::simulate::Args),
    /// Itô formula residuals at the level of S-transforms.
    VerifyIto(commands::verify::ItoArgs),
    /// Three-term variance identity against slot enumeration.
    VerifyVariance(commands::verify::VarianceArgs),
    /// Skorohod equality for the finite-interval noise, and S(X) ≠ S(Z).
    VerifySkorohod(commands::verify::SkorohodArgs),
    /// Internal consistency checks.
    Selftest(commands::selftest::Args),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Cumulants(_) => "cumulants",
            Command::Spectrum(_) => "spectrum",
            Command::Charfn(_) => "charfn",
            Command::Simulate(_) => "simulate",
            Command::VerifyIto(_) => "verify-ito",
            Command::VerifyVariance(_) => "verify-variance",
            Command::VerifySkorohod(_) => "verify-skorohod",
            Command::Selftest(_) => "selftest",
        }
    }

    fn config(&self) -> Value {
        let v = match self {
            Command::Cumulants(a) => serde_json::to_value(a),
            Command::Spectrum(a) => serde_json::to_value(a),
            Command::Charfn(a) => serde_json::to_value(a),
            Command::Simulate(a) => serde_json::to_value(a),
            Command::VerifyIto(a) => serde_json::to_value(a),
            Command::VerifyVariance(a) => serde_json::to_value(a),
            Command::VerifySkorohod(a) => serde_json::to_value(a),
            Command::Selftest(a) => serde_json::to_value(a),
        };
        v.expect("arguments serialize")
    }

    fn run(&self) -> Result<output::Report, CliError> {
        match self {
            Command::Cumulants(a) => commands::cumulants::run(a),
            Command::Spectrum(a) => commands::spectrum::run(a),
            Command::Charfn(a) => commands::charfn::run(a),
            Command::Simulate(a) => commands::simulate::run(a),
            Command::VerifyIto(a) => commands::verify::ito(a),
            Command::VerifyVariance(a) => commands::verify::variance(a),
            Command::VerifySkorohod(a) => commands::verify::skorohod(a),
            Command::Selftest(a) => commands::selftest::run(a),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, files or parameter values.
    Config(String),
    /// A computation that could not be carried out.
    Compute(rosenblatt::Error),
}

impl From<rosenblatt::Error> for CliError {
    fn from(e: rosenblatt::Error) -> Self {
        use rosenblatt::Error as E;
        match e {
            E::Domain(_) | E::Shape(_) | E::Unsupported(_) | E::Memory(_) => CliError::Config(e.to_string()),
            _ => CliError::Compute(e),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Compute(e) => write!(f, "computation failed: {e}"),
        }
    }
}

/// Splices the flags from `--config file.json` in right after the subcommand name.
fn expand_config(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut out = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or("--config needs a file")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            out.push(a);
        }
    }
    let Some(path) = path else { return Ok(out) };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{path}: {e}"))?;
    let obj: serde_json::Map<String, Value> = serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
    let mut flags = Vec::new();
    for (k, v) in obj {
        let flag = format!("--{}", k.replace('_', "-"));
        match v {
            Value::Bool(true) => flags.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(scalar).collect::<Result<_, _>>()?;
                flags.push(flag);
                flags.push(parts.join(","));
            }
            other => {
                flags.push(flag);
                flags.push(scalar(&other)?);
            }
        }
    }
    // the subcommand is the first argument that is neither a global flag nor its value
    let mut pos = 1;
    while pos < out.len() {
        match out[pos].as_str() {
            "--out" | "--out-dir" => pos += 2,
            a if a.starts_with('-') => pos += 1,
            _ => break,
        }
    }
    let tail = out.split_off((pos + 1).min(out.len()));
    out.extend(flags);
    out.extend(tail);
    Ok(out)
}

fn scalar(v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        other => Err(format!("unsupported config value {other}")),
    }
}

fn main() -> ExitCode {
    let argv = match expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let report = match cli.command.run() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(match e {
                CliError::Config(_) => 2,
                CliError::Compute(_) => 1,
            });
        }
    };
    let manifest = output::manifest(cli.command.name(), cli.command.config(), &report, start.elapsed().as_secs_f64());
    if let Err(e) = output::emit(cli.command.name(), cli.out, cli.out_dir.as_deref(), &report, &manifest) {
        eprintln!("cannot write output: {e}");
        return ExitCode::from(2);
    }
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("FAIL {}: {:e} vs tolerance {:e}", c.name, c.value, c.tolerance);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
