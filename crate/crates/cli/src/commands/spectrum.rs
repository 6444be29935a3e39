use std::path::PathBuf;

use clap::ArgAction;
use rosenblatt::spectral::{nystrom_eig, Spectrum, SpectrumConfig};
use serde::Serialize;

use super::{config, hurst};
use crate::output::{Check, Report, Table};
use crate::CliError;

#[derive(clap::Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct Args {
    #[arg(long = "H", default_value_t = 0.75)]
    pub h: f64,
    #[arg(long, default_value_t = 400)]
    pub cells: usize,
    #[arg(long, default_value_t = 200)]
    pub n_keep: usize,
    /// Read the spectrum from this cache file instead of computing it.
    #[arg(long)]
    pub load: Option<PathBuf>,
    /// Write the spectrum to this cache file.
    #[arg(long)]
    pub save: Option<PathBuf>,
    /// Orders r of ∑λ_n^r to report (r ≥ 2).
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "2,3,4")]
    pub power_sums: Vec<u32>,
    /// Tolerance of the ∑λ_n² = 1/2 check.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
}

pub fn run(a: &Args) -> Result<Report, CliError> {
    if let Some(r) = a.power_sums.iter().find(|r| **r < 2) {
        return config(format!("power sums exist only for r ≥ 2 (T_1 is not trace class), got r = {r}"));
    }
    let sp: Spectrum = match &a.load {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            Spectrum::from_json(&text)?
        }
        None => nystrom_eig(&hurst(a.h)?, SpectrumConfig { cells: a.cells, n_keep: a.n_keep })?,
    };
    if let Some(p) = &a.save {
        std::fs::write(p, sp.to_json()).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
    }
    let mut t = Table::new(&["quantity", "index", "value", "tail", "bound"]);
    for (n, l) in sp.lambdas.iter().enumerate() {
        let name = if n < sp.n_trusted() { "lambda" } else { "lambda_untrusted" };
        t.push(vec![name.into(), (n + 1).into(), (*l).into(), "".into(), "".into()]);
    }
    let mut checks = Vec::new();
    for &r in &a.power_sums {
        let p = sp.power_sum(r)?;
        t.push(vec!["power_sum".into(), r.into(), p.value().into(), p.tail.into(), p.bound.into()]);
        if r == 2 {
            checks.push(Check::below("sum of squares = 1/2", (p.value() - 0.5).abs(), a.tol));
        }
    }
    Ok(Report { table: t, checks, summary: None, seed: None })
}
