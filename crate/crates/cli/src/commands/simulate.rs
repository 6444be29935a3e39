use clap::ArgAction;
use rosenblatt::chaos::{rosenblatt_cov, skewness_jackknife, Diagonal, PathConfig, PathEnsemble, PathMethod, PathSimulator};
use rosenblatt::moments::kappa_r;
use rosenblatt::SeedSpec;
use serde::Serialize;
use serde_json::json;

use super::hurst;
use crate::output::{Check, Report, Table};
use crate::CliError;

#[derive(clap::Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct Args {
    #[arg(long, value_enum, default_value = "double-sum")]
    #[serde(serialize_with = "method_name")]
    pub method: MethodArg,
    #[arg(long = "H", default_value_t = 0.75)]
    pub h: f64,
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "0.2,0.4,0.6,0.8,1.0")]
    pub times: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// s-cells on [0, max time].
    #[arg(long, default_value_t = PathConfig::default().cells)]
    pub cells: usize,
    /// Gauss nodes per s-cell.
    #[arg(long, default_value_t = PathConfig::default().gauss)]
    pub gauss: usize,
    /// How the i = j terms of the double sum are treated.
    #[arg(long, value_enum, default_value = "centered")]
    #[serde(serialize_with = "diag_name")]
    pub diagonal: DiagArg,
    /// Compare the sample covariance and skewness with the exact values.
    #[arg(long)]
    pub check: bool,
    /// Relative covariance tolerance for --check.
    #[arg(long, default_value_t = 0.05)]
    pub cov_tol: f64,
    /// Write only the summary, not every path.
    #[arg(long)]
    pub summary_only: bool,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum MethodArg {
    DoubleSum,
    FiniteInterval,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum DiagArg {
    Centered,
    Excluded,
}

fn method_name<S: serde::Serializer>(m: &MethodArg, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match m {
        MethodArg::DoubleSum => "double-sum",
        MethodArg::FiniteInterval => "finite-interval",
    })
}

fn diag_name<S: serde::Serializer>(d: &DiagArg, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match d {
        DiagArg::Centered => "centered",
        DiagArg::Excluded => "excluded",
    })
}

pub fn run(a: &Args) -> Result<Report, CliError> {
    let h = hurst(a.h)?;
    let method = match a.method {
        MethodArg::DoubleSum => PathMethod::DoubleSum,
        MethodArg::FiniteInterval => PathMethod::FiniteInterval,
    };
    let diagonal = match a.diagonal {
        DiagArg::Centered => Diagonal::Centered,
        DiagArg::Excluded => Diagonal::Excluded,
    };
    let cfg = PathConfig { cells: a.cells, gauss: a.gauss, diagonal, ..PathConfig::default() };
    let sim = PathSimulator::new(&h, &a.times, method, cfg)?;
    let ens: PathEnsemble = sim.simulate(a.paths, SeedSpec::new(a.seed, 0))?;
    let times = &ens.times;
    let mut t = Table::new(&["path", "t", "x"]);
    if !a.summary_only {
        for (p, row) in ens.samples.iter().enumerate() {
            for (tt, x) in times.iter().zip(row) {
                t.push(vec![p.into(), (*tt).into(), (*x).into()]);
            }
        }
    }
    let cov = ens.covariance();
    let theory: Vec<Vec<f64>> = times.iter().map(|x| times.iter().map(|y| rosenblatt_cov(a.h, *x, *y)).collect()).collect();
    let last = ens.column(times.len() - 1);
    let tl = *times.last().expect("non-empty times");
    let (skew, skew_se) = skewness_jackknife(&last, 100);
    let k3 = kappa_r(&h, 3)?;
    let mut checks = Vec::new();
    if a.check {
        let mut worst: f64 = 0.0;
        for i in 0..times.len() {
            for j in 0..times.len() {
                worst = worst.max((cov[i][j] / theory[i][j] - 1.0).abs());
            }
        }
        checks.push(Check::below("covariance relative error", worst, a.cov_tol));
        checks.push(Check::below(format!("skewness at t={tl} vs kappa3 (in standard errors)"), (skew - k3).abs() / skew_se, 3.0));
    }
    let summary = json!({
        "times": times,
        "covariance": cov,
        "theory": theory,
        "skewness": skew,
        "skewness_se": skew_se,
        "kappa3": k3,
        "n_cells": sim.n_cells(),
    });
    if a.summary_only {
        t = Table::new(&["t", "s", "cov", "theory"]);
        for i in 0..times.len() {
            for j in 0..times.len() {
                t.push(vec![times[i].into(), times[j].into(), cov[i][j].into(), theory[i][j].into()]);
            }
        }
    }
    Ok(Report { table: t, checks, summary: Some(summary), seed: Some(a.seed) })
}
