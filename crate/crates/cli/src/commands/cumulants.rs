use clap::ArgAction;
use rosenblatt::moments::{c2_closed, c3_closed, c_k_mc, c_k_quad, cumulant_factor, power_sums_nystrom};
use rosenblatt::spectral::{nystrom_eig, SpectrumConfig};
use rosenblatt::SeedSpec;
use serde::Serialize;

use super::{config, hurst};
use crate::output::{Check, Report, Table};
use crate::CliError;

#[derive(clap::Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct Args {
    /// Hurst indices.
    #[arg(long = "H", value_delimiter = ',', action = ArgAction::Set, default_value = "0.75")]
    pub h: Vec<f64>,
    /// Highest cumulant order.
    #[arg(long, default_value_t = 6)]
    pub max_order: usize,
    /// Cells of the eigenvalue route.
    #[arg(long, default_value_t = 400)]
    pub cells: usize,
    /// Intervals of the Nyström trace route (r ≥ 5).
    #[arg(long, default_value_t = 400)]
    pub intervals: usize,
    /// Monte Carlo samples for the cyclic integrals (0 skips that route).
    #[arg(long, default_value_t = 0)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Tolerance of the κ_2 = 1 check on the closed-form route.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

pub fn run(a: &Args) -> Result<Report, CliError> {
    if a.max_order < 2 {
        return config(format!("--max-order must be at least 2, got {}", a.max_order));
    }
    let mut t = Table::new(&["H", "r", "kappa", "route", "error"]);
    let mut checks = Vec::new();
    for &hv in &a.h {
        let h = hurst(hv)?;
        // κ_r = cf(r)·c_r = pf(r)·∑λ_n^r
        let cf = |r: usize| cumulant_factor(&h, r);
        let pf = |r: usize| cumulant_factor(&h, r) / h.kappa.powi(r as i32);
        let k2 = cf(2) * c2_closed(&h);
        t.push(vec![hv.into(), 2usize.into(), k2.into(), "closed".into(), 0.0.into()]);
        checks.push(Check::below(format!("kappa2 closed H={hv}"), (k2 - 1.0).abs(), a.tol));
        if a.max_order >= 3 {
            t.push(vec![hv.into(), 3usize.into(), (cf(3) * c3_closed(&h)).into(), "closed".into(), 0.0.into()]);
        }
        for r in 2..=a.max_order.min(4) {
            t.push(vec![hv.into(), r.into(), (cf(r) * c_k_quad(&h, r)?).into(), "quadrature".into(), "".into()]);
        }
        let sp = nystrom_eig(&h, SpectrumConfig { cells: a.cells, n_keep: SpectrumConfig::default().n_keep })?;
        for r in 2..=a.max_order {
            let p = sp.power_sum(r as u32)?;
            t.push(vec![hv.into(), r.into(), (pf(r) * p.value()).into(), "spectral".into(), (pf(r) * p.bound).into()]);
        }
        // collocation sums of low powers converge too slowly for the Richardson step
        if a.max_order >= 5 {
            let ny = power_sums_nystrom(&h, a.max_order, a.intervals)?;
            for r in 5..=a.max_order {
                t.push(vec![hv.into(), r.into(), (pf(r) * ny.sums[r]).into(), "nystrom".into(), (pf(r) * ny.change[r]).into()]);
            }
        }
        if a.mc_samples > 0 {
            for r in 2..=a.max_order {
                let e = c_k_mc(&h, r, a.mc_samples, SeedSpec::new(a.seed, r as u64))?;
                t.push(vec![hv.into(), r.into(), (cf(r) * e.value).into(), "montecarlo".into(), (cf(r) * e.std_err).into()]);
            }
        }
    }
    Ok(Report { table: t, checks, summary: None, seed: (a.mc_samples > 0).then_some(a.seed) })
}
