use std::path::PathBuf;

use clap::ArgAction;
use rosenblatt::charfn::CumulantTable;
use rosenblatt::chaos::{variance_bruteforce, variance_rhs, IntegrandSpec};
use rosenblatt::fracint::SmoothTestFunction;
use rosenblatt::moments::kappa_r;
use rosenblatt::spectral::{nystrom_eig, SpectrumConfig};
use rosenblatt::stransform::{ito_residual_poly, ito_residual_pw, s_x, s_z, skorohod_equality_check, BandLimitedF, SContext, SkorohodIntegrand, TimeWeight, DEFAULT_H_PANEL};
use serde::Serialize;

use super::{config, hurst};
use crate::output::{Check, Report, Table};
use crate::{parse, CliError};

#[derive(clap::Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct ItoArgs {
    /// 2, 3 or pw (band-limited F).
    #[arg(long, default_value = "2")]
    pub degree: String,
    #[arg(long = "H", value_delimiter = ',', action = ArgAction::Set, default_values_t = DEFAULT_H_PANEL)]
    pub h: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// `default`, a JSON list, or atom lists separated by `|`.
    #[arg(long, default_value = "default")]
    pub xi_panel: String,
    /// Relative tolerance; 1e-4 for degree 2 and 1e-3 for degree 3 when absent.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Truncation of the k-sum (pw).
    #[arg(long, default_value_t = 20)]
    pub kmax: usize,
    /// Support half-width of F̂ (pw).
    #[arg(long, default_value_t = 0.68)]
    pub theta_max: f64,
    /// Gaussian window of F̂ (pw).
    #[arg(long, default_value_t = 0.4)]
    pub sigma: f64,
    /// Cosine frequency of F̂ (pw).
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Absolute slack added to the tail bound (pw).
    #[arg(long, default_value_t = 1e-4)]
    pub pw_slack: f64,
}

pub fn ito(a: &ItoArgs) -> Result<Report, CliError> {
    let panel = parse::xi_panel(&a.xi_panel).map_err(CliError::Config)?;
    if !(a.a > 0.0 && a.a < a.b) {
        return config(format!("need 0 < a < b, got ({}, {})", a.a, a.b));
    }
    let mut checks = Vec::new();
    match a.degree.as_str() {
        "2" | "3" => {
            let degree: u32 = a.degree.parse().expect("checked");
            let tol = a.tol.unwrap_or(if degree == 2 { 1e-4 } else { 1e-3 });
            let mut t = Table::new(&["H", "xi", "degree", "lhs", "rhs_integral", "rhs_difference", "residual", "relative"]);
            for &hv in &a.h {
                let h = hurst(hv)?;
                let k3 = kappa_r(&h, 3)?;
                for (i, xi) in panel.iter().enumerate() {
                    let ctx = SContext::new(&h, xi, a.b)?;
                    let r = ito_residual_poly(&ctx, degree, a.a, a.b, k3)?;
                    t.push(vec![hv.into(), i.into(), degree.into(), r.lhs.into(), r.rhs_integral.into(), r.rhs_difference.into(), r.residual.into(), r.relative.into()]);
                    checks.push(Check::below(format!("ito x^{degree} H={hv} xi={i}"), r.relative, tol));
                }
                let r = ito_residual_poly(&SContext::new(&h, &SmoothTestFunction::zero(), a.b)?, degree, a.a, a.b, k3)?;
                t.push(vec![hv.into(), "zero".into(), degree.into(), r.lhs.into(), r.rhs_integral.into(), r.rhs_difference.into(), r.residual.into(), r.relative.into()]);
                checks.push(Check::zero(format!("ito x^{degree} H={hv} xi=0 exactly"), r.residual));
            }
            Ok(Report { table: t, checks, summary: None, seed: None })
        }
        "pw" => {
            let fhat = BandLimitedF::gaussian_windowed(a.theta_max, a.sigma, a.omega)?;
            let mut t = Table::new(&["H", "xi", "k", "term_size", "residual_at_k", "lhs_re", "rhs_re", "residual", "tail_bound"]);
            for &hv in &a.h {
                let h = hurst(hv)?;
                let sp = nystrom_eig(&h, SpectrumConfig::default())?;
                let table = CumulantTable::new(&h, a.kmax.max(2))?;
                for (i, xi) in panel.iter().enumerate() {
                    let ctx = SContext::new(&h, xi, a.b)?;
                    let r = ito_residual_pw(&ctx, &fhat, a.a, a.b, a.kmax, &sp, &table)?;
                    for k in 1..=a.kmax {
                        t.push(vec![hv.into(), i.into(), k.into(), r.term_size[k].into(), r.residual_by_k[k].into(), r.lhs[0].into(), r.rhs[0].into(), r.residual.into(), r.tail_bound.into()]);
                    }
                    let tol = a.tol.unwrap_or(0.0) + r.tail_bound + a.pw_slack;
                    checks.push(Check::below(format!("ito band-limited H={hv} xi={i}"), r.residual, tol));
                }
            }
            Ok(Report { table: t, checks, summary: None, seed: None })
        }
        other => config(format!("--degree must be 2, 3 or pw, got `{other}`")),
    }
}

#[derive(clap::Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct VarianceArgs {
    /// IntegrandSpec JSON file (one object or a list); built-in m = 0, 1, 2 cases when absent.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long = "H", default_value_t = 0.75)]
    pub h: f64,
    /// Space nodes of the chaos route (≤ 120).
    #[arg(long, default_value_t = 120)]
    pub nodes: usize,
    /// Time cells of the enumeration route (≤ 120).
    #[arg(long, default_value_t = 120)]
    pub cells: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
}

/// The built-in cases: a constant on (0.2, 1.1), then φ_t = I_m((1 + t/2)η^{⊗m}) for m = 1, 2.
pub fn builtin_specs() -> Vec<IntegrandSpec> {
    let space = SmoothTestFunction::gaussian(1.0, 0.6, 0.15);
    let mk = |order: usize, time: TimeWeight| IntegrandSpec { order, a: 0.2, b: 1.1, time, space: space.clone() };
    vec![mk(0, TimeWeight::constant(1.0)), mk(1, TimeWeight { coeffs: vec![1.0, 0.5] }), mk(2, TimeWeight { coeffs: vec![1.0, 0.5] })]
}

pub fn variance(a: &VarianceArgs) -> Result<Report, CliError> {
    let h = hurst(a.h)?;
    let specs: Vec<IntegrandSpec> = match &a.spec {
        None => builtin_specs(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            let parsed = if v.is_array() { serde_json::from_value(v) } else { serde_json::from_value(v).map(|s| vec![s]) };
            parsed.map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
    };
    let mut t = Table::new(&["case", "order", "term1", "term2", "term3", "rhs", "bruteforce", "closed_form", "gap"]);
    let mut checks = Vec::new();
    for (i, s) in specs.iter().enumerate() {
        let r = variance_rhs(s, &h, a.nodes)?;
        let b = variance_bruteforce(s, &h, a.cells)?;
        let gap = if b == 0.0 { r.total().abs() } else { (r.total() / b - 1.0).abs() };
        // a constant integrand gives w²(b−a)^{2H}
        let closed = (s.order == 0 && s.time.coeffs.len() == 1).then(|| s.time.coeffs[0].powi(2) * (s.b - s.a).powf(2.0 * a.h));
        t.push(vec![i.into(), s.order.into(), r.term1.into(), r.term2.into(), r.term3.into(), r.total().into(), b.into(), closed.map_or("".into(), Into::into), gap.into()]);
        checks.push(Check::below(format!("variance case {i} (m={}) rhs vs bruteforce", s.order), gap, a.tol));
        if let Some(c) = closed {
            checks.push(Check::below(format!("variance case {i} rhs vs closed form"), (r.total() / c - 1.0).abs(), a.tol));
        }
    }
    Ok(Report { table: t, checks, summary: None, seed: None })
}

#[derive(clap::Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct SkorohodArgs {
    #[arg(long = "H", default_value_t = 0.75)]
    pub h: f64,
    /// Horizon T.
    #[arg(long = "T", default_value_t = 2.0)]
    pub t_end: f64,
    /// ξ for the equality checks.
    #[arg(long, default_value = "1,0.8,0.3")]
    pub xi: String,
    /// Positive bump for S(X_T) ≠ S(Z_T).
    #[arg(long, default_value = "1,1,0.08")]
    pub bump: String,
    /// Space factor η of the first-chaos integrand.
    #[arg(long, default_value = "1,0.6,0.25")]
    pub eta: String,
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    /// Smallest |S(X_T) − S(Z_T)| that counts as a witness.
    #[arg(long, default_value_t = 1e-3)]
    pub gap: f64,
}

pub fn skorohod(a: &SkorohodArgs) -> Result<Report, CliError> {
    let h = hurst(a.h)?;
    let xi = parse::xi(&a.xi).map_err(CliError::Config)?;
    let bump = parse::xi(&a.bump).map_err(CliError::Config)?;
    let eta = parse::xi(&a.eta).map_err(CliError::Config)?;
    let cases = [
        ("deterministic", SkorohodIntegrand::Deterministic(TimeWeight { coeffs: vec![1.0, -0.3] })),
        ("first-chaos", SkorohodIntegrand::FirstChaos { space: eta, time: TimeWeight { coeffs: vec![0.5, 1.0] } }),
    ];
    let mut t = Table::new(&["case", "left", "right", "difference"]);
    let mut checks = Vec::new();
    for (name, phi) in &cases {
        let r = skorohod_equality_check(phi, a.t_end, &xi, &h)?;
        t.push(vec![(*name).into(), r.skorohod.into(), r.wick.into(), r.residual.into()]);
        checks.push(Check::below(format!("skorohod equality {name}"), r.residual, a.tol));
    }
    let sx = s_x(a.t_end, &bump, &h)?;
    let sz = s_z(&h, &bump, a.t_end)?;
    t.push(vec!["s_x vs s_z".into(), sx.into(), sz.into(), (sx - sz).abs().into()]);
    checks.push(Check::above("S(X_T) differs from S(Z_T)", (sx - sz).abs(), a.gap));
    Ok(Report { table: t, checks, summary: None, seed: None })
}
