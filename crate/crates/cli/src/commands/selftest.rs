use rosenblatt::charfn::{cf_series, CFSeriesConfig, CumulantTable, EigProduct};
use rosenblatt::chaos::{variance_rhs, IntegrandSpec};
use rosenblatt::fracint::SmoothTestFunction;
use rosenblatt::moments::{c2_closed, cumulant_factor, kappa_r};
use rosenblatt::spectral::{nystrom_eig, SpectrumConfig};
use rosenblatt::stransform::{ito_residual_poly, SContext, TimeWeight};
use serde::Serialize;

use super::{hurst, verify};
use crate::output::{Check, Report, Table};
use crate::CliError;

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    /// Only the cheap identities (well under a second).
    #[arg(long)]
    pub quick: bool,
}

pub fn run(a: &Args) -> Result<Report, CliError> {
    let h = hurst(0.75)?;
    let mut checks = Vec::new();

    let k2 = cumulant_factor(&h, 2) * c2_closed(&h);
    checks.push(Check::below("kappa2 closed form", (k2 - 1.0).abs(), 1e-10));

    let ctx = SContext::new(&h, &SmoothTestFunction::zero(), 1.0)?;
    let k3 = kappa_r(&h, 3)?;
    for degree in [2, 3] {
        let r = ito_residual_poly(&ctx, degree, 0.5, 1.0, k3)?;
        checks.push(Check::zero(format!("ito x^{degree} vanishes at xi=0"), r.residual));
    }

    let sp = nystrom_eig(&h, SpectrumConfig { cells: 100, ..SpectrumConfig::default() })?;
    let prod = EigProduct::new(&sp, 2000);
    checks.push(Check::below("cf(0) = 1", (prod.cf(0.0, 1.0) - 1.0).norm(), 1e-14));
    let (p, m) = (prod.cf(0.4, 1.0), prod.cf(-0.4, 1.0));
    checks.push(Check::below("cf(-theta) = conj cf(theta)", (p - m.conj()).norm(), 1e-14));

    let spec = IntegrandSpec { order: 0, a: 0.25, b: 0.75, time: TimeWeight::constant(1.0), space: SmoothTestFunction::zero() };
    let v = variance_rhs(&spec, &h, 40)?.total();
    checks.push(Check::below("constant integrand variance", (v / 0.5f64.powf(1.5) - 1.0).abs(), 1e-3));

    if !a.quick {
        let table = CumulantTable::new(&h, 40)?;
        let cfg = CFSeriesConfig { kmax: 40, domain_check: true };
        let s = cf_series(0.3, 1.0, &table, &cfg)?.value;
        checks.push(Check::below("cf series vs product at theta=0.3", (s - prod.cf(0.3, 1.0)).norm(), 1e-6));
        for degree in ["2", "3"] {
            let r = verify::ito(&verify::ItoArgs {
                degree: degree.into(),
                h: vec![0.75],
                a: 0.5,
                b: 1.0,
                xi_panel: "default".into(),
                tol: None,
                kmax: 20,
                theta_max: 0.68,
                sigma: 0.4,
                omega: 1.0,
                pw_slack: 1e-4,
            })?;
            checks.extend(r.checks);
        }
        let r = verify::variance(&verify::VarianceArgs { spec: None, h: 0.75, nodes: 80, cells: 80, tol: 1e-3 })?;
        checks.extend(r.checks);
    }

    let mut t = Table::new(&["check", "value", "tolerance", "pass"]);
    for c in &checks {
        t.push(vec![c.name.clone().into(), c.value.into(), c.tolerance.into(), c.pass.into()]);
    }
    Ok(Report { table: t, checks, summary: None, seed: None })
}
