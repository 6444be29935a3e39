use clap::ArgAction;
use rosenblatt::charfn::{cf_series, empirical_cf, CFSeriesConfig, CumulantTable, EigProduct, TranslatedCf};
use rosenblatt::chaos::simulate_marginal;
use rosenblatt::spectral::{nystrom_eig, SpectrumConfig};
use rosenblatt::SeedSpec;
use serde::Serialize;

use super::{config, hurst};
use crate::output::{Check, Report, Table};
use crate::{parse, CliError};

#[derive(clap::Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct Args {
    #[arg(long = "H", default_value_t = 0.75)]
    pub h: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// `lo:hi:n` or a comma list.
    #[arg(long, default_value = "0.2,0.5,1.0")]
    pub theta_grid: String,
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "series,product,empirical")]
    pub routes: Vec<String>,
    /// Shift ξ as `coef,center,width[,degree];...` or a JSON file; plain CF when absent.
    #[arg(long)]
    pub xi: Option<String>,
    /// Series truncation order.
    #[arg(long, default_value_t = 200)]
    pub kmax: usize,
    /// Modes in the eigen-product.
    #[arg(long, default_value_t = 20000)]
    pub modes: usize,
    /// Marginal samples for the empirical route.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    /// Modes in the marginal sampler.
    #[arg(long, default_value_t = 200)]
    pub sampler_modes: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Largest allowed series/product gap.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Allowed empirical/product gap in standard errors.
    #[arg(long, default_value_t = 3.0)]
    pub z_max: f64,
}

pub fn run(a: &Args) -> Result<Report, CliError> {
    let h = hurst(a.h)?;
    if !(a.t > 0.0) {
        return config(format!("t must be positive, got {}", a.t));
    }
    let thetas = parse::grid(&a.theta_grid).map_err(CliError::Config)?;
    for r in &a.routes {
        if !["series", "product", "empirical"].contains(&r.as_str()) {
            return config(format!("unknown route `{r}`"));
        }
    }
    let want = |r: &str| a.routes.iter().any(|x| x == r);
    let xi = a.xi.as_deref().map(parse::xi).transpose().map_err(CliError::Config)?;
    if xi.is_some() && want("empirical") {
        return config("the empirical route samples the plain law; drop it or drop --xi");
    }
    let sp = nystrom_eig(&h, SpectrumConfig::default())?;
    let table = CumulantTable::new(&h, a.kmax)?;
    let scfg = CFSeriesConfig { kmax: a.kmax, domain_check: true };
    let plain = EigProduct::new(&sp, a.modes);
    let shifted = xi.as_ref().map(|x| TranslatedCf::with_modes(a.t, x, &sp, a.kmax, a.modes)).transpose()?;
    let samples = if want("empirical") { simulate_marginal(a.t, &sp, a.samples, a.sampler_modes, SeedSpec::new(a.seed, 0))? } else { Vec::new() };
    let mut t = Table::new(&["theta", "route", "re", "im", "se_re", "se_im"]);
    let mut checks = Vec::new();
    for &th in &thetas {
        let product = match &shifted {
            Some(s) => s.product(th),
            None => plain.cf(th, a.t),
        };
        if want("product") {
            t.push(vec![th.into(), "product".into(), product.re.into(), product.im.into(), 0.0.into(), 0.0.into()]);
        }
        if want("series") {
            let series = match &shifted {
                Some(s) => s.eval(th, &table, &scfg).series,
                None => cf_series(th, a.t, &table, &scfg).ok().map(|v| v.value),
            };
            if let Some(v) = series {
                t.push(vec![th.into(), "series".into(), v.re.into(), v.im.into(), 0.0.into(), 0.0.into()]);
                checks.push(Check::below(format!("series vs product at theta={th}"), (v - product).norm(), a.tol));
            }
        }
        if want("empirical") {
            let (v, se_c, se_s) = empirical_cf(&samples, th);
            t.push(vec![th.into(), "empirical".into(), v.re.into(), v.im.into(), se_c.into(), se_s.into()]);
            let z = ((v.re - product.re) / se_c.max(1e-300)).abs().max(((v.im - product.im) / se_s.max(1e-300)).abs());
            checks.push(Check::below(format!("empirical vs product at theta={th} (in standard errors)"), z, a.z_max));
        }
    }
    Ok(Report { table: t, checks, summary: None, seed: want("empirical").then_some(a.seed) })
}
