//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any fails.

use std::time::Instant;

use rosenblatt::charfn::{cf_series, empirical_cf, CFSeriesConfig, CumulantTable, EigProduct, TranslatedCf};
use rosenblatt::chaos::{simulate_marginal, skewness_jackknife, variance_bruteforce, variance_rhs, IntegrandSpec, PathConfig, PathMethod, PathSimulator};
use rosenblatt::fracint::SmoothTestFunction;
use rosenblatt::kernels::Hurst;
use rosenblatt::moments::{c2_closed, c_k_quad, cumulant_factor, kappa_r};
use rosenblatt::numcore::GaussLegendre;
use rosenblatt::spectral::{nystrom_eig, project_xi, Spectrum, SpectrumConfig};
use rosenblatt::stransform::{
    default_xi_panel, ito_residual_poly, ito_residual_pw, s_x, s_z, skorohod_equality_check, BandLimitedF, SContext, SkorohodIntegrand, TimeWeight,
    DEFAULT_H_PANEL,
};
use rosenblatt::{Result, SeedSpec};

type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn hurst(h: f64) -> Hurst {
    Hurst::new(h).expect("valid H")
}

fn spectrum(h: f64, cells: usize) -> Result<Spectrum> {
    nystrom_eig(&hurst(h), SpectrumConfig { cells, ..SpectrumConfig::default() })
}

fn normalization() -> Result<Outcome> {
    let (mut closed, mut quad): (f64, f64) = (0.0, 0.0);
    for hv in [0.55, 0.65, 0.75, 0.85, 0.95] {
        let h = hurst(hv);
        let f = cumulant_factor(&h, 2);
        closed = closed.max((f * c2_closed(&h) - 1.0).abs());
        quad = quad.max((f * c_k_quad(&h, 2)? - 1.0).abs());
    }
    outcome(closed < 1e-10 && quad < 1e-3, format!("closed {closed:.2e} (< 1e-10), quadrature {quad:.2e} (< 1e-3)"))
}

fn cyclic_identity() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for hv in [0.6, 0.75, 0.9] {
        let h = hurst(hv);
        let sp = spectrum(hv, 400)?;
        for r in 2..=4 {
            let cyc = h.kappa.powi(r as i32) * c_k_quad(&h, r)?;
            worst = worst.max((sp.power_sum(r as u32)?.value() - cyc).abs() / cyc);
        }
    }
    outcome(worst < 1e-2, format!("worst relative gap {worst:.2e} (< 1e-2)"))
}

fn sum_of_squares() -> Result<Outcome> {
    let (mut sq, mut drift): (f64, f64) = (0.0, 0.0);
    for hv in [0.6, 0.75, 0.9] {
        let a = spectrum(hv, 400)?;
        let b = spectrum(hv, 800)?;
        sq = sq.max((a.power_sum(2)?.value() - 0.5).abs());
        for n in 0..20 {
            drift = drift.max((a.lambdas[n] / b.lambdas[n] - 1.0).abs());
        }
    }
    outcome(sq < 1e-3 && drift < 5e-3, format!("|sum - 1/2| {sq:.2e} (< 1e-3), first 20 eigenvalues move {drift:.2e} (< 5e-3) on doubling"))
}

fn characteristic_function() -> Result<Outcome> {
    let mut series_gap: f64 = 0.0;
    for hv in [0.6, 0.75, 0.9] {
        let h = hurst(hv);
        let sp = spectrum(hv, 400)?;
        let table = CumulantTable::new(&h, 200)?;
        let cfg = CFSeriesConfig { kmax: 200, domain_check: true };
        let prod = EigProduct::new(&sp, 20_000);
        for t in [0.5f64, 1.0, 2.0] {
            let edge = 0.9 / (2f64.sqrt() * t.powf(hv));
            for i in -8..=8 {
                let th = edge * i as f64 / 8.0;
                let s = cf_series(th, t, &table, &cfg)?.value;
                series_gap = series_gap.max((s - prod.cf(th, t)).norm());
            }
        }
    }
    let sp = spectrum(0.75, 400)?;
    let prod = EigProduct::new(&sp, 20_000);
    let samples = simulate_marginal(1.0, &sp, 1_000_000, 200, SeedSpec::new(1, 0))?;
    let mut z: f64 = 0.0;
    for th in [0.2, 0.5, 1.0] {
        let (e, se_re, se_im) = empirical_cf(&samples, th);
        let p = prod.cf(th, 1.0);
        z = z.max(((e.re - p.re) / se_re).abs()).max(((e.im - p.im) / se_im).abs());
    }
    outcome(series_gap < 1e-6 && z < 3.0, format!("series vs product {series_gap:.2e} (< 1e-6), empirical {z:.2} SE (< 3)"))
}

fn translated_cf() -> Result<Outcome> {
    let h = hurst(0.75);
    let sp = spectrum(0.75, 400)?;
    let kmax = 200;
    let table = CumulantTable::new(&h, kmax)?;
    let cfg = CFSeriesConfig { kmax, domain_check: true };
    let edge = 0.9 / 2f64.sqrt();
    let (mut gap, mut dgap): (f64, f64) = (0.0, 0.0);
    for xi in default_xi_panel::<f64>() {
        let tc = TranslatedCf::with_modes(1.0, &xi, &sp, kmax, 20_000)?;
        for i in -6..=6 {
            let v = tc.eval(edge * i as f64 / 6.0, &table, &cfg);
            let s = v.series.expect("inside the radius");
            gap = gap.max((s - v.product).norm());
        }
        // the mean from the modes, independent of the Weyl route built into the product
        let beta = project_xi(&sp, 1.0, &xi)?;
        let mean: f64 = sp.lambdas.iter().zip(&beta).map(|(l, b)| l * b * b).sum();
        let e = 1e-5;
        let d = (tc.product(e) - tc.product(-e)) / (2.0 * e);
        let ds = (tc.eval(e, &table, &cfg).series.unwrap() - tc.eval(-e, &table, &cfg).series.unwrap()) / (2.0 * e);
        dgap = dgap.max(d.re.abs()).max((d.im - mean).abs()).max(ds.re.abs()).max((ds.im - mean).abs());
    }
    outcome(gap < 1e-5 && dgap < 1e-5, format!("series vs product {gap:.2e} (< 1e-5), derivative at 0 {dgap:.2e} (< 1e-5)"))
}

fn ito_poly(degree: u32, tol: f64) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut zero: f64 = 0.0;
    for hv in DEFAULT_H_PANEL {
        let h = hurst(hv);
        let k3 = kappa_r(&h, 3)?;
        for xi in default_xi_panel::<f64>() {
            let r = ito_residual_poly(&SContext::new(&h, &xi, 1.0)?, degree, 0.5, 1.0, k3)?;
            worst = worst.max(r.relative);
        }
        let r = ito_residual_poly(&SContext::new(&h, &SmoothTestFunction::zero(), 1.0)?, degree, 0.5, 1.0, k3)?;
        zero = zero.max(r.residual.abs());
    }
    outcome(worst < tol && zero == 0.0, format!("worst relative {worst:.2e} (< {tol:e}), at xi = 0 {zero:e} (exact 0)"))
}

fn ito_band_limited() -> Result<Outcome> {
    let h = hurst(0.75);
    let sp = spectrum(0.75, 400)?;
    let table = CumulantTable::new(&h, 20)?;
    let fhat = BandLimitedF::gaussian_windowed(0.68, 0.4, 1.0)?;
    let mut pass = true;
    let mut margin = f64::INFINITY;
    let mut worst: f64 = 0.0;
    for xi in default_xi_panel::<f64>() {
        let r = ito_residual_pw(&SContext::new(&h, &xi, 1.0)?, &fhat, 0.5, 1.0, 20, &sp, &table)?;
        pass &= r.residual < r.tail_bound + 1e-4;
        margin = margin.min(r.tail_bound + 1e-4 - r.residual);
        worst = worst.max(r.residual);
    }
    outcome(pass, format!("worst residual {worst:.2e}, smallest margin to tail bound + 1e-4 is {margin:.2e}"))
}

fn variance_identity() -> Result<Outcome> {
    let space = SmoothTestFunction::gaussian(1.0, 0.6, 0.15);
    let cases = [
        IntegrandSpec { order: 0, a: 0.2, b: 1.1, time: TimeWeight::constant(1.0), space: space.clone() },
        IntegrandSpec { order: 1, a: 0.2, b: 1.1, time: TimeWeight { coeffs: vec![1.0, 0.5] }, space: space.clone() },
        IntegrandSpec { order: 2, a: 0.2, b: 1.1, time: TimeWeight { coeffs: vec![1.0, 0.5] }, space },
    ];
    let mut worst: f64 = 0.0;
    let mut closed: f64 = 0.0;
    for hv in [0.6, 0.75, 0.9] {
        let h = hurst(hv);
        for c in &cases {
            let rhs = variance_rhs(c, &h, 120)?.total();
            worst = worst.max((rhs / variance_bruteforce(c, &h, 120)? - 1.0).abs());
            if c.order == 0 {
                closed = closed.max((rhs / (c.b - c.a).powf(2.0 * hv) - 1.0).abs());
            }
        }
    }
    outcome(worst < 1e-3 && closed < 1e-3, format!("rhs vs brute force {worst:.2e}, m = 0 vs closed form {closed:.2e} (< 1e-3)"))
}

fn noise_derivative() -> Result<Outcome> {
    let gl = GaussLegendre::<f64>::new(20);
    let (a, b) = (0.5, 1.0);
    let mut worst: f64 = 0.0;
    for hv in DEFAULT_H_PANEL {
        let h = hurst(hv);
        for xi in default_xi_panel::<f64>() {
            let ctx = SContext::new(&h, &xi, b)?;
            for k in [2, 3] {
                let mut err = None;
                let mut total = 0.0;
                for p in 0..8 {
                    let (lo, hi) = (a + (b - a) * p as f64 / 8.0, a + (b - a) * (p + 1) as f64 / 8.0);
                    total += gl.integrate(lo, hi, |t| {
                        ctx.s_xk_dot(t, k).unwrap_or_else(|e| {
                            err = Some(e);
                            0.0
                        })
                    });
                }
                if let Some(e) = err {
                    return Err(e);
                }
                worst = worst.max((total - (ctx.s_xk(b, k)? - ctx.s_xk(a, k)?)).abs());
            }
        }
    }
    outcome(worst < 1e-4, format!("worst |integral - increment| {worst:.2e} (< 1e-4)"))
}

fn simulation() -> Result<Outcome> {
    let hv = 0.75;
    let h = hurst(hv);
    let sim = PathSimulator::new(&h, &[0.2, 0.4, 0.6, 0.8, 1.0], PathMethod::DoubleSum, PathConfig::default())?;
    let ens = sim.simulate::<f64>(10_000, SeedSpec::new(1, 0))?;
    let cov = ens.covariance();
    let ts = &ens.times;
    let mut worst: f64 = 0.0;
    for i in 0..ts.len() {
        for j in 0..ts.len() {
            let th = 0.5 * (ts[i].powf(2.0 * hv) + ts[j].powf(2.0 * hv) - (ts[i] - ts[j]).abs().powf(2.0 * hv));
            worst = worst.max((cov[i][j] / th - 1.0).abs());
        }
    }
    let (skew, se) = skewness_jackknife(&ens.column(ts.len() - 1), 100);
    let z = (skew - kappa_r(&h, 3)?).abs() / se;
    outcome(worst < 0.05 && z < 3.0, format!("worst covariance error {:.2}% (< 5%), skewness {skew:.3} is {z:.2} SE from kappa3 (< 3)", 100.0 * worst))
}

fn skorohod() -> Result<Outcome> {
    let h = hurst(0.75);
    let t_end = 2.0;
    let xi = SmoothTestFunction::gaussian(1.0, 0.8, 0.3);
    let cases = [
        SkorohodIntegrand::Deterministic(TimeWeight { coeffs: vec![1.0, -0.3] }),
        SkorohodIntegrand::FirstChaos { space: SmoothTestFunction::gaussian(1.0, 0.6, 0.25), time: TimeWeight { coeffs: vec![0.5, 1.0] } },
    ];
    let mut worst: f64 = 0.0;
    for phi in &cases {
        worst = worst.max(skorohod_equality_check(phi, t_end, &xi, &h)?.residual);
    }
    let bump = SmoothTestFunction::gaussian(1.0, 1.0, 0.08);
    let gap = (s_x(t_end, &bump, &h)? - s_z(&h, &bump, t_end)?).abs();
    outcome(worst < 1e-5 && gap > 1e-3, format!("equality residual {worst:.2e} (< 1e-5), |s_X - s_Z| {gap:.2e} (> 1e-3)"))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("normalization of kappa2", normalization),
        ("power sums vs cyclic integrals", cyclic_identity),
        ("sum of squared eigenvalues", sum_of_squares),
        ("characteristic function", characteristic_function),
        ("translated characteristic function", translated_cf),
        ("Ito formula for x^2", || ito_poly(2, 1e-4)),
        ("Ito formula for x^3", || ito_poly(3, 1e-3)),
        ("Ito formula for band-limited F", ito_band_limited),
        ("variance identity", variance_identity),
        ("noise derivative integrates to increment", noise_derivative),
        ("path simulation moments", simulation),
        ("Skorohod equality and S(X) != S(Z)", skorohod),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run().unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
        let secs = start.elapsed().as_secs_f64();
        println!("{} {:>2} {name}: {} [{secs:.1} s]", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
