//! Characteristic functions of X_t, plain and under the measure shifted by ξ.
//!
//! log E e^{iθX_t} = ½∑_{k≥2} (2iθt^H)^k/k · ∑_n λ_n^k, the series converging for
//! √2|θ|t^H < 1. The product form ∏(1−2iλ_nt^Hθ)^{−1/2}e^{−iλ_nt^Hθ} holds for all θ.
//! Under the shift, log E^{μ_ξ} e^{iθX_t} gains iθ<f_t,ξ⊗ξ> + ½∑_{k≥2}(2iθ)^k ‖T_t^{k/2}ξ‖²,
//! whose product form is −2θ²∑ β_n²μ_n²/(1−2iμ_nθ) with μ_n = λ_n t^H.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fracint::{SmoothTestFunction, WeylInterp};
use crate::kernels::abspow::AbsPowOp;
use crate::kernels::{inner_f_xi2, Hurst};
use crate::moments::{c3_closed, c_k_quad, power_sums_nystrom};
use crate::numcore::Real;
use crate::spectral::{project_xi, Spectrum};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CFSeriesConfig {
    pub kmax: usize,
    /// Refuse θ outside 0.95 of the convergence radius.
    pub domain_check: bool,
}

impl Default for CFSeriesConfig {
    fn default() -> Self {
        CFSeriesConfig { kmax: 200, domain_check: true }
    }
}

/// p_k = ∑_n λ_n^k = κ^k c_k for k = 2..=kmax, and how each was obtained.
#[derive(Debug, Clone)]
pub struct CumulantTable<T = f64> {
    pub h: Hurst<T>,
    pub p: Vec<T>,
    pub route: Vec<&'static str>,
}

impl<T: Real> CumulantTable<T> {
    /// Closed forms for k = 2, 3, quadrature for k = 4, extrapolated Nyström traces beyond.
    pub fn new(h: &Hurst<T>, kmax: usize) -> Result<Self> {
        if kmax < 2 {
            return domain(format!("kmax must be ≥ 2, got {kmax}"));
        }
        let mut p = vec![T::nan(); kmax + 1];
        let mut route = vec![""; kmax + 1];
        p[2] = T::lit(0.5);
        route[2] = "closed";
        if kmax >= 3 {
            p[3] = h.kappa.powi(3) * c3_closed(h);
            route[3] = "closed";
        }
        if kmax >= 4 {
            p[4] = h.kappa.powi(4) * c_k_quad(h, 4)?;
            route[4] = "quadrature";
        }
        if kmax >= 5 {
            let ny = power_sums_nystrom(h, kmax, 400)?;
            for k in 5..=kmax {
                p[k] = ny.sums[k];
                route[k] = "nystrom";
            }
        }
        Ok(CumulantTable { h: *h, p, route })
    }

    pub fn kmax(&self) -> usize {
        self.p.len() - 1
    }

    /// κ_r(X_1) = 2^{r−1}(r−1)! p_r.
    pub fn kappa(&self, r: usize) -> T {
        match r {
            1 => T::zero(),
            _ => {
                let mut f = T::lit(2.0).powi(r as i32 - 1);
                for j in 1..r {
                    f *= T::from_usize_(j);
                }
                f * self.p[r]
            }
        }
    }
}

/// A truncated series with a bound on what was dropped.
#[derive(Debug, Clone, Copy)]
pub struct SeriesValue<T = f64> {
    pub value: Complex<T>,
    pub tail_bound: T,
}

fn radius_check<T: Real>(theta: T, t: T, h: T, cfg: &CFSeriesConfig) -> Result<T> {
    let rho = T::SQRT_2() * theta.abs() * t.powf(h);
    if cfg.domain_check && rho >= T::lit(0.95) || rho >= T::one() {
        return Err(Error::Convergence(format!("√2|θ|t^H = {rho} is outside the series radius (guard 0.95)")));
    }
    Ok(rho)
}

/// ½∑_{k=2}^{kmax} (2iθt^H)^k p_k / k; the tail bound uses p_k ≤ 2^{−k/2}.
pub fn logcf_series<T: Real>(theta: T, t: T, table: &CumulantTable<T>, cfg: &CFSeriesConfig) -> Result<SeriesValue<T>> {
    if !(t > T::zero()) {
        return domain(format!("t must be positive, got {t}"));
    }
    let rho = radius_check(theta, t, table.h.h, cfg)?;
    let kmax = cfg.kmax.min(table.kmax());
    if kmax < 2 {
        return domain("kmax must be ≥ 2");
    }
    let z = Complex::new(T::zero(), T::lit(2.0) * theta * t.powf(table.h.h));
    let mut zk = z;
    let mut s = Complex::new(T::zero(), T::zero());
    for k in 2..=kmax {
        zk *= z;
        s += zk * (table.p[k] / T::from_usize_(k));
    }
    let k1 = T::from_usize_(kmax + 1);
    let tail = rho.powi(kmax as i32 + 1) / (T::lit(2.0) * k1 * (T::one() - rho));
    Ok(SeriesValue { value: s * T::lit(0.5), tail_bound: tail })
}

pub fn cf_series<T: Real>(theta: T, t: T, table: &CumulantTable<T>, cfg: &CFSeriesConfig) -> Result<SeriesValue<T>> {
    let l = logcf_series(theta, t, table, cfg)?;
    Ok(SeriesValue { value: l.value.exp(), tail_bound: l.tail_bound })
}

/// Eigenvalue product for the plain characteristic function, with the modes cached.
#[derive(Debug, Clone)]
pub struct EigProduct<T = f64> {
    pub h: T,
    pub lambdas: Vec<T>,
    /// ½ − ∑ λ_n² over the modes used.
    pub r2: T,
    /// ∑_{n>modes} λ_n^k from the asymptotic law, k = 3..=8 (index k−3).
    pub far: Vec<T>,
}

impl<T: Real> EigProduct<T> {
    /// `modes` eigenvalues: the trusted computed ones, then the asymptotic law.
    pub fn new(spec: &Spectrum<T>, modes: usize) -> Self {
        let modes = modes.max(spec.n_trusted());
        let lambdas = spec.extended_lambdas(modes);
        let sq: T = lambdas.iter().map(|l| *l * *l).sum();
        let far = (3..=8u32).map(|k| spec.tail.tail_sum(k, modes).unwrap_or(T::zero())).collect();
        EigProduct { h: spec.h.h, lambdas, r2: (T::lit(0.5) - sq).max(T::zero()), far }
    }

    pub fn log_cf(&self, theta: T, t: T) -> Complex<T> {
        let th = t.powf(self.h);
        let one = Complex::new(T::one(), T::zero());
        let mut s = Complex::new(T::zero(), T::zero());
        for l in &self.lambdas {
            let mu = *l * th;
            let z = Complex::new(T::zero(), T::lit(2.0) * mu * theta);
            s = s - (one - z).ln() * T::lit(0.5) - Complex::new(T::zero(), mu * theta);
        }
        // dropped modes: exact second cumulant, a few more orders from the asymptotic law
        s -= Complex::new(theta * theta * th * th * self.r2, T::zero());
        let z = Complex::new(T::zero(), T::lit(2.0) * theta * th);
        let mut zk = z * z;
        for (i, f) in self.far.iter().enumerate() {
            zk *= z;
            s += zk * (*f * T::lit(0.5) / T::from_usize_(i + 3));
        }
        s
    }

    pub fn cf(&self, theta: T, t: T) -> Complex<T> {
        self.log_cf(theta, t).exp()
    }
}

/// CF by the product over 20000 modes.
pub fn cf_eigprod<T: Real>(theta: T, t: T, spec: &Spectrum<T>) -> Complex<T> {
    EigProduct::new(spec, 20_000).cf(theta, t)
}

/// Empirical CF with the standard errors of its real and imaginary parts.
pub fn empirical_cf<T: Real>(samples: &[T], theta: T) -> (Complex<T>, T, T) {
    let n = samples.len() as f64;
    let th = theta.f64();
    let (mut c, mut s, mut c2, mut s2) = (0.0, 0.0, 0.0, 0.0);
    for x in samples {
        let (si, co) = (th * x.f64()).sin_cos();
        c += co;
        s += si;
        c2 += co * co;
        s2 += si * si;
    }
    let (mc, ms) = (c / n, s / n);
    let se_c = ((c2 / n - mc * mc) / n).max(0.0).sqrt();
    let se_s = ((s2 / n - ms * ms) / n).max(0.0).sqrt();
    (Complex::new(T::lit(mc), T::lit(ms)), T::lit(se_c), T::lit(se_s))
}

/// Route for ‖T_t^{k/2} ξ‖².
#[derive(Debug, Clone, Copy)]
pub enum TkRoute<'a, T = f64> {
    /// ∑ (λ_n t^H)^k β_n².
    Eigen(&'a Spectrum<T>),
    /// d κ^{k−1} ∫∫ g(s)g(r) K^{(k−1)}(s,r) with g = I_+^{H/2}ξ on [0,t], product integration.
    Contraction { intervals: usize },
}

/// N_j = <ξ, T_t^j ξ> for j = 1..=kmax by the contraction route (index 0 unused).
pub fn tk_all<T: Real>(h: &Hurst<T>, xi: &SmoothTestFunction<T>, t: T, kmax: usize, intervals: usize) -> Result<Vec<T>> {
    let mut out = vec![T::zero(); kmax + 1];
    if xi.is_zero() {
        return Ok(out);
    }
    let op = AbsPowOp::new(h, t, intervals)?;
    let wi = WeylInterp::new(xi, h.alpha(), T::zero(), t)?;
    let g = op.sample(|s| wi.value(s));
    out[1] = h.d * op.dot(&g, &g);
    let mut x = g.clone();
    let mut kp = h.d;
    for slot in out.iter_mut().skip(2) {
        x = op.apply(&x);
        kp *= h.kappa;
        *slot = kp * op.dot(&g, &x);
    }
    Ok(out)
}

/// ‖T_t^{k/2}ξ‖² for even k ≥ 2.
pub fn tk_norm<T: Real>(h: &Hurst<T>, xi: &SmoothTestFunction<T>, t: T, k: usize, route: TkRoute<'_, T>) -> Result<T> {
    if k < 2 || k % 2 == 1 {
        return domain(format!("k must be even and ≥ 2, got {k}"));
    }
    if !(t > T::zero()) {
        return domain(format!("t must be positive, got {t}"));
    }
    match route {
        TkRoute::Eigen(spec) => {
            let b = project_xi(spec, t, xi)?;
            let th = t.powf(spec.h.h);
            Ok(spec.lambdas.iter().zip(&b).map(|(l, b)| (*l * th).powi(k as i32) * *b * *b).sum())
        }
        TkRoute::Contraction { intervals } => Ok(tk_all(h, xi, t, k, intervals)?[k]),
    }
}

/// t^{Hk} κ^k √c_{2k} ‖ξ‖², with c_{2k} = p_{2k}/κ^{2k} from the table.
pub fn tk_bound<T: Real>(table: &CumulantTable<T>, xi: &SmoothTestFunction<T>, t: T, k: usize) -> T {
    let h = &table.h;
    t.powf(h.h * T::from_usize_(k)) * table.p[2 * k].sqrt() * xi.l2_norm_sq()
}

/// Both forms of the shifted characteristic function at one time t, with the ξ-dependent pieces cached.
#[derive(Debug, Clone)]
pub struct TranslatedCf<T = f64> {
    pub t: T,
    /// <f_t, ξ⊗ξ>.
    pub mean: T,
    pub mu: Vec<T>,
    pub beta: Vec<T>,
    /// N_k = ‖T_t^{k/2}ξ‖², k = 1..=kmax.
    pub tk: Vec<T>,
    pub plain: EigProduct<T>,
}

/// Value of the shifted CF by both routes (series is None outside the radius).
#[derive(Debug, Clone, Copy)]
pub struct TranslatedValue<T = f64> {
    pub product: Complex<T>,
    pub series: Option<Complex<T>>,
}

impl<T: Real> TranslatedCf<T> {
    pub fn new(t: T, xi: &SmoothTestFunction<T>, spec: &Spectrum<T>, kmax: usize) -> Result<Self> {
        Self::with_modes(t, xi, spec, kmax, 20_000)
    }

    /// As [`TranslatedCf::new`] with `modes` eigenvalues in the ξ-free product.
    pub fn with_modes(t: T, xi: &SmoothTestFunction<T>, spec: &Spectrum<T>, kmax: usize, modes: usize) -> Result<Self> {
        if !(t > T::zero()) {
            return domain(format!("t must be positive, got {t}"));
        }
        let h = &spec.h;
        let th = t.powf(h.h);
        let beta = project_xi(spec, t, xi)?;
        let mu = spec.lambdas.iter().map(|l| *l * th).collect();
        let mean = inner_f_xi2(h, t, xi)?;
        let tk = tk_all(h, xi, t, kmax.max(2), 400)?;
        Ok(TranslatedCf { t, mean, mu, beta, tk, plain: EigProduct::new(spec, modes) })
    }

    /// log of the ξ-dependent factor by the product route.
    pub fn log_shift_product(&self, theta: T) -> Complex<T> {
        let one = Complex::new(T::one(), T::zero());
        let mut s = Complex::new(T::zero(), T::zero());
        for (m, b) in self.mu.iter().zip(&self.beta) {
            let den = one - Complex::new(T::zero(), T::lit(2.0) * *m * theta);
            s += one / den * (*b * *b * *m * *m);
        }
        Complex::new(T::zero(), theta * self.mean) - s * (T::lit(2.0) * theta * theta)
    }

    /// log of the ξ-dependent factor by the series ½∑(2iθ)^k N_k.
    pub fn log_shift_series(&self, theta: T) -> Complex<T> {
        let z = Complex::new(T::zero(), T::lit(2.0) * theta);
        let mut zk = z;
        let mut s = Complex::new(T::zero(), T::zero());
        for k in 2..self.tk.len() {
            zk *= z;
            s += zk * self.tk[k];
        }
        Complex::new(T::zero(), theta * self.mean) + s * T::lit(0.5)
    }

    pub fn product(&self, theta: T) -> Complex<T> {
        (self.plain.log_cf(theta, self.t) + self.log_shift_product(theta)).exp()
    }

    pub fn eval(&self, theta: T, table: &CumulantTable<T>, cfg: &CFSeriesConfig) -> TranslatedValue<T> {
        let product = self.product(theta);
        let series = logcf_series(theta, self.t, table, cfg).ok().map(|l| (l.value + self.log_shift_series(theta)).exp());
        TranslatedValue { product, series }
    }
}

/// One-shot shifted CF by both routes.
pub fn translated_cf<T: Real>(theta: T, t: T, xi: &SmoothTestFunction<T>, spec: &Spectrum<T>, table: &CumulantTable<T>) -> Result<TranslatedValue<T>> {
    let cfg = CFSeriesConfig { kmax: table.kmax(), domain_check: true };
    Ok(TranslatedCf::new(t, xi, spec, table.kmax())?.eval(theta, table, &cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{nystrom_eig, SpectrumConfig};

    fn setup(h: f64) -> (Hurst, Spectrum) {
        let h = Hurst::new(h).unwrap();
        let sp = nystrom_eig(&h, SpectrumConfig { cells: 200, n_keep: 100 }).unwrap();
        (h, sp)
    }

    #[test]
    fn values_at_zero_and_symmetry() {
        let (h, sp) = setup(0.7);
        let tab = CumulantTable::new(&h, 4).unwrap();
        let cfg = CFSeriesConfig::default();
        assert_eq!(logcf_series(0.0, 1.0, &tab, &cfg).unwrap().value, Complex::new(0.0, 0.0));
        let ep = EigProduct::new(&sp, 2000);
        assert!((ep.cf(0.0, 1.3) - Complex::new(1.0, 0.0)).norm() < 1e-15);
        for th in [-10.0, -3.0, -0.4, 0.7, 2.5, 10.0] {
            let a = ep.cf(th, 1.0);
            assert!(a.norm() <= 1.0);
            let b = ep.cf(-th, 1.0);
            assert!((a - b.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn radius_guard() {
        let (h, _) = setup(0.75);
        let tab = CumulantTable::new(&h, 4).unwrap();
        let cfg = CFSeriesConfig::default();
        assert!(matches!(logcf_series(0.7, 1.0, &tab, &cfg), Err(Error::Convergence(_))));
        assert!(logcf_series(0.6, 1.0, &tab, &cfg).is_ok());
        let loose = CFSeriesConfig { domain_check: false, ..cfg };
        assert!(logcf_series(0.69, 1.0, &tab, &loose).is_ok());
        assert!(logcf_series(0.35, 2.0f64.powf(1.0 / 0.75) * 1.1, &tab, &cfg).is_err());
    }

    #[test]
    fn variance_from_second_derivative() {
        let (h, _) = setup(0.65);
        let tab = CumulantTable::new(&h, 4).unwrap();
        let cfg = CFSeriesConfig::default();
        let t: f64 = 1.7;
        let e = 1e-3;
        let f = |th: f64| cf_series(th, t, &tab, &cfg).unwrap().value;
        let d2 = (f(e) - f(0.0) * 2.0 + f(-e)) / (e * e);
        assert!((-d2.re - t.powf(2.0 * 0.65)).abs() < 1e-5);
    }

    #[test]
    fn small_theta_routes_agree() {
        let (h, sp) = setup(0.75);
        let tab = CumulantTable::new(&h, 4).unwrap();
        let cfg = CFSeriesConfig { kmax: 4, domain_check: true };
        let ep = EigProduct::new(&sp, 20_000);
        for th in [0.01, 0.05, -0.08] {
            let s = cf_series(th, 1.0, &tab, &cfg).unwrap();
            assert!((s.value - ep.cf(th, 1.0)).norm() < 1e-6 + s.tail_bound);
        }
    }

    #[test]
    fn tk_routes_and_bound() {
        let (h, sp) = setup(0.75);
        let xi = SmoothTestFunction::gaussian(1.0, 0.4, 0.3);
        for k in [2, 4] {
            let a = tk_norm(&h, &xi, 1.0, k, TkRoute::Eigen(&sp)).unwrap();
            let b = tk_norm(&h, &xi, 1.0, k, TkRoute::Contraction { intervals: 200 }).unwrap();
            assert!((a / b - 1.0).abs() < 1e-3, "k={k}: {a} vs {b}");
        }
        assert!(tk_norm(&h, &xi, 1.0, 3, TkRoute::Eigen(&sp)).is_err());
        assert_eq!(tk_norm(&h, &SmoothTestFunction::zero(), 1.0, 2, TkRoute::Contraction { intervals: 50 }).unwrap(), 0.0);
        let tab = CumulantTable::new(&h, 4).unwrap();
        let v = tk_norm(&h, &xi, 1.0, 2, TkRoute::Eigen(&sp)).unwrap();
        assert!(v <= tk_bound(&tab, &xi, 1.0, 2));
    }

    #[test]
    fn translated_reduces_and_is_centred() {
        let (h, sp) = setup(0.75);
        let tab = CumulantTable::new(&h, 4).unwrap();
        let zero = TranslatedCf::new(1.0, &SmoothTestFunction::zero(), &sp, 4).unwrap();
        let ep = EigProduct::new(&sp, 20_000);
        for th in [0.3, -1.2, 4.0] {
            assert!((zero.product(th) - ep.cf(th, 1.0)).norm() < 1e-14);
        }
        let xi = SmoothTestFunction::gaussian(0.8, 0.2, 0.4);
        let tc = TranslatedCf::new(1.0, &xi, &sp, 4).unwrap();
        assert!((tc.product(0.0) - Complex::new(1.0, 0.0)).norm() < 1e-15);
        let cfg = CFSeriesConfig { kmax: 4, domain_check: true };
        let v = tc.eval(0.0, &tab, &cfg);
        assert!((v.series.unwrap() - Complex::new(1.0, 0.0)).norm() < 1e-15);
        let e = 1e-5;
        let d = (tc.product(e) - tc.product(-e)) / (2.0 * e);
        assert!((d.im - tc.mean).abs() < 1e-6 && d.re.abs() < 1e-6);
    }

    #[test]
    fn empirical_cf_of_constant() {
        let (c, sr, si) = empirical_cf(&[0.5f64; 10], 2.0);
        assert!((c - Complex::new(1.0f64.cos(), 1.0f64.sin())).norm() < 1e-15);
        assert!(sr < 1e-7 && si < 1e-7);
    }
}
