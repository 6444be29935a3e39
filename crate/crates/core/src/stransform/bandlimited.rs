//! Functions F with compactly supported Fourier transform, and the Itô residual for F(X_t).
//!
//! S(F^{(j)}(X_t))(ξ) = (1/2π)∫ F̂(θ)(iθ)^j E^{μ_ξ}[e^{iθX_t}] dθ. Differentiating the shifted
//! characteristic function in t gives
//! F(X_b) − F(X_a) = ∫F′(X_t)⋄Ẋ_t dt + ∑_{k≥2} ( Hκ_k/(k−1)! ∫t^{Hk−1}F^{(k)}(X_t)dt + 2^{k−1}∫F^{(k)}(X_t)⋄Ẋ^{H,k}_t dt ).

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::{time_grid, SContext};
use crate::charfn::{CumulantTable, TranslatedCf};
use crate::error::{domain, Result};
use crate::numcore::{Grid1D, Real};
use crate::spectral::Spectrum;

/// F̂ sampled on a Gauss-Legendre rule over [−θ_max, θ_max].
#[derive(Debug, Clone)]
pub struct BandLimitedF<T = f64> {
    pub theta_max: T,
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> BandLimitedF<T> {
    pub fn from_fn<F: Fn(T) -> Complex<T>>(theta_max: T, f: F, panels: usize) -> Result<Self> {
        if !(theta_max > T::zero()) {
            return domain(format!("θ_max must be positive, got {theta_max}"));
        }
        Self::from_fn_on(-theta_max, theta_max, f, panels)
    }

    /// F̂ supported in [lo, hi].
    pub fn from_fn_on<F: Fn(T) -> Complex<T>>(lo: T, hi: T, f: F, panels: usize) -> Result<Self> {
        if !(hi > lo) {
            return domain(format!("empty support [{lo}, {hi}]"));
        }
        let g = Grid1D::gauss_legendre(lo, hi, panels.max(1), 16)?;
        let values = g.nodes.iter().map(|t| f(*t)).collect();
        Ok(BandLimitedF { theta_max: lo.abs().max(hi.abs()), nodes: g.nodes, weights: g.weights, values })
    }

    /// F̂(θ) = e^{−θ²/2σ²} cos(ωθ) · exp(1 − 1/(1−(θ/θ_max)²)); even and real, so F is real.
    pub fn gaussian_windowed(theta_max: T, sigma: T, omega: T) -> Result<Self> {
        Self::from_fn(
            theta_max,
            |th| {
                let u = th / theta_max;
                let bump = if u.abs() < T::one() { (T::one() - (T::one() - u * u).recip()).exp() } else { T::zero() };
                Complex::new((-(th * th) / (T::lit(2.0) * sigma * sigma)).exp() * (omega * th).cos() * bump, T::zero())
            },
            8,
        )
    }

    /// 2π times a unit-mass bump of half-width `width` at θ₀, so F(x) ≈ e^{iθ₀x}.
    pub fn narrow_bump(theta0: T, width: T) -> Result<Self> {
        // mass of exp(1 − 1/(1−u²)) on [−1, 1]
        let mass = {
            let g = Grid1D::gauss_legendre(-T::one(), T::one(), 8, 16)?;
            g.integrate_fn(|u| if u.abs() < T::one() { (T::one() - (T::one() - u * u).recip()).exp() } else { T::zero() })
        };
        Self::from_fn_on(
            theta0 - width,
            theta0 + width,
            |th| {
                let u = (th - theta0) / width;
                let b = if u.abs() < T::one() { (T::one() - (T::one() - u * u).recip()).exp() } else { T::zero() };
                Complex::new(T::lit(2.0) * T::PI() * b / (mass * width), T::zero())
            },
            16,
        )
    }

    pub fn zero(theta_max: T) -> Result<Self> {
        Self::from_fn(theta_max, |_| Complex::new(T::zero(), T::zero()), 1)
    }

    /// θ_max < 1/(√2 b^H), strictly.
    pub fn check_support(&self, b: T, h: T) -> Result<()> {
        let lim = (T::SQRT_2() * b.powf(h)).recip();
        if self.theta_max >= lim {
            return domain(format!("θ_max = {} must be below 1/(√2 b^H) = {lim}", self.theta_max));
        }
        Ok(())
    }

    /// F^{(j)}(x) = (1/2π)∫ F̂(θ)(iθ)^j e^{iθx} dθ.
    pub fn eval(&self, x: T, j: u32) -> Complex<T> {
        let mut s = Complex::new(T::zero(), T::zero());
        for ((th, w), v) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let e = Complex::new(T::zero(), *th * x).exp();
            s += *v * e * Complex::new(T::zero(), *th).powi(j as i32) * *w;
        }
        s / (T::lit(2.0) * T::PI())
    }

    /// (1/2π)∫ F̂(θ)(iθ)^j Φ(θ) dθ for a characteristic function sampled at the nodes.
    fn pair(&self, phi: &[Complex<T>], j: u32) -> Complex<T> {
        let mut s = Complex::new(T::zero(), T::zero());
        for (((th, w), v), p) in self.nodes.iter().zip(&self.weights).zip(&self.values).zip(phi) {
            s += *v * *p * Complex::new(T::zero(), *th).powi(j as i32) * *w;
        }
        s / (T::lit(2.0) * T::PI())
    }

    fn sample_cf(&self, tc: &TranslatedCf<T>) -> Vec<Complex<T>> {
        self.nodes.iter().map(|th| tc.product(*th)).collect()
    }
}

/// S(F^{(j)}(X_t))(ξ) through the product form of the shifted characteristic function.
pub fn s_f<T: Real>(fhat: &BandLimitedF<T>, j: u32, t: T, xi: &crate::fracint::SmoothTestFunction<T>, spec: &Spectrum<T>) -> Result<Complex<T>> {
    fhat.check_support(t, spec.h.h)?;
    let tc = TranslatedCf::new(t, xi, spec, 2)?;
    Ok(fhat.pair(&fhat.sample_cf(&tc), j))
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Real")]
pub struct PwResidual<T = f64> {
    pub kmax: usize,
    pub lhs: [T; 2],
    pub rhs: [T; 2],
    pub residual: T,
    /// Geometric bound on the dropped k > kmax terms.
    pub tail_bound: T,
    /// |∫ term_k| for k = 1..=kmax (index 0 unused).
    pub term_size: Vec<T>,
    /// Residual with the sum stopped at K, for K = 1..=kmax (index 0 unused).
    pub residual_by_k: Vec<T>,
}

/// Residual of the Itô formula for band-limited F on [a, b], k-sum truncated at kmax.
pub fn ito_residual_pw<T: Real>(
    ctx: &SContext<T>,
    fhat: &BandLimitedF<T>,
    a: T,
    b: T,
    kmax: usize,
    spec: &Spectrum<T>,
    table: &CumulantTable<T>,
) -> Result<PwResidual<T>> {
    if !(a > T::zero()) || a > b {
        return domain(format!("need 0 < a ≤ b, got ({a}, {b})"));
    }
    if kmax < 2 || kmax > table.kmax() {
        return domain(format!("kmax must be in 2..={}, got {kmax}", table.kmax()));
    }
    fhat.check_support(b, ctx.h.h)?;
    let hh = ctx.h.h;
    let sf_at = |t: T| -> Result<Vec<Complex<T>>> {
        let tc = TranslatedCf::with_modes(t, &ctx.xi, spec, 2, 4000)?;
        let phi = fhat.sample_cf(&tc);
        Ok((0..=kmax as u32).map(|j| fhat.pair(&phi, j)).collect())
    };
    let lhs = sf_at(b)?[0] - sf_at(a)?[0];
    let zero = Complex::new(T::zero(), T::zero());
    let mut terms = vec![zero; kmax + 1];
    let mut mags = vec![T::zero(); kmax + 1];
    if a < b {
        let grid = time_grid(a, b)?;
        let per_node: Vec<(Vec<Complex<T>>, Vec<T>)> = grid
            .nodes
            .par_iter()
            .map(|t| {
                let t = *t;
                let sf = sf_at(t)?;
                let (_, nd) = ctx.s_xk_dot_all(t, kmax)?;
                let mut c = vec![T::zero(); kmax + 1];
                c[1] = nd[1];
                let mut pow2 = T::one();
                for k in 2..=kmax {
                    pow2 *= T::lit(2.0);
                    c[k] = hh * pow2 * table.p[k] * t.powf(hh * T::from_usize_(k) - T::one()) + pow2 * nd[k];
                }
                Ok((sf, c))
            })
            .collect::<Result<_>>()?;
        for ((sf, c), w) in per_node.iter().zip(&grid.weights) {
            for k in 1..=kmax {
                terms[k] += sf[k] * (*w * c[k]);
                mags[k] += *w * (sf[k] * c[k]).norm();
            }
        }
    }
    let mut rhs = zero;
    let mut by_k = vec![T::zero(); kmax + 1];
    for k in 1..=kmax {
        rhs += terms[k];
        by_k[k] = (lhs - rhs).norm();
    }
    // odd and even orders decay on separate tracks, so the empirical ratio compares k with k − 2
    let rho = T::SQRT_2() * fhat.theta_max * b.powf(hh);
    let step = |k: usize| if k >= 3 && mags[k - 2] > T::zero() { (mags[k] / mags[k - 2]).sqrt() } else { T::zero() };
    let ratio = rho.max(step(kmax)).max(step(kmax - 1));
    let last = mags[kmax].max(mags[kmax - 1]);
    let tail_bound = if ratio < T::one() { last * ratio / (T::one() - ratio) } else { T::infinity() };
    Ok(PwResidual {
        kmax,
        lhs: [lhs.re, lhs.im],
        rhs: [rhs.re, rhs.im],
        residual: (lhs - rhs).norm(),
        tail_bound,
        term_size: mags,
        residual_by_k: by_k,
    })
}
