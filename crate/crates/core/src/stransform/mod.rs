//! S-transforms of X_t, of its noise and of the chained processes X^{H,k}, Wick integrals,
//! and residuals of the Itô formulas written at the level of S-transforms.
//!
//! With g = I_+^{H/2}ξ:
//! S(X_t) = d∫_0^t g², S(Ẋ_t) = d g(t)², and
//! S(X^{H,k}_t) = dκ^{k−1} t^{H(k−1)+1} ∫∫_{[0,1]²} g(tu)g(tv) K_1^{k−2}(u,v) du dv = ‖T_t^{k/2}ξ‖².
//! The double integrals use the product-integration operator on [0,1], so t ↦ S(X^{H,k}_t) is
//! smooth and its derivative is differentiated exactly.

mod bandlimited;
mod finite;
mod ito;

use crate::error::{domain, Error, Result};
use crate::fracint::{SmoothTestFunction, Weyl, WeylInterp};
use crate::kernels::abspow::AbsPowOp;
use crate::kernels::Hurst;
use crate::numcore::special::beta_fn;
use crate::numcore::{gamma_fn, Grid1D, Real};

pub use bandlimited::{ito_residual_pw, s_f, BandLimitedF, PwResidual};
pub use finite::{s_z, s_zdot, skorohod_equality_check, SkorohodIntegrand, SkorohodResidual, TimeWeight};
pub use ito::{ito_residual_poly, ItoResidual};

/// Everything that depends on (H, ξ) and not on t: the Weyl interpolant on [0, t_max] and
/// the product-integration operator on [0, 1].
#[derive(Debug, Clone)]
pub struct SContext<T = f64> {
    pub h: Hurst<T>,
    pub xi: SmoothTestFunction<T>,
    pub t_max: T,
    wi: Option<WeylInterp<T>>,
    op: AbsPowOp<T>,
}

impl<T: Real> SContext<T> {
    pub fn new(h: &Hurst<T>, xi: &SmoothTestFunction<T>, t_max: T) -> Result<Self> {
        Self::with_intervals(h, xi, t_max, 400)
    }

    pub fn with_intervals(h: &Hurst<T>, xi: &SmoothTestFunction<T>, t_max: T, intervals: usize) -> Result<Self> {
        if !(t_max > T::zero()) {
            return domain(format!("t_max must be positive, got {t_max}"));
        }
        let wi = if xi.is_zero() { None } else { Some(WeylInterp::new(xi, h.alpha(), T::zero(), t_max)?) };
        Ok(SContext { h: *h, xi: xi.clone(), t_max, wi, op: AbsPowOp::new(h, T::one(), intervals)? })
    }

    fn check_t(&self, t: T) -> Result<()> {
        if t < T::zero() || t > self.t_max * (T::one() + T::lit(1e-12)) {
            return domain(format!("t = {t} outside [0, {}]", self.t_max));
        }
        Ok(())
    }

    /// I_+^{H/2}ξ(s).
    pub fn g(&self, s: T) -> T {
        self.wi.as_ref().map_or(T::zero(), |w| w.value(s))
    }

    pub fn dg(&self, s: T) -> T {
        self.wi.as_ref().map_or(T::zero(), |w| w.deriv(s))
    }

    /// S(X_t)(ξ) = d ∫_0^t g².
    pub fn s_x(&self, t: T) -> Result<T> {
        self.check_t(t)?;
        if self.wi.is_none() || t == T::zero() {
            return Ok(T::zero());
        }
        let minw = self.xi.terms.iter().map(|a| a.width).fold(T::infinity(), T::min);
        let n = (t / (minw * T::lit(0.5))).ceil().to_usize().unwrap_or(1).max(2);
        let grid = Grid1D::gauss_legendre(T::zero(), t, n, 16)?;
        Ok(self.h.d * grid.integrate_fn(|s| {
            let v = self.g(s);
            v * v
        }))
    }

    /// S(Ẋ_t)(ξ) = d g(t)².
    pub fn s_xdot(&self, t: T) -> Result<T> {
        self.check_t(t)?;
        let v = self.g(t);
        Ok(self.h.d * v * v)
    }

    fn scaled(&self, t: T) -> (Vec<T>, Vec<T>) {
        let g = self.op.sample(|u| self.g(t * u));
        let dg = self.op.sample(|u| u * self.dg(t * u));
        (g, dg)
    }

    /// S(X^{H,k}_t)(ξ) for k = 2..=kmax (index k; entry 1 holds S(X_t), entry 0 is zero).
    pub fn s_xk_all(&self, t: T, kmax: usize) -> Result<Vec<T>> {
        Ok(self.xk_pair(t, kmax, false)?.0)
    }

    /// Values and time derivatives of S(X^{H,k}_t), k = 1..=kmax.
    pub fn s_xk_dot_all(&self, t: T, kmax: usize) -> Result<(Vec<T>, Vec<T>)> {
        self.xk_pair(t, kmax, true)
    }

    fn xk_pair(&self, t: T, kmax: usize, want_dot: bool) -> Result<(Vec<T>, Vec<T>)> {
        self.check_t(t)?;
        let mut val = vec![T::zero(); kmax + 1];
        let mut dot = vec![T::zero(); kmax + 1];
        if kmax == 0 || self.wi.is_none() || t == T::zero() {
            return Ok((val, dot));
        }
        val[1] = self.s_x(t)?;
        dot[1] = self.s_xdot(t)?;
        let (g, dg) = self.scaled(t);
        let h = &self.h;
        let mut x = g.clone();
        let mut y = dg.clone();
        let mut kp = h.d;
        for k in 2..=kmax {
            x = self.op.apply(&x);
            kp *= h.kappa;
            let e = h.h * T::from_usize_(k - 1) + T::one();
            let form = self.op.dot(&g, &x);
            val[k] = kp * t.powf(e) * form;
            if want_dot {
                y = self.op.apply(&y);
                // d/dt of g(tu) is u g'(tu); the operator is symmetric up to discretization,
                // so both orders are kept
                let cross = self.op.dot(&dg, &x) + self.op.dot(&g, &y);
                dot[k] = kp * (e * t.powf(e - T::one()) * form + t.powf(e) * cross);
            }
        }
        Ok((val, dot))
    }

    pub fn s_xk(&self, t: T, k: usize) -> Result<T> {
        if k < 2 {
            return domain(format!("k must be ≥ 2, got {k}"));
        }
        Ok(self.s_xk_all(t, k)?[k])
    }

    pub fn s_xk_dot(&self, t: T, k: usize) -> Result<T> {
        if k < 2 {
            return domain(format!("k must be ≥ 2, got {k}"));
        }
        if !(t > T::zero()) {
            return domain(format!("t must be positive, got {t}"));
        }
        Ok(self.s_xk_dot_all(t, k)?.1[k])
    }

    /// S(X_t²) = S(X_t)² + 4 S(X^{H,2}_t) + t^{2H}.
    pub fn s_square(&self, t: T) -> Result<T> {
        let v = self.s_xk_all(t, 2)?;
        Ok(v[1] * v[1] + T::lit(4.0) * v[2] + t.powf(T::lit(2.0) * self.h.h))
    }

    /// S(X_t³) = m³ + 3m(t^{2H} + 4N_2) + 24N_3 + κ_3 t^{3H} with m = S(X_t), N_k = S(X^{H,k}_t).
    pub fn s_cube(&self, t: T, kappa3: T) -> Result<T> {
        let v = self.s_xk_all(t, 3)?;
        let m = v[1];
        let t2 = t.powf(T::lit(2.0) * self.h.h);
        Ok(m * m * m + T::lit(3.0) * m * (t2 + T::lit(4.0) * v[2]) + T::lit(24.0) * v[3] + kappa3 * t.powf(T::lit(3.0) * self.h.h))
    }
}

/// Hurst values of the default verification panel.
pub const DEFAULT_H_PANEL: [f64; 3] = [0.6, 0.75, 0.9];

/// Three test functions of varied center and width used by the Itô checks.
pub fn default_xi_panel<T: Real>() -> Vec<SmoothTestFunction<T>> {
    let l = T::lit;
    vec![
        SmoothTestFunction::gaussian(l(1.0), l(0.3), l(0.2)),
        SmoothTestFunction::gaussian(l(0.8), l(0.7), l(0.1)).with(l(-0.4), l(0.75), l(0.15), 1),
        SmoothTestFunction::gaussian(l(-0.6), l(0.5), l(0.3)).with(l(0.5), l(0.2), l(0.1), 2),
    ]
}

/// Noise in a Wick integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    X,
    Z,
}

/// ∫_a^b φ(t) S(noise_t)(ξ) dt for a scalar S-transform evaluator φ.
pub fn s_wick_integral<T: Real, F: Fn(T) -> T>(ctx: &SContext<T>, phi: F, a: T, b: T, noise: Noise) -> Result<T> {
    if a > b {
        return domain(format!("need a ≤ b, got ({a}, {b})"));
    }
    if a == b || ctx.xi.is_zero() {
        return Ok(T::zero());
    }
    let grid = time_grid(a, b)?;
    let mut s = T::zero();
    for (t, w) in grid.nodes.iter().zip(&grid.weights) {
        let p = phi(*t);
        if !p.is_finite() {
            return Err(Error::Integrability(format!("integrand is not finite at t = {t}")));
        }
        let n = match noise {
            Noise::X => ctx.s_xdot(*t)?,
            Noise::Z => s_zdot(&ctx.h, &ctx.xi, *t)?,
        };
        s += *w * p * n;
    }
    Ok(s)
}

/// Gauss-Legendre rule for t-integrals over [a, b]; graded toward 0 when a = 0.
pub(crate) fn time_grid<T: Real>(a: T, b: T) -> Result<Grid1D<T>> {
    if a == T::zero() {
        let rule = crate::numcore::quad::PowerRule::<T>::default();
        return Grid1D::singular(a, b, &[crate::numcore::grid::Sing { at: a, gamma: T::zero() }], &rule, (b - a) * T::lit(0.25));
    }
    Grid1D::gauss_legendre(a, b, 8, 16)
}

/// S(Ẏ_t)(ξ) for the Hermite process of order `order`: c(H,order) Γ(H₀)^order (I_+^{H₀}ξ(t))^order,
/// H₀ = 1/2 + (H−1)/order, c² = H(2H−1)/(order!·B(H₀, 1−2H₀)^order).
pub fn s_hermite_dot<T: Real>(t: T, xi: &SmoothTestFunction<T>, h: &Hurst<T>, order: u32) -> Result<T> {
    if order == 0 {
        return domain("Hermite order must be ≥ 1");
    }
    let q = T::from_usize_(order as usize);
    let h0 = T::lit(0.5) + (h.h - T::one()) / q;
    let mut fact = T::one();
    for j in 1..=order {
        fact *= T::from_usize_(j as usize);
    }
    let c2 = h.h2h1() / (fact * beta_fn(h0, T::one() - T::lit(2.0) * h0)?.powi(order as i32));
    let v = Weyl::new(h0)?.eval(xi, t);
    Ok(c2.sqrt() * (gamma_fn(h0)? * v).powi(order as i32))
}

/// Shorthands building a context for one call.
pub fn s_x<T: Real>(t: T, xi: &SmoothTestFunction<T>, h: &Hurst<T>) -> Result<T> {
    SContext::new(h, xi, t.max(T::min_positive_value()))?.s_x(t)
}

pub fn s_xdot<T: Real>(t: T, xi: &SmoothTestFunction<T>, h: &Hurst<T>) -> Result<T> {
    let v = Weyl::new(h.alpha())?.eval(xi, t);
    Ok(h.d * v * v)
}

pub fn s_xk<T: Real>(t: T, xi: &SmoothTestFunction<T>, h: &Hurst<T>, k: usize) -> Result<T> {
    SContext::new(h, xi, t.max(T::min_positive_value()))?.s_xk(t, k)
}

pub fn s_xk_dot<T: Real>(t: T, xi: &SmoothTestFunction<T>, h: &Hurst<T>, k: usize) -> Result<T> {
    SContext::new(h, xi, t.max(T::min_positive_value()))?.s_xk_dot(t, k)
}
