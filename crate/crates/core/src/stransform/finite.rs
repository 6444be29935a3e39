//! The finite-interval representation Z_t of the Rosenblatt process, whose kernel carries the
//! extra factor (s/x)^{H/2} on x ∈ (0, t), and the Skorohod/Wick equality for it.
//!
//! S(Ż_t)(ξ) = c q(t)², q(t) = ∫_0^t (t/x)^{H/2}(t−x)^{H/2−1}ξ(x)dx
//!           = t^{H/2}∫_0^1 u^{−H/2}(1−u)^{H/2−1}ξ(tu)du.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::fracint::SmoothTestFunction;
use crate::kernels::Hurst;
use crate::numcore::grid::Sing;
use crate::numcore::quad::PowerRule;
use crate::numcore::{GaussLegendre, Grid1D, Real};

/// Polynomial weight w(t) = ∑ c_j t^j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TimeWeight<T = f64> {
    pub coeffs: Vec<T>,
}

impl<T: Real> TimeWeight<T> {
    pub fn constant(c: T) -> Self {
        TimeWeight { coeffs: vec![c] }
    }

    pub fn eval(&self, t: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * t + *c)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == T::zero())
    }
}

fn min_width<T: Real>(xi: &SmoothTestFunction<T>) -> T {
    xi.terms.iter().map(|a| a.width).fold(T::infinity(), T::min)
}

fn q_of<T: Real>(h: &Hurst<T>, xi: &SmoothTestFunction<T>, t: T) -> Result<T> {
    if xi.is_zero() || t <= T::zero() {
        return Ok(T::zero());
    }
    let al = h.alpha();
    let rule = PowerRule::<T>::default();
    let max_len = (min_width(xi) / (T::lit(2.0) * t)).min(T::lit(0.5));
    let g = Grid1D::singular(T::zero(), T::one(), &[Sing { at: T::zero(), gamma: -al }, Sing { at: T::one(), gamma: al - T::one() }], &rule, max_len)?;
    let s = g.integrate_fn(|u| u.powf(-al) * (T::one() - u).powf(al - T::one()) * xi.eval(t * u));
    Ok(t.powf(al) * s)
}

/// S(Ż_t)(ξ).
pub fn s_zdot<T: Real>(h: &Hurst<T>, xi: &SmoothTestFunction<T>, t: T) -> Result<T> {
    if t < T::zero() {
        return domain(format!("t must be ≥ 0, got {t}"));
    }
    let q = q_of(h, xi, t)?;
    Ok(h.c * q * q)
}

/// Rule for ∫_0^t with panels no wider than half the narrowest atom, graded at 0.
fn zero_grid<T: Real>(xi: &SmoothTestFunction<T>, t: T) -> Result<Grid1D<T>> {
    let rule = PowerRule::<T>::default();
    let ml = (min_width(xi) * T::lit(0.5)).min(t * T::lit(0.25));
    Grid1D::singular(T::zero(), t, &[Sing { at: T::zero(), gamma: T::zero() }], &rule, ml)
}

/// S(Z_t)(ξ) = ∫_0^t S(Ż_s)(ξ) ds.
pub fn s_z<T: Real>(h: &Hurst<T>, xi: &SmoothTestFunction<T>, t: T) -> Result<T> {
    if t < T::zero() {
        return domain(format!("t must be ≥ 0, got {t}"));
    }
    if xi.is_zero() || t == T::zero() {
        return Ok(T::zero());
    }
    let g = zero_grid(xi, t)?;
    let mut s = T::zero();
    for (x, w) in g.nodes.iter().zip(&g.weights) {
        s += *w * s_zdot(h, xi, *x)?;
    }
    Ok(s)
}

/// Integrand φ_t of ∫_0^T φ_t δZ_t.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub enum SkorohodIntegrand<T = f64> {
    /// φ_t = w(t).
    Deterministic(TimeWeight<T>),
    /// φ_t = I_1(w(t) η), so E^{μ_ξ}[φ_t] = w(t)<η, ξ>.
    FirstChaos { space: SmoothTestFunction<T>, time: TimeWeight<T> },
}

impl<T: Real> SkorohodIntegrand<T> {
    /// ψ(t) = S(φ_t)(ξ) as a polynomial in t.
    fn psi(&self, xi: &SmoothTestFunction<T>) -> TimeWeight<T> {
        match self {
            SkorohodIntegrand::Deterministic(w) => w.clone(),
            SkorohodIntegrand::FirstChaos { space, time } => {
                let ip = space.dot(xi);
                TimeWeight { coeffs: time.coeffs.iter().map(|c| *c * ip).collect() }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(bound = "T: Real")]
pub struct SkorohodResidual<T = f64> {
    /// S of the double Skorohod integral, integrated in (x1, x2) first-outermost order.
    pub skorohod: T,
    /// ∫_0^T S(φ_t) S(Ż_t) dt.
    pub wick: T,
    pub residual: T,
}

/// Compares S(δ²(kernel transform of φ))(ξ), computed as ∫∫ξ(x1)ξ(x2)U(x1,x2)dx1dx2 with
/// U = c∫_{x1∨x2}^T ψ(s)(s²/(x1x2))^{H/2}(s−x1)^{H/2−1}(s−x2)^{H/2−1}ds, against the Wick side
/// ∫_0^T ψ(t) S(Ż_t)(ξ) dt.
pub fn skorohod_equality_check<T: Real>(phi: &SkorohodIntegrand<T>, t_end: T, xi: &SmoothTestFunction<T>, h: &Hurst<T>) -> Result<SkorohodResidual<T>> {
    if !(t_end > T::zero()) {
        return domain(format!("T must be positive, got {t_end}"));
    }
    let psi = phi.psi(xi);
    let zero = SkorohodResidual { skorohod: T::zero(), wick: T::zero(), residual: T::zero() };
    if psi.is_zero() || xi.is_zero() {
        return Ok(zero);
    }
    let g = zero_grid(xi, t_end)?;
    let mut wick = T::zero();
    for (t, w) in g.nodes.iter().zip(&g.weights) {
        wick += *w * psi.eval(*t) * s_zdot(h, xi, *t)?;
    }
    let sk = skorohod_side(h, xi, t_end, &psi)?;
    Ok(SkorohodResidual { skorohod: sk, wick, residual: (sk - wick).abs() })
}

fn skorohod_side<T: Real>(h: &Hurst<T>, xi: &SmoothTestFunction<T>, t_end: T, psi: &TimeWeight<T>) -> Result<T> {
    let Some((lo, hi)) = xi.support() else { return Ok(T::zero()) };
    let lo = lo.max(T::zero());
    let hi = hi.min(t_end);
    if hi <= lo {
        return Ok(T::zero());
    }
    let al = h.alpha();
    let a = h.a();
    let rule = PowerRule::<T>::default();
    let near = PowerRule::<T>::new(12, 0.3, 10);
    let gl = GaussLegendre::<T>::new(12);
    let ml = min_width(xi) * T::lit(0.5);
    let lo_gamma = if lo == T::zero() { -al } else { T::zero() };
    let outer = Grid1D::singular(lo, hi, &[Sing { at: lo, gamma: T::zero() }], &rule, ml)?;
    // ∫_0^q ψ(x1+v)(x1+v)^H v^a (v+δ)^a dv
    let u_int = |x1: T, delta: T| -> T {
        let q = t_end - x1;
        if q <= T::zero() {
            return T::zero();
        }
        let sm = |v: T| psi.eval(x1 + v) * (x1 + v).powf(h.h) * (v + delta).powf(a);
        let first = delta.min(q);
        let mut s = near.integrate_weighted(&sm, T::zero(), first, a, crate::numcore::Endpoint::Lo).unwrap_or(T::zero());
        let mut start = first;
        while start < q {
            let end = (start * T::lit(2.0)).min(q).max(start + delta);
            let end = end.min(q);
            s += gl.integrate(start, end, |v| sm(v) * v.powf(a));
            start = end;
        }
        s
    };
    let rows: Vec<T> = outer
        .nodes
        .par_iter()
        .zip(outer.weights.par_iter())
        .map(|(x1, w1)| {
            let x1 = *x1;
            let xv = xi.eval(x1);
            if xv == T::zero() || x1 <= lo {
                return Ok(T::zero());
            }
            let inner = Grid1D::singular(lo, x1, &[Sing { at: lo, gamma: lo_gamma }, Sing { at: x1, gamma: h.h - T::one() }], &rule, ml)?;
            let mut s = T::zero();
            for (x2, w2) in inner.nodes.iter().zip(&inner.weights) {
                let yv = xi.eval(*x2);
                if yv != T::zero() {
                    s += *w2 * yv * (x1 * *x2).powf(-al) * u_int(x1, x1 - *x2);
                }
            }
            Ok(*w1 * xv * s)
        })
        .collect::<Result<_>>()?;
    let total: T = rows.into_iter().sum();
    Ok(T::lit(2.0) * h.c * total)
}
