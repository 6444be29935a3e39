//! The Rosenblatt kernel f_t, the chained kernels K_t^k, contractions and the operator T_t.
//!
//! f_t(x1,x2) = c ∫_{max(x1,x2,0)}^t (s−x1)^{H/2−1}(s−x2)^{H/2−1} ds, which is the same as
//! d/Γ(H/2)² times that integral. It is evaluated in the variable v = s − max(x1,x2), where the
//! integrand is v^a (v+δ)^a with δ = |x1 − x2|.

pub mod abspow;
mod chain;
mod grid;
mod hurst;

use crate::error::{domain, Result};
use crate::fracint::{SmoothTestFunction, Weyl};
use crate::numcore::quad::{Endpoint, GaussLegendre, PowerRule};
use crate::numcore::special::{beta_fn, inc_beta};
use crate::numcore::{Grid1D, Real};
use crate::numcore::grid::Sing;

pub use chain::{k_chain, k_chain_mc, k_chain_quad, Estimate, KChainMethod};
pub use grid::{apply_t, contract1, KernelGrid};
pub use hurst::{make_hurst, Hurst};

/// Reusable evaluator for f_t (holds its quadrature rules).
#[derive(Debug, Clone)]
pub struct FKernel<T = f64> {
    pub h: Hurst<T>,
    sing: PowerRule<T>,
    gl: GaussLegendre<T>,
}

impl<T: Real> FKernel<T> {
    pub fn new(h: Hurst<T>) -> Self {
        FKernel { h, sing: PowerRule::new(7, 0.3, 8), gl: GaussLegendre::new(12) }
    }

    /// f_t(x1, x2); +∞ on the diagonal inside [0, t), 0 when max(x1,x2) ≥ t.
    pub fn eval(&self, t: T, x1: T, x2: T) -> T {
        let (m, n) = if x1 >= x2 { (x1, x2) } else { (x2, x1) };
        if m >= t {
            return T::zero();
        }
        let delta = m - n;
        if delta == T::zero() && m >= T::zero() {
            return T::infinity();
        }
        if m < T::zero() {
            // both arguments left of 0: work in s directly so far-away points keep their precision
            let a = self.h.a();
            let mut s = T::zero();
            let mut start = T::zero();
            while start < t {
                let end = (start + (start - m)).min(t);
                s += self.gl.integrate(start, end, |u| (u - x1).powf(a) * (u - x2).powf(a));
                start = end;
            }
            return self.h.c * s;
        }
        self.h.c * self.pair_integral(delta, t - m)
    }

    /// ∫_0^q v^a (v+δ)^a dv: power rule on [0, δ], doubling panels beyond.
    fn pair_integral(&self, delta: T, q: T) -> T {
        let a = self.h.a();
        let e = delta.min(q);
        let mut s = self
            .sing
            .integrate_weighted(|v| (v + delta).powf(a), T::zero(), e, a, Endpoint::Lo)
            .unwrap_or(T::nan());
        let mut start = e;
        let two = T::lit(2.0);
        while start < q {
            let end = (start * two).min(q);
            s += self.gl.integrate(start, end, |v| v.powf(a) * (v + delta).powf(a));
            start = end;
        }
        s
    }
}

/// f_t(x1, x2) by singularity-aware quadrature.
pub fn f_kernel<T: Real>(h: &Hurst<T>, t: T, x1: T, x2: T) -> Result<T> {
    if !(t > T::zero()) {
        return domain(format!("time must be positive, got {t}"));
    }
    Ok(FKernel::new(*h).eval(t, x1, x2))
}

/// Closed form through the incomplete beta function:
/// f = c δ^{H−1} [B(z_t; H/2, 1−H) − B(z_lo; H/2, 1−H)], z_s = (s − max)/(s − min).
/// Independent of the quadrature route; used as an oracle.
pub fn f_kernel_closed<T: Real>(h: &Hurst<T>, t: T, x1: T, x2: T) -> Result<T> {
    if !(t > T::zero()) {
        return domain(format!("time must be positive, got {t}"));
    }
    let (m, n) = if x1 >= x2 { (x1, x2) } else { (x2, x1) };
    if m >= t {
        return Ok(T::zero());
    }
    let delta = m - n;
    let lo = m.max(T::zero());
    if delta == T::zero() {
        if m >= T::zero() {
            return Ok(T::infinity());
        }
        // ∫_lo^t (s−m)^{H−2} ds
        let e = h.h - T::one();
        return Ok(h.c * ((t - m).powf(e) - (lo - m).powf(e)) / e);
    }
    let (pa, pb) = (h.alpha(), T::one() - h.h);
    let b = beta_fn(pa, pb)?;
    let z1 = (t - m) / (t - n);
    let z0 = (lo - m) / (lo - n);
    Ok(h.c * delta.powf(h.h - T::one()) * b * (inc_beta(z1, pa, pb)? - inc_beta(z0, pa, pb)?))
}

/// ‖f_t‖²_{L²(ℝ²)} by nested singular quadrature over the whole plane (mapped tails, no cut-off).
pub fn kernel_l2_norm_sq<T: Real>(h: &Hurst<T>, t: T) -> Result<T> {
    if !(t > T::zero()) {
        return domain(format!("time must be positive, got {t}"));
    }
    let fk = FKernel::new(*h);
    let rule = PowerRule::<T>::new(8, 0.3, 8);
    let one = T::one();
    let hh = h.h;
    // outer x1 on (−∞, t): inner mass decays like |x1|^{2H−3}
    let q_out = one / (T::lit(2.0) - T::lit(2.0) * hh);
    let tail = Grid1D::left_tail(-t, t, q_out, 16, 8)?;
    let core = Grid1D::singular(
        -t,
        t,
        &[Sing { at: T::zero(), gamma: T::zero() }, Sing { at: t, gamma: T::zero() }],
        &rule,
        t * T::lit(0.25),
    )?;
    let outer = Grid1D::concat(&[tail, core])?;
    let q_in = one / (one - hh);
    let mut total = T::zero();
    for (x1, w1) in outer.nodes.iter().zip(&outer.weights) {
        let x1 = *x1;
        // relative spans keep far-left outer nodes resolvable
        let ell = if x1 < T::zero() { x1 + x1 - t } else { -t };
        let scale = ell.abs().max(t);
        let itail = Grid1D::left_tail(ell, scale, q_in, 16, 8)?;
        let mut sing = vec![Sing { at: x1, gamma: if x1 >= T::zero() { T::lit(2.0) * hh - T::lit(2.0) } else { T::zero() } }];
        if x1 > T::zero() {
            sing.push(Sing { at: T::zero(), gamma: T::zero() });
        }
        let icore = Grid1D::singular(ell, x1, &sing, &rule, ((x1 - ell) * T::lit(0.25)).max(t * T::lit(0.25)))?;
        let mut inner = T::zero();
        for g in [&itail, &icore] {
            for (x2, w2) in g.nodes.iter().zip(&g.weights) {
                let f = fk.eval(t, x1, *x2);
                inner += *w2 * f * f;
            }
        }
        total += *w1 * inner;
    }
    Ok(T::lit(2.0) * total)
}

/// <f_t, ξ⊗ξ> = d ∫_0^t (I_+^{H/2}ξ(s))² ds (Weyl route).
pub fn inner_f_xi2<T: Real>(h: &Hurst<T>, t: T, xi: &SmoothTestFunction<T>) -> Result<T> {
    if !(t > T::zero()) {
        return domain(format!("time must be positive, got {t}"));
    }
    if xi.is_zero() {
        return Ok(T::zero());
    }
    let w = Weyl::new(h.alpha())?;
    let minw = xi.terms.iter().map(|a| a.width).fold(T::infinity(), T::min);
    let n = (t / (minw * T::lit(0.5))).ceil().to_usize().unwrap_or(1).max(2);
    let g = Grid1D::gauss_legendre(T::zero(), t, n, 16)?;
    Ok(h.d * g.integrate_fn(|s| {
        let v = w.eval(xi, s);
        v * v
    }))
}

/// <f_t, ξ⊗ξ> by the 2-D cell-grid route.
pub fn inner_f_xi2_grid<T: Real>(kg: &KernelGrid<T>, xi: &SmoothTestFunction<T>) -> T {
    let v = kg.grid.cell_averages(|x| xi.eval(x));
    kg.quad_form(&v)
}

/// (T_t ξ)(y) = c Γ(H/2) ∫_0^t (s−y)_+^{H/2−1} I_+^{H/2}ξ(s) ds, pointwise.
pub fn apply_t_pointwise<T: Real>(h: &Hurst<T>, t: T, xi: &SmoothTestFunction<T>, y: T) -> Result<T> {
    if !(t > T::zero()) {
        return domain(format!("time must be positive, got {t}"));
    }
    if y >= t || xi.is_zero() {
        return Ok(T::zero());
    }
    let w = Weyl::new(h.alpha())?;
    let lo = y.max(T::zero());
    let rule = PowerRule::<T>::default();
    let sing = if y >= T::zero() { h.a() } else { T::zero() };
    let g = Grid1D::singular(lo, t, &[Sing { at: lo, gamma: sing }], &rule, (t - lo) * T::lit(0.25))?;
    let v = g.integrate_fn(|s| (s - y).powf(h.a()) * w.eval(xi, s));
    Ok(h.c * h.gamma_half * v)
}
