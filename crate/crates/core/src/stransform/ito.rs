//! Residuals of the polynomial Itô formulas, all terms as S-transforms at ξ.

use serde::Serialize;

use super::{time_grid, SContext};
use crate::error::{domain, Result};
use crate::numcore::Real;

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(bound = "T: Real")]
pub struct ItoResidual<T = f64> {
    pub degree: u32,
    pub lhs: T,
    /// Right side with ∫_a^b dX^{H,k} as the integral of its time derivative.
    pub rhs_integral: T,
    /// Right side with ∫_a^b dX^{H,k} as the difference of endpoint values.
    pub rhs_difference: T,
    /// Largest of the two absolute gaps.
    pub residual: T,
    /// `residual` over max(|lhs|, 1e-300).
    pub relative: T,
}

/// Degree 2: X_b² − X_a² = 2∫X dX + b^{2H} − a^{2H} + 4∫dX^{H,2}.
/// Degree 3: X_b³ − X_a³ = 3∫X² dX + 6H∫t^{2H−1}X_t dt + 12∫X dX^{H,2} + 24∫dX^{H,3} + κ_3(b^{3H} − a^{3H}).
pub fn ito_residual_poly<T: Real>(ctx: &SContext<T>, degree: u32, a: T, b: T, kappa3: T) -> Result<ItoResidual<T>> {
    if !(a > T::zero()) || a > b {
        return domain(format!("need 0 < a ≤ b, got ({a}, {b})"));
    }
    if degree != 2 && degree != 3 {
        return domain(format!("degree must be 2 or 3, got {degree}"));
    }
    let h = ctx.h.h;
    let two_h = T::lit(2.0) * h;
    let three_h = T::lit(3.0) * h;
    let zero = ItoResidual { degree, lhs: T::zero(), rhs_integral: T::zero(), rhs_difference: T::zero(), residual: T::zero(), relative: T::zero() };
    if a == b {
        return Ok(zero);
    }
    let grid = time_grid(a, b)?;
    let k = degree as usize;
    let (va, _) = ctx.s_xk_dot_all(a, k)?;
    let (vb, _) = ctx.s_xk_dot_all(b, k)?;
    // ∫ of the pieces that need interior times
    let (mut wick1, mut drift, mut mid, mut dk) = (T::zero(), T::zero(), T::zero(), T::zero());
    for (t, w) in grid.nodes.iter().zip(&grid.weights) {
        let (t, w) = (*t, *w);
        let (v, d) = ctx.s_xk_dot_all(t, k)?;
        let m = v[1];
        let mdot = d[1];
        if degree == 2 {
            wick1 += w * m * mdot;
            dk += w * d[2];
        } else {
            let sq = m * m + T::lit(4.0) * v[2] + t.powf(two_h);
            wick1 += w * sq * mdot;
            drift += w * t.powf(two_h - T::one()) * m;
            mid += w * m * d[2];
            dk += w * d[3];
        }
    }
    let (lhs, rhs_i, rhs_d) = if degree == 2 {
        let sq = |v: &[T], t: T| v[1] * v[1] + T::lit(4.0) * v[2] + t.powf(two_h);
        let lhs = sq(&vb, b) - sq(&va, a);
        let base = T::lit(2.0) * wick1 + (b.powf(two_h) - a.powf(two_h));
        (lhs, base + T::lit(4.0) * dk, base + T::lit(4.0) * (vb[2] - va[2]))
    } else {
        let k3 = kappa3;
        let cube = |v: &[T], t: T| {
            let m = v[1];
            m * m * m + T::lit(3.0) * m * (t.powf(two_h) + T::lit(4.0) * v[2]) + T::lit(24.0) * v[3]
        };
        // the κ_3 terms are written the same way on both sides so they cancel exactly
        let lhs = cube(&vb, b) + k3 * b.powf(three_h) - (cube(&va, a) + k3 * a.powf(three_h));
        let base = T::lit(3.0) * wick1 + T::lit(6.0) * h * drift + T::lit(12.0) * mid;
        let kb = k3 * b.powf(three_h) - k3 * a.powf(three_h);
        (lhs, base + T::lit(24.0) * dk + kb, base + T::lit(24.0) * (vb[3] - va[3]) + kb)
    };
    let residual = (lhs - rhs_i).abs().max((lhs - rhs_d).abs());
    Ok(ItoResidual { degree, lhs, rhs_integral: rhs_i, rhs_difference: rhs_d, residual, relative: residual / lhs.abs().max(T::lit(1e-300)) })
}
