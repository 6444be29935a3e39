//! Cyclic integrals c_k = ∫_{[0,1]^k} |x_1−x_2|^{H−1}···|x_k−x_1|^{H−1} dx and the cumulants
//! κ_r = 2^{r−1}(r−1)! (H(2H−1)/2)^{r/2} c_r of X_1.
//!
//! Quadrature sorts the points: with gaps summing to a span S, the translation freedom gives a
//! factor (1−S) and homogeneity pulls out ∫_0^1 (1−S) S^{kH−2} dS = 1/((kH−1)kH), leaving an
//! integral over the (k−2)-simplex of gap proportions for each cyclic ordering.

use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::kernels::abspow::AbsPowOp;
use crate::kernels::{Estimate, Hurst};
use crate::numcore::grid::Sing;
use crate::numcore::quad::PowerRule;
use crate::numcore::rng::par_blocks;
use crate::numcore::special::beta_fn;
use crate::numcore::{Grid1D, Real, SeedSpec};

#[derive(Debug, Clone, Copy)]
pub enum CkMethod {
    /// Closed forms for k = 2, 3; errors otherwise.
    Closed,
    /// Deterministic quadrature, k ≤ 4.
    Quadrature,
    /// Sampling along the cycle with a standard error.
    MonteCarlo { samples: usize, seed: SeedSpec },
    /// Trace of the k-th power of the product-integration matrix on [0,1], from `intervals`
    /// and twice as many, Richardson-combined. Any k ≥ 2.
    Nystrom { intervals: usize },
}

/// c_2 = 1/(H(2H−1)).
pub fn c2_closed<T: Real>(h: &Hurst<T>) -> T {
    h.h2h1().recip()
}

/// c_3 = 2B(H,H)/(H(3H−1)).
pub fn c3_closed<T: Real>(h: &Hurst<T>) -> T {
    T::lit(2.0) * beta_fn(h.h, h.h).expect("H > 0") / (h.h * (T::lit(3.0) * h.h - T::one()))
}

/// Upper bound c_k ≤ (1/(H(2H−1)))^{k/2}.
pub fn c_k_bound<T: Real>(h: &Hurst<T>, k: usize) -> T {
    c2_closed(h).powf(T::from_usize_(k) * T::lit(0.5))
}

pub fn c_k<T: Real>(h: &Hurst<T>, k: usize, method: CkMethod) -> Result<Estimate<T>> {
    if k < 2 {
        return domain(format!("cyclic integral needs k ≥ 2, got {k}"));
    }
    match method {
        CkMethod::Closed => match k {
            2 => Ok(Estimate::exact(c2_closed(h))),
            3 => Ok(Estimate::exact(c3_closed(h))),
            _ => Err(Error::Unsupported(format!("no closed form for c_{k}"))),
        },
        CkMethod::Quadrature => c_k_quad(h, k).map(Estimate::exact),
        CkMethod::MonteCarlo { samples, seed } => c_k_mc(h, k, samples, seed),
        CkMethod::Nystrom { intervals } => {
            let p = power_sums_nystrom(h, k, intervals)?;
            Ok(Estimate { value: p.sums[k] / h.kappa.powi(k as i32), std_err: p.change[k] / h.kappa.powi(k as i32) })
        }
    }
}

/// ∑_n λ_n^k for k = 0..=kmax (entries below 2 are NaN) from collocation eigenvalues.
#[derive(Debug, Clone)]
pub struct NystromSums<T = f64> {
    pub sums: Vec<T>,
    /// |extrapolated − fine-grid value|, a size for the discretization error.
    pub change: Vec<T>,
}

/// Power sums ∑λ_n^k of T_1 through the eigenvalues of κ·(product-integration matrix), at m and
/// 2m intervals; the O(m^{−2}) error is removed by Richardson extrapolation.
pub fn power_sums_nystrom<T: Real>(h: &Hurst<T>, kmax: usize, m: usize) -> Result<NystromSums<T>> {
    if kmax < 2 {
        return domain(format!("power sums need k ≥ 2, got {kmax}"));
    }
    let kap = h.kappa.f64();
    let sums_at = |m: usize| -> Result<Vec<f64>> {
        let op = AbsPowOp::new(h, T::one(), m)?;
        let ev: Vec<num_complex::Complex<f64>> = op.eigenvalues().into_iter().map(|z| z * kap).collect();
        let mut out = vec![f64::NAN; kmax + 1];
        let mut pw: Vec<num_complex::Complex<f64>> = ev.iter().map(|z| z * z).collect();
        for (k, slot) in out.iter_mut().enumerate().skip(2) {
            if k > 2 {
                for (p, z) in pw.iter_mut().zip(&ev) {
                    *p *= z;
                }
            }
            *slot = pw.iter().map(|p| p.re).sum();
        }
        Ok(out)
    };
    let coarse = sums_at(m)?;
    let fine = sums_at(2 * m)?;
    let mut sums = vec![T::nan(); kmax + 1];
    let mut change = vec![T::nan(); kmax + 1];
    for k in 2..=kmax {
        let ex = (4.0 * fine[k] - coarse[k]) / 3.0;
        sums[k] = T::lit(ex);
        change[k] = T::lit((ex - fine[k]).abs());
    }
    Ok(NystromSums { sums, change })
}

/// Deterministic c_k for k ∈ {2, 3, 4}.
pub fn c_k_quad<T: Real>(h: &Hurst<T>, k: usize) -> Result<T> {
    let b = h.h - T::one();
    let rule = PowerRule::<T>::default();
    let one = T::one();
    match k {
        2 => {
            // direct ∫∫|x−y|^{2H−2}, inner rule singular at y = x
            let e = b + b + one;
            let outer = Grid1D::singular(T::zero(), one, &[Sing { at: T::zero(), gamma: e }, Sing { at: one, gamma: e }], &rule, T::lit(0.5))?;
            let mut s = T::zero();
            for (x, w) in outer.nodes.iter().zip(&outer.weights) {
                let x = *x;
                let f = |y: T| T::one() + T::zero() * y;
                let left = rule.integrate_weighted(f, T::zero(), x, b + b, crate::numcore::Endpoint::Hi)?;
                let right = rule.integrate_weighted(f, x, one, b + b, crate::numcore::Endpoint::Lo)?;
                s += *w * (left + right);
            }
            Ok(s)
        }
        3 => {
            let g = Grid1D::singular(T::zero(), one, &[Sing { at: T::zero(), gamma: b }, Sing { at: one, gamma: b }], &rule, T::lit(0.5))?;
            let v = g.integrate_fn(|u| u.powf(b) * (one - u).powf(b));
            Ok(T::lit(6.0) * v * radial(h, 3))
        }
        4 => {
            // gaps (p, q, r) = (u, (1−u)v, (1−u)(1−v)), Jacobian 1−u
            let gu = Grid1D::singular(
                T::zero(),
                one,
                &[Sing { at: T::zero(), gamma: b }, Sing { at: one, gamma: b + b + one }],
                &rule,
                T::lit(0.5),
            )?;
            let gv = Grid1D::singular(T::zero(), one, &[Sing { at: T::zero(), gamma: b }, Sing { at: one, gamma: b }], &rule, T::lit(0.5))?;
            let mut s = T::zero();
            for (u, wu) in gu.nodes.iter().zip(&gu.weights) {
                let (u, wu) = (*u, *wu);
                let jac = one - u;
                for (v, wv) in gv.nodes.iter().zip(&gv.weights) {
                    let p = u;
                    let q = (one - u) * *v;
                    let r = (one - u) * (one - *v);
                    let c1 = (p * q * r).powf(b);
                    let c2 = (p * (q + r) * r * (p + q)).powf(b);
                    let c3 = ((p + q) * q * (q + r)).powf(b);
                    s += wu * *wv * jac * (c1 + c2 + c3);
                }
            }
            Ok(T::lit(8.0) * s * radial(h, 4))
        }
        _ => Err(Error::Unsupported(format!("quadrature for c_{k}; use Monte Carlo"))),
    }
}

/// ∫_0^1 (1−S) S^{kH−2} dS.
fn radial<T: Real>(h: &Hurst<T>, k: usize) -> T {
    let kh = T::from_usize_(k) * h.h;
    ((kh - T::one()) * kh).recip()
}

/// c_k by sampling along the cycle: x_1 uniform, then x_{i+1} with density ∝ |x_i − x_{i+1}|^{H−1};
/// the estimator ∏Z(x_i)·|x_k − x_1|^{H−1} has finite variance for every H > 1/2.
pub fn c_k_mc<T: Real>(h: &Hurst<T>, k: usize, samples: usize, seed: SeedSpec) -> Result<Estimate<T>> {
    if k < 2 {
        return domain(format!("cyclic integral needs k ≥ 2, got {k}"));
    }
    if samples < 2 {
        return domain("need at least two samples");
    }
    let b = (h.h - T::one()).f64();
    let bp1 = b + 1.0;
    let block = 8192usize;
    let n_blocks = samples.div_ceil(block);
    let parts = par_blocks(seed, n_blocks, |bi, rng| {
        let n = block.min(samples - bi * block);
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for _ in 0..n {
            let x1: f64 = rng.random();
            let mut c = x1;
            let mut w = 1.0;
            for _ in 0..k - 1 {
                let l = c.powf(bp1);
                let r = (1.0 - c).powf(bp1);
                w *= (l + r) / bp1;
                let v: f64 = rng.random::<f64>() * (l + r);
                c = if v < l { c - v.powf(1.0 / bp1) } else { c + (v - l).powf(1.0 / bp1) };
            }
            w *= (c - x1).abs().powf(b);
            s1 += w;
            s2 += w * w;
        }
        (s1, s2, n)
    });
    let (mut s1, mut s2, mut n) = (0.0, 0.0, 0usize);
    for (a, b2, m) in parts {
        s1 += a;
        s2 += b2;
        n += m;
    }
    let nf = n as f64;
    let mean = s1 / nf;
    let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    Ok(Estimate { value: T::lit(mean), std_err: T::lit((var / nf).sqrt()) })
}

/// 2^{r−1}(r−1)!·κ^r, the factor turning c_r into κ_r.
pub fn cumulant_factor<T: Real>(h: &Hurst<T>, r: usize) -> T {
    let mut f = T::lit(2.0).powi(r as i32 - 1);
    for j in 1..r {
        f *= T::from_usize_(j);
    }
    f * h.kappa.powi(r as i32)
}

/// κ_r(X_1). r = 1 gives 0 (centred); r = 2, 3 closed form; r = 4 quadrature;
/// r ≥ 5 Monte Carlo with the given budget.
pub fn kappa_r<T: Real>(h: &Hurst<T>, r: usize) -> Result<T> {
    Ok(kappa_r_est(h, r, 400_000, SeedSpec::new(0x5eed, r as u64))?.value)
}

pub fn kappa_r_est<T: Real>(h: &Hurst<T>, r: usize, samples: usize, seed: SeedSpec) -> Result<Estimate<T>> {
    match r {
        0 => domain("cumulant order must be ≥ 1"),
        1 => Ok(Estimate::exact(T::zero())),
        2 | 3 => Ok(Estimate::exact(cumulant_factor(h, r) * c_k(h, r, CkMethod::Closed)?.value)),
        4 => Ok(Estimate::exact(cumulant_factor(h, r) * c_k_quad(h, 4)?)),
        _ => {
            let e = c_k_mc(h, r, samples, seed)?;
            let f = cumulant_factor(h, r);
            Ok(Estimate { value: f * e.value, std_err: f * e.std_err })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn c2_closed_and_quadrature() {
        let h = Hurst::new(0.75f64).unwrap();
        assert_relative_eq!(c2_closed(&h), 8.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(c_k_quad(&h, 2).unwrap(), 8.0 / 3.0, max_relative = 1e-9);
    }

    #[test]
    fn c3_quadrature_matches_closed_form() {
        for &hv in &[0.55, 0.75, 0.9] {
            let h = Hurst::new(hv).unwrap();
            assert_relative_eq!(c_k_quad(&h, 3).unwrap(), c3_closed(&h), max_relative = 1e-9);
        }
    }

    #[test]
    fn kappa2_is_one() {
        for i in 0..9 {
            let h = Hurst::new(0.55 + 0.05 * i as f64).unwrap();
            assert!((kappa_r(&h, 2).unwrap() - 1.0).abs() < 1e-12);
        }
        let h = Hurst::new(0.7f64).unwrap();
        assert_eq!(kappa_r(&h, 1).unwrap(), 0.0);
        assert!(kappa_r(&h, 0).is_err());
    }

    #[test]
    fn bound_and_positivity() {
        let h = Hurst::new(0.7f64).unwrap();
        for k in 2..=4 {
            let c = c_k_quad(&h, k).unwrap();
            assert!(c > 0.0 && c <= c_k_bound(&h, k), "k={k} c={c} bound={}", c_k_bound(&h, k));
        }
    }

    #[test]
    fn monte_carlo_within_three_sigma() {
        let h = Hurst::new(0.75f64).unwrap();
        let m = c_k_mc(&h, 3, 400_000, SeedSpec::new(3, 1)).unwrap();
        assert!((m.value - c3_closed(&h)).abs() < 3.0 * m.std_err, "{m:?}");
        let m4 = c_k_mc(&h, 4, 400_000, SeedSpec::new(3, 2)).unwrap();
        let q4 = c_k_quad(&h, 4).unwrap();
        assert!((m4.value - q4).abs() < 3.5 * m4.std_err, "{m4:?} vs {q4}");
    }

    #[test]
    fn nystrom_route_matches_deterministic_ones() {
        let h = Hurst::new(0.75f64).unwrap();
        let p = power_sums_nystrom(&h, 6, 200).unwrap();
        let k2 = h.kappa * h.kappa;
        // low orders converge slowly (many modes contribute); higher ones are dominated by λ_1
        assert!((p.sums[2] - 0.5).abs() < 2e-2);
        assert!((p.sums[3] / (k2 * h.kappa) / c3_closed(&h) - 1.0).abs() < 1e-4);
        assert!((p.sums[4] / (k2 * k2) / c_k_quad(&h, 4).unwrap() - 1.0).abs() < 1e-5);
        assert!(p.sums[5] < p.sums[4] && p.sums[6] < p.sums[5]);
    }

    #[test]
    fn unsupported_requests() {
        let h = Hurst::new(0.7f64).unwrap();
        assert!(matches!(c_k_quad(&h, 5), Err(Error::Unsupported(_))));
        assert!(matches!(c_k(&h, 4, CkMethod::Closed), Err(Error::Unsupported(_))));
        assert!(c_k(&h, 1, CkMethod::Quadrature).is_err());
    }
}

#[cfg(test)]
mod frozen {
    use super::*;

    // high-precision reference values, tanh-sinh on the same reduced integral
    #[test]
    fn c4_reference() {
        for &(hv, want) in &[(0.75f64, 5.447_269_530_817_538_f64), (0.6, 19.626_821_501_616_142)] {
            let got = c_k_quad(&Hurst::new(hv).unwrap(), 4).unwrap();
            assert!(((got - want) / want).abs() < 1e-7, "H={hv}: {got} vs {want}");
        }
    }
}
