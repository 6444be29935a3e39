//! K_t^k(s,r) = ∫_{[0,t]^k} |s−u_1|^{H−1}|u_1−u_2|^{H−1}···|u_k−r|^{H−1} du.

use rand::Rng;
use serde::Serialize;

use super::Hurst;
use crate::error::{domain, Error, Result};
use crate::numcore::grid::Sing;
use crate::numcore::quad::PowerRule;
use crate::numcore::rng::par_blocks;
use crate::numcore::{Grid1D, Real, SeedSpec};

/// A value with its Monte Carlo standard error (0 for deterministic routes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate<T = f64> {
    pub value: T,
    pub std_err: T,
}

impl<T: Real> Estimate<T> {
    pub fn exact(value: T) -> Self {
        Estimate { value, std_err: T::zero() }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum KChainMethod {
    /// Nested singular quadrature (k ≤ 3).
    Quadrature,
    /// Sampling along the chain: each u_i is drawn with density ∝ |u_{i−1} − u_i|^{H−1}.
    MonteCarlo { samples: usize, seed: SeedSpec },
}

fn check<T: Real>(t: T, s: T, r: T) -> Result<()> {
    if !(t > T::zero()) {
        return domain(format!("time must be positive, got {t}"));
    }
    if s < T::zero() || s > t || r < T::zero() || r > t {
        return domain(format!("chain endpoints must lie in [0, t], got ({s}, {r})"));
    }
    Ok(())
}

/// K_t^k(s, r) with the chosen method for k ≥ 2 (k = 0 closed form, k = 1 quadrature).
pub fn k_chain<T: Real>(h: &Hurst<T>, k: usize, t: T, s: T, r: T, method: KChainMethod) -> Result<Estimate<T>> {
    check(t, s, r)?;
    match (k, method) {
        (0 | 1, _) | (_, KChainMethod::Quadrature) => Ok(Estimate::exact(k_chain_quad(h, k, t, s, r)?)),
        (_, KChainMethod::MonteCarlo { samples, seed }) => k_chain_mc(h, k, t, s, r, samples, seed),
    }
}

/// Deterministic K_t^k for k ≤ 3.
pub fn k_chain_quad<T: Real>(h: &Hurst<T>, k: usize, t: T, s: T, r: T) -> Result<T> {
    check(t, s, r)?;
    let b = h.h - T::one();
    if k == 0 {
        if s == r {
            return domain("K^0 is singular on the diagonal");
        }
        return Ok((s - r).abs().powf(b));
    }
    if k > 3 {
        return Err(Error::Unsupported(format!("quadrature for K^{k}; use Monte Carlo")));
    }
    let fine = PowerRule::<T>::default();
    let light = PowerRule::<T>::new(8, 0.3, 8);
    Ok(nested(b, k, t, s, r, &fine, &light))
}

fn nested<T: Real>(b: T, k: usize, t: T, s: T, r: T, fine: &PowerRule<T>, light: &PowerRule<T>) -> T {
    let q = t * T::lit(0.25);
    if k == 1 {
        let pts = if s == r {
            vec![Sing { at: s, gamma: b + b }]
        } else {
            vec![Sing { at: s, gamma: b }, Sing { at: r, gamma: b }]
        };
        let g = Grid1D::singular(T::zero(), t, &pts, fine, q).expect("valid chain grid");
        return g.integrate_fn(|u| (s - u).abs().powf(b) * (r - u).abs().powf(b));
    }
    let pts = [Sing { at: r, gamma: b }, Sing { at: s, gamma: T::zero() }];
    let g = Grid1D::singular(T::zero(), t, &pts, light, q).expect("valid chain grid");
    g.integrate_fn(|u| nested(b, k - 1, t, s, u, light, light) * (u - r).abs().powf(b))
}

/// Monte Carlo K_t^k with standard error; sampling along the chain keeps the variance finite.
pub fn k_chain_mc<T: Real>(h: &Hurst<T>, k: usize, t: T, s: T, r: T, samples: usize, seed: SeedSpec) -> Result<Estimate<T>> {
    check(t, s, r)?;
    if samples < 2 {
        return domain("need at least two samples");
    }
    let b = (h.h - T::one()).f64();
    let (tt, s0, r0) = (t.f64(), s.f64(), r.f64());
    let bp1 = b + 1.0;
    let block = 4096usize;
    let n_blocks = samples.div_ceil(block);
    let sums = par_blocks(seed, n_blocks, |bi, rng| {
        let n = block.min(samples - bi * block);
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for _ in 0..n {
            let mut c = s0;
            let mut w = 1.0;
            for _ in 0..k {
                let l = c.powf(bp1);
                let rr = (tt - c).powf(bp1);
                w *= (l + rr) / bp1;
                let v: f64 = rng.random::<f64>() * (l + rr);
                c = if v < l { c - v.powf(1.0 / bp1) } else { c + (v - l).powf(1.0 / bp1) };
            }
            w *= (c - r0).abs().powf(b);
            s1 += w;
            s2 += w * w;
        }
        (s1, s2, n)
    });
    let (mut s1, mut s2, mut n) = (0.0, 0.0, 0usize);
    for (a, b2, m) in sums {
        s1 += a;
        s2 += b2;
        n += m;
    }
    let nf = n as f64;
    let mean = s1 / nf;
    let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    Ok(Estimate { value: T::lit(mean), std_err: T::lit((var / nf).sqrt()) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn k0_closed_form_and_scaling() {
        let h = Hurst::new(0.75f64).unwrap();
        assert_eq!(k_chain_quad(&h, 0, 1.0, 1.0, 0.0).unwrap(), 1.0);
        let t = 3.0;
        let lhs = k_chain_quad(&h, 0, t, t * 0.2, t * 0.9).unwrap();
        let rhs = t.powf(h.h - 1.0) * k_chain_quad(&h, 0, 1.0, 0.2, 0.9).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-14);
        assert!(k_chain_quad(&h, 0, 1.0, 0.4, 0.4).is_err());
    }

    #[test]
    fn k1_reference() {
        // mesh-refinement reference (arbitrary precision)
        let h = Hurst::new(0.75f64).unwrap();
        let v = k_chain_quad(&h, 1, 1.0, 0.3, 0.7).unwrap();
        assert_relative_eq!(v, 2.345_070_266_044_756, max_relative = 1e-9);
    }

    #[test]
    fn k1_on_diagonal_is_finite() {
        let h = Hurst::new(0.75f64).unwrap();
        // ∫_0^1 |s−u|^{2H−2} du = (s^{2H−1} + (1−s)^{2H−1})/(2H−1)
        let s: f64 = 0.3;
        let want = (s.powf(0.5) + (1.0 - s).powf(0.5)) / 0.5;
        assert_relative_eq!(k_chain_quad(&h, 1, 1.0, s, s).unwrap(), want, max_relative = 1e-9);
    }

    #[test]
    fn monte_carlo_agrees_with_quadrature() {
        let h = Hurst::new(0.7f64).unwrap();
        let seed = SeedSpec::new(5, 0);
        for k in 1..=2 {
            let q = k_chain_quad(&h, k, 1.0, 0.25, 0.6).unwrap();
            let m = k_chain_mc(&h, k, 1.0, 0.25, 0.6, 200_000, seed).unwrap();
            assert!((m.value - q).abs() < 4.0 * m.std_err, "k={k} q={q} mc={:?}", m);
        }
    }

    #[test]
    fn domain_checks() {
        let h = Hurst::new(0.7f64).unwrap();
        assert!(k_chain_quad(&h, 1, 1.0, -0.1, 0.5).is_err());
        assert!(matches!(k_chain_quad(&h, 4, 1.0, 0.1, 0.5), Err(Error::Unsupported(_))));
    }
}
