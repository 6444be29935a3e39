//! Gauss-Legendre rules, graded rules and the power-substitution rule for endpoint singularities.

use super::Real;
use crate::error::{Error, Result};

/// n-point Gauss-Legendre rule on [-1, 1]. Nodes are computed in f64 by Newton iteration.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre needs at least one node");
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = nf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    /// ∫_a^b f.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        let mut s = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += *w * f(mid + half * *x);
        }
        s * half
    }

    /// Push nodes/weights of this rule mapped to [a, b].
    pub fn push_mapped(&self, a: T, b: T, nodes: &mut Vec<T>, weights: &mut Vec<T>) {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            nodes.push(mid + half * *x);
            weights.push(*w * half);
        }
    }
}

/// Composite rule on [0, 1] with geometric panels shrinking toward 0.
/// Panels are [σ^{k+1}, σ^k] for k < levels plus the innermost [0, σ^levels].
#[derive(Debug, Clone)]
pub struct GradedUnit<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GradedUnit<T> {
    pub fn new(levels: usize, sigma: f64, m: usize) -> Self {
        let gl = GaussLegendre::<T>::new(m);
        let mut nodes = Vec::with_capacity((levels + 1) * m);
        let mut weights = Vec::with_capacity((levels + 1) * m);
        let s = T::lit(sigma);
        let mut edges = vec![T::one()];
        for _ in 0..levels {
            let last = *edges.last().unwrap();
            edges.push(last * s);
        }
        edges.push(T::zero());
        edges.reverse();
        for w in edges.windows(2) {
            gl.push_mapped(w[0], w[1], &mut nodes, &mut weights);
        }
        GradedUnit { nodes, weights }
    }
}

/// Which end of the interval carries the singular factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Lo,
    Hi,
}

/// Rule for ∫ f(x)|x−e|^γ dx through the substitution u = |x−e|^{1+γ}, graded in u.
#[derive(Debug, Clone)]
pub struct PowerRule<T> {
    unit: GradedUnit<T>,
}

impl<T: Real> Default for PowerRule<T> {
    fn default() -> Self {
        Self::new(18, 0.35, 12)
    }
}

impl<T: Real> PowerRule<T> {
    pub fn new(levels: usize, sigma: f64, m: usize) -> Self {
        PowerRule { unit: GradedUnit::new(levels, sigma, m) }
    }

    pub fn len(&self) -> usize {
        self.unit.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unit.nodes.is_empty()
    }

    /// ∫_lo^hi f(x)|x−e|^γ dx with the singular weight absorbed analytically.
    pub fn integrate_weighted<F: FnMut(T) -> T>(&self, f: F, lo: T, hi: T, gamma: T, end: Endpoint) -> Result<T> {
        if !(gamma > -T::one()) {
            return Err(Error::Divergent(format!("endpoint exponent {gamma} ≤ -1")));
        }
        let mut f = f;
        let len = hi - lo;
        if len == T::zero() {
            return Ok(T::zero());
        }
        let g1 = gamma + T::one();
        let p = g1.recip();
        let mut s = T::zero();
        for (u, w) in self.unit.nodes.iter().zip(&self.unit.weights) {
            let off = len * u.powf(p);
            let x = match end {
                Endpoint::Lo => lo + off,
                Endpoint::Hi => hi - off,
            };
            s += *w * f(x);
        }
        Ok(s * len.powf(g1) / g1)
    }

    /// Nodes and weights (Jacobian included) for plain ∫_lo^hi F(x) dx when F ~ |x−e|^γ near e.
    /// Returned in increasing x order.
    pub fn mapped(&self, lo: T, hi: T, gamma: T, end: Endpoint) -> (Vec<T>, Vec<T>) {
        let len = hi - lo;
        let g1 = gamma + T::one();
        let p = g1.recip();
        let mut nodes = Vec::with_capacity(self.len());
        let mut weights = Vec::with_capacity(self.len());
        let e = match end {
            Endpoint::Lo => lo,
            Endpoint::Hi => hi,
        };
        // offsets below round-off of e are not representable; their u-weight is lumped onto the
        // first representable node, where the substituted integrand is already nearly constant
        let tol = T::lit(64.0) * T::epsilon() * e.abs().max(len.abs());
        let mut pending = T::zero();
        for (u, w) in self.unit.nodes.iter().zip(&self.unit.weights) {
            let off = len * u.powf(p);
            if off < tol {
                pending += *w;
                continue;
            }
            // dx = len p u^{p-1} du
            let wx = (*w + pending) * len * p * u.powf(p - T::one());
            pending = T::zero();
            nodes.push(match end {
                Endpoint::Lo => lo + off,
                Endpoint::Hi => hi - off,
            });
            weights.push(wx);
        }
        if end == Endpoint::Hi {
            nodes.reverse();
            weights.reverse();
        }
        (nodes, weights)
    }
}

/// ∫_lo^hi f(x)·|x − endpoint|^γ dx, γ > −1, relative error around 1e-10 for smooth f.
pub fn quad_power_endpoint<T: Real, F: FnMut(T) -> T>(f: F, lo: T, hi: T, gamma: T, endpoint: Endpoint) -> Result<T> {
    if !(hi > lo) {
        return Err(Error::Domain(format!("need lo < hi, got [{lo}, {hi}]")));
    }
    PowerRule::default().integrate_weighted(f, lo, hi, gamma, endpoint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        for n in 1..12 {
            let gl = GaussLegendre::<f64>::new(n);
            let deg = 2 * n - 1;
            let v = gl.integrate(0.0, 2.0, |x| x.powi(deg as i32));
            assert_relative_eq!(v, 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0), max_relative = 1e-13);
            let ws: f64 = gl.weights.iter().sum();
            assert_relative_eq!(ws, 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn graded_unit_sums_to_one() {
        let g = GradedUnit::<f64>::new(20, 0.35, 12);
        let s: f64 = g.weights.iter().sum();
        assert_relative_eq!(s, 1.0, max_relative = 1e-14);
        let v: f64 = g.nodes.iter().zip(&g.weights).map(|(x, w)| w * x.sqrt()).sum();
        assert_relative_eq!(v, 2.0 / 3.0, max_relative = 1e-10);
    }

    #[test]
    fn power_endpoint_closed_forms() {
        let v = quad_power_endpoint(|_| 1.0f64, 0.0, 1.0, -0.25, Endpoint::Lo).unwrap();
        assert_relative_eq!(v, 1.0 / 0.75, max_relative = 1e-13);
        let v = quad_power_endpoint(|x| x, 0.0f64, 1.0, -0.5, Endpoint::Lo).unwrap();
        assert_relative_eq!(v, 2.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn power_endpoint_cos_against_refined_reference() {
        // ∫_0^1 cos x (1−x)^{−5/8} dx, arbitrary precision reference
        let v = quad_power_endpoint(|x: f64| x.cos(), 0.0, 1.0, -0.625, Endpoint::Hi).unwrap();
        assert_relative_eq!(v, 1.903_794_892_793_950_7, max_relative = 1e-10);
    }

    #[test]
    fn power_endpoint_rejects_divergent() {
        assert!(matches!(
            quad_power_endpoint(|_| 1.0f64, 0.0, 1.0, -1.0, Endpoint::Lo),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn mapped_rule_matches_weighted_rule() {
        let r = PowerRule::<f64>::default();
        let (xs, ws) = r.mapped(0.5, 2.0, -0.4, Endpoint::Hi);
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        let a: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.exp() * (2.0 - x).powf(-0.4)).sum();
        let b = r.integrate_weighted(|x: f64| x.exp(), 0.5, 2.0, -0.4, Endpoint::Hi).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }
}
