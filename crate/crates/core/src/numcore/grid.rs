//! One-dimensional quadrature grids.

use serde::{Deserialize, Serialize};

use super::quad::{Endpoint, GaussLegendre, GradedUnit, PowerRule};
use super::Real;
use crate::error::{Error, Result};

/// Quadrature nodes and positive weights over `[lo, hi]`.
///
/// Cell grids (built by [`Grid1D::cells`]) also keep the cell edges; their nodes are midpoints
/// and weights are widths, and grid functions on them are read as cell averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Grid1D<T = f64> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub lo: T,
    pub hi: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<T>>,
}

/// Singular point declaration for [`Grid1D::singular`]: location and local exponent.
#[derive(Debug, Clone, Copy)]
pub struct Sing<T> {
    pub at: T,
    pub gamma: T,
}

impl<T: Real> Grid1D<T> {
    pub fn new(nodes: Vec<T>, weights: Vec<T>, lo: T, hi: T) -> Result<Self> {
        let g = Grid1D { nodes, weights, lo, hi, edges: None };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.len() != self.weights.len() {
            return Err(Error::Shape(format!("{} nodes vs {} weights", self.nodes.len(), self.weights.len())));
        }
        if !self.nodes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Domain("grid nodes must be strictly increasing".into()));
        }
        if !self.weights.iter().all(|w| *w > T::zero() && w.is_finite()) {
            return Err(Error::Domain("grid weights must be positive".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Composite Gauss-Legendre with `panels` equal panels of `m` nodes.
    pub fn gauss_legendre(lo: T, hi: T, panels: usize, m: usize) -> Result<Self> {
        if !(hi > lo) || panels == 0 {
            return Err(Error::Domain("bad composite rule request".into()));
        }
        let gl = GaussLegendre::<T>::new(m);
        let (mut nodes, mut weights) = (Vec::new(), Vec::new());
        let h = (hi - lo) / T::from_usize_(panels);
        for p in 0..panels {
            let a = lo + h * T::from_usize_(p);
            let b = if p + 1 == panels { hi } else { a + h };
            gl.push_mapped(a, b, &mut nodes, &mut weights);
        }
        Grid1D::new(nodes, weights, lo, hi)
    }

    /// Rule on `[lo, hi]` resolving algebraic singularities `|x − at|^γ` at the declared points.
    /// Each sub-interval between breakpoints is split in half and each half uses the power
    /// substitution toward its singular end (γ = 0 still grades toward kinks).
    /// `max_len` caps the length of a half so smooth stretches get more panels.
    pub fn singular(lo: T, hi: T, sing: &[Sing<T>], rule: &PowerRule<T>, max_len: T) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::Domain(format!("need lo < hi, got [{lo}, {hi}]")));
        }
        let mut pts: Vec<Sing<T>> = sing.iter().copied().filter(|s| s.at > lo && s.at < hi).collect();
        let end_gamma = |x: T| {
            sing.iter()
                .filter(|s| s.at == x)
                .map(|s| s.gamma)
                .fold(T::zero(), |a, b| a.min(b))
        };
        pts.push(Sing { at: lo, gamma: end_gamma(lo) });
        pts.push(Sing { at: hi, gamma: end_gamma(hi) });
        pts.sort_by(|a, b| a.at.partial_cmp(&b.at).unwrap());
        pts.dedup_by(|a, b| {
            if a.at == b.at {
                b.gamma = b.gamma.min(a.gamma);
                true
            } else {
                false
            }
        });
        let (mut nodes, mut weights) = (Vec::new(), Vec::new());
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = (a.at + b.at) * T::lit(0.5);
            push_half(rule, a.at, mid, a.gamma, Endpoint::Lo, max_len, &mut nodes, &mut weights);
            push_half(rule, mid, b.at, b.gamma, Endpoint::Hi, max_len, &mut nodes, &mut weights);
        }
        Grid1D::new(nodes, weights, lo, hi)
    }

    /// Rule for the left tail (−∞, hi] of integrands decaying like |x|^{−ρ}, ρ > 1.
    /// Uses x = hi − scale·(v^{−q} − 1), v ∈ (0, 1], graded toward v = 0. Pick q ≈ 1/(ρ−1).
    pub fn left_tail(hi: T, scale: T, q: T, levels: usize, m: usize) -> Result<Self> {
        let unit = GradedUnit::<T>::new(levels, 0.3, m);
        let (mut nodes, mut weights) = (Vec::new(), Vec::new());
        for (v, w) in unit.nodes.iter().zip(&unit.weights) {
            let x = hi - scale * (v.powf(-q) - T::one());
            let wx = *w * scale * q * v.powf(-q - T::one());
            if x.is_finite() && wx.is_finite() {
                nodes.push(x);
                weights.push(wx);
            }
        }
        Grid1D::new(nodes, weights, T::neg_infinity(), hi)
    }

    /// Concatenate grids on adjacent intervals.
    pub fn concat(parts: &[Grid1D<T>]) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for p in parts {
            nodes.extend_from_slice(&p.nodes);
            weights.extend_from_slice(&p.weights);
        }
        let lo = parts.first().map(|p| p.lo).unwrap_or(T::zero());
        let hi = parts.last().map(|p| p.hi).unwrap_or(T::zero());
        Grid1D::new(nodes, weights, lo, hi)
    }

    /// Cell grid from increasing edges: midpoint nodes, width weights.
    pub fn cells(edges: Vec<T>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::Domain("cell grid needs at least two edges".into()));
        }
        let nodes = edges.windows(2).map(|w| (w[0] + w[1]) * T::lit(0.5)).collect();
        let weights = edges.windows(2).map(|w| w[1] - w[0]).collect();
        let lo = edges[0];
        let hi = *edges.last().unwrap();
        let mut g = Grid1D::new(nodes, weights, lo, hi)?;
        g.edges = Some(edges);
        Ok(g)
    }

    /// Cells on [lo, hi] with Chebyshev-clustered edges (dense at both ends).
    pub fn chebyshev_cells(lo: T, hi: T, n: usize) -> Result<Self> {
        let nf = T::from_usize_(n);
        let edges = (0..=n)
            .map(|j| {
                let u = (T::one() - (T::PI() * T::from_usize_(j) / nf).cos()) * T::lit(0.5);
                lo + (hi - lo) * u
            })
            .collect();
        Grid1D::cells(edges)
    }

    /// Cells covering [−far, hi]: `n_core` uniform cells on [core_lo, hi] and geometric cells
    /// growing by `ratio` to the left until −far is passed.
    pub fn halfline_cells(core_lo: T, hi: T, n_core: usize, ratio: T, far: T) -> Result<Self> {
        let h = (hi - core_lo) / T::from_usize_(n_core);
        let mut left = vec![core_lo];
        let mut w = h;
        while *left.last().unwrap() > -far {
            w *= ratio;
            let next = *left.last().unwrap() - w;
            left.push(next);
        }
        left.reverse();
        let mut edges = left;
        for i in 1..=n_core {
            edges.push(if i == n_core { hi } else { core_lo + h * T::from_usize_(i) });
        }
        Grid1D::cells(edges)
    }

    pub fn integrate(&self, values: &[T]) -> T {
        self.weights.iter().zip(values).map(|(w, v)| *w * *v).sum()
    }

    pub fn integrate_fn<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| *w * f(*x)).sum()
    }

    pub fn total_weight(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// Weighted inner product of two grid functions.
    pub fn dot(&self, a: &[T], b: &[T]) -> T {
        self.weights.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| *w * *x * *y).sum()
    }

    /// Cell averages of f (Gauss rule per cell); falls back to point values for non-cell grids.
    pub fn cell_averages<F: FnMut(T) -> T>(&self, mut f: F) -> Vec<T> {
        match &self.edges {
            Some(e) => {
                let gl = GaussLegendre::<T>::new(6);
                e.windows(2).map(|w| gl.integrate(w[0], w[1], &mut f) / (w[1] - w[0])).collect()
            }
            None => self.nodes.iter().map(|x| f(*x)).collect(),
        }
    }

    pub fn same_as(&self, other: &Grid1D<T>) -> bool {
        self.nodes == other.nodes && self.weights == other.weights
    }
}

#[allow(clippy::too_many_arguments)]
fn push_half<T: Real>(
    rule: &PowerRule<T>,
    a: T,
    b: T,
    gamma: T,
    end: Endpoint,
    max_len: T,
    nodes: &mut Vec<T>,
    weights: &mut Vec<T>,
) {
    let len = b - a;
    if len <= T::zero() {
        return;
    }
    // singular panel next to the singular end, plain Gauss panels for the rest
    let n_extra = if len > max_len { (len / max_len).ceil().to_usize().unwrap_or(1) - 1 } else { 0 };
    let sing_len = len / T::from_usize_(n_extra + 1);
    let gl = GaussLegendre::<T>::new(12);
    match end {
        Endpoint::Lo => {
            let (x, w) = rule.mapped(a, a + sing_len, gamma, Endpoint::Lo);
            nodes.extend(x);
            weights.extend(w);
            for k in 0..n_extra {
                let p = a + sing_len * T::from_usize_(k + 1);
                gl.push_mapped(p, p + sing_len, nodes, weights);
            }
        }
        Endpoint::Hi => {
            for k in 0..n_extra {
                let p = a + sing_len * T::from_usize_(k);
                gl.push_mapped(p, p + sing_len, nodes, weights);
            }
            let (x, w) = rule.mapped(b - sing_len, b, gamma, Endpoint::Hi);
            nodes.extend(x);
            weights.extend(w);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn composite_weights_sum_to_length() {
        let g = Grid1D::<f64>::gauss_legendre(-10.0, 2.0, 37, 5).unwrap();
        assert!((g.total_weight() - 12.0).abs() < 1e-12);
        g.validate().unwrap();
    }

    #[test]
    fn refinement_is_stable_for_smooth_integrands() {
        let f = |x: f64| (-x * x).exp() * (3.0 * x).cos();
        let a = Grid1D::gauss_legendre(-6.0, 6.0, 20, 6).unwrap().integrate_fn(f);
        let b = Grid1D::gauss_legendre(-6.0, 6.0, 40, 6).unwrap().integrate_fn(f);
        assert!((a - b).abs() < 1e-12);
        let exact = std::f64::consts::PI.sqrt() * (-9.0f64 / 4.0).exp();
        assert_relative_eq!(b, exact, max_relative = 1e-12);
    }

    #[test]
    fn singular_rule_resolves_interior_and_end_points() {
        let s = [Sing { at: 0.3, gamma: -0.6 }, Sing { at: 1.0, gamma: -0.2 }];
        let g = Grid1D::<f64>::singular(0.0, 1.0, &s, &PowerRule::default(), 0.25).unwrap();
        let v = g.integrate_fn(|x| (x - 0.3).abs().powf(-0.6) * (1.0 - x).powf(-0.2));
        // reference from the same integral split by hand with quad_power_endpoint
        let pr = PowerRule::default();
        let left = pr.integrate_weighted(|x: f64| (1.0 - x).powf(-0.2), 0.0, 0.3, -0.6, Endpoint::Hi).unwrap();
        let m1 = pr.integrate_weighted(|x: f64| (1.0 - x).powf(-0.2), 0.3, 0.65, -0.6, Endpoint::Lo).unwrap();
        let m2 = pr.integrate_weighted(|x: f64| (x - 0.3).powf(-0.6), 0.65, 1.0, -0.2, Endpoint::Hi).unwrap();
        assert_relative_eq!(v, left + m1 + m2, max_relative = 1e-9);
    }

    #[test]
    fn left_tail_integrates_power_decay() {
        // ∫_{−∞}^{−1} |x|^{−1.25} dx = 4
        let g = Grid1D::<f64>::left_tail(-1.0, 1.0, 4.0, 40, 10).unwrap();
        assert_relative_eq!(g.integrate_fn(|x| x.abs().powf(-1.25)), 4.0, max_relative = 1e-8);
    }

    #[test]
    fn cells_and_chebyshev() {
        let g = Grid1D::<f64>::chebyshev_cells(0.0, 1.0, 50).unwrap();
        assert_eq!(g.len(), 50);
        assert!((g.total_weight() - 1.0).abs() < 1e-14);
        let avg = g.cell_averages(|x| x * x);
        let v = g.integrate(&avg);
        assert_relative_eq!(v, 1.0 / 3.0, max_relative = 1e-13);
        let h = Grid1D::<f64>::halfline_cells(-1.0, 2.0, 30, 1.2, 50.0).unwrap();
        assert!(h.lo <= -50.0 && h.hi == 2.0);
        h.validate().unwrap();
    }

    #[test]
    fn invalid_grids_are_rejected() {
        assert!(Grid1D::<f64>::new(vec![0.0, 0.0], vec![1.0, 1.0], 0.0, 1.0).is_err());
        assert!(Grid1D::<f64>::new(vec![0.0, 1.0], vec![1.0, -1.0], 0.0, 1.0).is_err());
        assert!(Grid1D::<f64>::new(vec![0.0], vec![1.0, 1.0], 0.0, 1.0).is_err());
    }
}
