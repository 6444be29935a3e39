//! Second moment of a Wick integral ∫_a^b φ_t ⋄ Ẋ_t dt with φ_t = I_m(w(t) η^{⊗m}), m ≤ 2.
//!
//! Two routes. [`variance_rhs`] evaluates the three-term identity
//!   H(2H−1)∫∫|t−s|^{2H−2}E[φ_tφ_s] + 4κ∫∫|t−s|^{H−1}E[D_{ρ_s}φ_t D_{ρ_t}φ_s] + ∫∫E[D²_{ρ_s}φ_t D²_{ρ_t}φ_s],
//! ρ_t = √c(t−·)_+^{H/2−1}, with the expectations taken in the discrete chaos algebra.
//! [`variance_bruteforce`] computes (m+2)!‖sym ∫A_t dt‖², A_t = w(t)η^{⊗m}⊗ρ_t⊗ρ_t, by summing
//! <A_t, σA_s> over every slot permutation σ on a cell partition of (a, b).

use serde::{Deserialize, Serialize};

use super::vector::{trapezoid_grid, ChaosVector, Direction};
use crate::error::{domain, Error, Result};
use crate::fracint::{SmoothTestFunction, Weyl};
use crate::kernels::Hurst;
use crate::numcore::grid::Sing;
use crate::numcore::quad::PowerRule;
use crate::numcore::{GaussLegendre, Grid1D, Real};
use crate::stransform::TimeWeight;

/// φ_t = I_m(w(t) η^{⊗m}) on (a, b).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct IntegrandSpec<T = f64> {
    pub order: usize,
    pub a: T,
    pub b: T,
    pub time: TimeWeight<T>,
    #[serde(default)]
    pub space: SmoothTestFunction<T>,
}

impl<T: Real> IntegrandSpec<T> {
    fn validate(&self) -> Result<()> {
        if self.order > 2 {
            return Err(Error::Unsupported(format!("variance identity implemented for m ≤ 2, got {}", self.order)));
        }
        if !(self.a < self.b) || !self.a.is_finite() || !self.b.is_finite() {
            return domain(format!("need a < b, got ({}, {})", self.a, self.b));
        }
        Ok(())
    }

    fn vanishes(&self) -> bool {
        self.time.is_zero() || (self.order > 0 && self.space.is_zero())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct VarianceTerms<T = f64> {
    pub term1: T,
    pub term2: T,
    pub term3: T,
}

impl<T: Real> VarianceTerms<T> {
    pub fn total(&self) -> T {
        self.term1 + self.term2 + self.term3
    }
}

/// Largest node count of the discretizations used by both routes.
pub const MAX_VARIANCE_NODES: usize = 120;

/// 2∫_a^b∫_a^t (t−s)^γ G(t,s) ds dt for symmetric G = pair(data(t), data(s)).
fn sym_double<T: Real, D>(a: T, b: T, gamma: T, data: &dyn Fn(T) -> Result<D>, pair: &dyn Fn(&D, &D) -> Result<T>) -> Result<T> {
    let rule = PowerRule::<T>::default();
    let ml = (b - a) * T::lit(0.125);
    let outer = Grid1D::singular(a, b, &[Sing { at: a, gamma: gamma + T::one() }], &rule, ml)?;
    let mut total = T::zero();
    for (t, wt) in outer.nodes.iter().zip(&outer.weights) {
        let dt = data(*t)?;
        let inner = Grid1D::singular(a, *t, &[Sing { at: *t, gamma }], &rule, ml)?;
        let mut s = T::zero();
        for (x, wx) in inner.nodes.iter().zip(&inner.weights) {
            s += *wx * (*t - *x).powf(gamma) * pair(&dt, &data(*x)?)?;
        }
        total += *wt * s;
    }
    Ok(T::lit(2.0) * total)
}

const CHEB_NODES: usize = 48;

/// Chebyshev points of the second kind on [a, b] with barycentric weights.
struct Chebyshev<T> {
    a: T,
    b: T,
    nodes: Vec<T>,
    bary: Vec<T>,
}

impl<T: Real> Chebyshev<T> {
    fn new(a: T, b: T, n: usize) -> Self {
        let nf = T::from_usize_(n - 1);
        let nodes = (0..n).map(|j| a + (b - a) * (T::one() - (T::PI() * T::from_usize_(j) / nf).cos()) * T::lit(0.5)).collect();
        let bary = (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { T::one() } else { -T::one() };
                if j == 0 || j == n - 1 {
                    s * T::lit(0.5)
                } else {
                    s
                }
            })
            .collect();
        Chebyshev { a, b, nodes, bary }
    }

    /// Lagrange basis values at t.
    fn basis(&self, t: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.nodes.len()];
        if let Some(j) = self.nodes.iter().position(|x| *x == t) {
            out[j] = T::one();
            return out;
        }
        let mut den = T::zero();
        for (j, (x, w)) in self.nodes.iter().zip(&self.bary).enumerate() {
            out[j] = *w / (t - *x);
            den += out[j];
        }
        for o in out.iter_mut() {
            *o /= den;
        }
        out
    }

    /// ∫∫|t−s|^γ ℓ(t)ᵀ G ℓ(s) over (a, b)² for a symmetric matrix G on the nodes.
    fn sym_double(&self, gamma: T, g: &[Vec<T>]) -> Result<T> {
        let data = |t: T| -> Result<(Vec<T>, Vec<T>)> {
            let l = self.basis(t);
            let gl = g.iter().map(|row| row.iter().zip(&l).map(|(x, y)| *x * *y).sum()).collect();
            Ok((l, gl))
        };
        let pair = |x: &(Vec<T>, Vec<T>), y: &(Vec<T>, Vec<T>)| -> Result<T> { Ok(x.1.iter().zip(&y.0).map(|(p, q)| *p * *q).sum()) };
        sym_double(self.a, self.b, gamma, &data, &pair)
    }
}

/// The three terms of the identity, by singular quadrature in time and the chaos algebra in space.
/// The space grid has `space_nodes` ≤ 120 nodes over the support of η.
pub fn variance_rhs<T: Real>(spec: &IntegrandSpec<T>, h: &Hurst<T>, space_nodes: usize) -> Result<VarianceTerms<T>> {
    spec.validate()?;
    if !(8..=MAX_VARIANCE_NODES).contains(&space_nodes) {
        return Err(Error::Memory(format!("space grid must have 8..={MAX_VARIANCE_NODES} nodes, got {space_nodes}")));
    }
    let zero = VarianceTerms { term1: T::zero(), term2: T::zero(), term3: T::zero() };
    if spec.vanishes() {
        return Ok(zero);
    }
    let m = spec.order;
    let (lo, hi) = if m == 0 { (T::zero(), T::one()) } else { effective_support(&spec.space) };
    let grid = trapezoid_grid(lo, hi, space_nodes)?;
    let eta: Vec<T> = grid.nodes.iter().map(|x| spec.space.eval(*x)).collect();
    let p = if m == 0 { ChaosVector::constant(grid.clone(), T::one()) } else { ChaosVector::power(grid.clone(), &eta, m)? };
    let w = &spec.time;
    let (a, b) = (spec.a, spec.b);
    let e0 = p.inner(&p)?;
    let one = |t: T| -> Result<T> { Ok(w.eval(t)) };
    let prod = |x: &T, y: &T| -> Result<T> { Ok(*x * *y) };
    let term1 = h.h2h1() * e0 * sym_double(a, b, T::lit(2.0) * h.h - T::lit(2.0), &one, &prod)?;
    if m == 0 {
        return Ok(VarianceTerms { term1, ..zero });
    }
    // u_j(t) = w(t) D^j_{ρ_t}p is smooth in t, so E[D^j_{ρ_s}φ_t D^j_{ρ_t}φ_s] = <u_j(s), u_j(t)> is
    // interpolated from its values on Chebyshev nodes
    let cheb = Chebyshev::new(a, b, CHEB_NODES);
    let mut u1 = Vec::with_capacity(CHEB_NODES);
    let mut u2 = Vec::with_capacity(CHEB_NODES);
    for t in &cheb.nodes {
        let rho = Direction::frac_point(&grid, h, *t);
        let d1 = p.d_op(&rho)?.scale(w.eval(*t));
        if m == 2 {
            u2.push(d1.d_op(&rho)?);
        }
        u1.push(d1);
    }
    let gram = |u: &[ChaosVector<T>]| -> Result<Vec<Vec<T>>> { u.iter().map(|x| u.iter().map(|y| x.inner(y)).collect()).collect() };
    let g1 = gram(&u1)?;
    let term2 = T::lit(4.0) * h.kappa * cheb.sym_double(h.h - T::one(), &g1)?;
    let term3 = if m == 2 { cheb.sym_double(T::zero(), &gram(&u2)?)? } else { T::zero() };
    Ok(VarianceTerms { term1, term2, term3 })
}

/// Interval outside which every atom is below 1e-10 of its peak.
fn effective_support<T: Real>(f: &SmoothTestFunction<T>) -> (T, T) {
    let live = f.terms.iter().filter(|a| a.coef != T::zero());
    let r = |a: &crate::fracint::Atom<T>| a.width * (T::lit(7.0) + T::from_usize_(a.degree as usize));
    let lo = live.clone().map(|a| a.center - r(a)).fold(T::infinity(), T::min);
    let hi = live.map(|a| a.center + r(a)).fold(T::neg_infinity(), T::max);
    (lo, hi)
}

/// ∫_I∫_J |t−s|^γ ds dt for cells I, J.
fn cell_kernel<T: Real>(i: (T, T), j: (T, T), gamma: T) -> T {
    let g = |x: T| x.abs().powf(gamma + T::lit(2.0)) / ((gamma + T::one()) * (gamma + T::lit(2.0)));
    -(g(i.1 - j.1) - g(i.1 - j.0) - g(i.0 - j.1) + g(i.0 - j.0))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// E[(∫_a^b φ_t ⋄ Ẋ_t dt)²] by slot enumeration over `time_cells` ≤ 120 Chebyshev cells.
pub fn variance_bruteforce<T: Real>(spec: &IntegrandSpec<T>, h: &Hurst<T>, time_cells: usize) -> Result<T> {
    spec.validate()?;
    if !(4..=MAX_VARIANCE_NODES).contains(&time_cells) {
        return Err(Error::Memory(format!("time partition must have 4..={MAX_VARIANCE_NODES} cells, got {time_cells}")));
    }
    if spec.vanishes() {
        return Ok(T::zero());
    }
    let m = spec.order;
    let cells = Grid1D::chebyshev_cells(spec.a, spec.b, time_cells)?;
    let e = cells.edges.clone().unwrap();
    let n = time_cells;
    let weyl = Weyl::new(h.alpha())?;
    let sd = h.d.sqrt();
    // <η, ρ_t> = √d I_+^{H/2}η(t)
    let v = |t: T| if m == 0 { T::zero() } else { sd * weyl.eval(&spec.space, t) };
    let eta2 = if m == 0 { T::one() } else { spec.space.l2_norm_sq() };
    let gl = GaussLegendre::<T>::new(8);
    // cell averages of w v^k, k = 0, 1, 2
    let avg: Vec<[T; 3]> = (0..n)
        .map(|i| {
            let len = e[i + 1] - e[i];
            let mut out = [T::zero(); 3];
            for (k, o) in out.iter_mut().enumerate() {
                *o = gl.integrate(e[i], e[i + 1], |t| spec.time.eval(t) * v(t).powi(k as i32)) / len;
            }
            out
        })
        .collect();
    let gammas = [T::lit(2.0) * h.h - T::lit(2.0), h.h - T::one(), T::zero()];
    // ∑_{I,J} avg_I avg_J ∫_I∫_J|t−s|^γ, for each number k of η–ρ crossings
    let mut block = [T::zero(); 3];
    for (k, bk) in block.iter_mut().enumerate() {
        if k > m {
            continue;
        }
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                s += avg[i][k] * avg[j][k] * cell_kernel((e[i], e[i + 1]), (e[j], e[j + 1]), gammas[k]);
            }
        }
        *bk = s;
    }
    // slots 0..m carry η, slots m and m+1 carry ρ; pair slot i of A_t with slot σ(i) of A_s
    let mut total = T::zero();
    for sigma in permutations(m + 2) {
        let mut factor = T::one();
        let mut cross = 0usize;
        for (i, &j) in sigma.iter().enumerate() {
            match (i < m, j < m) {
                (true, true) => factor *= eta2,
                (false, false) => factor *= h.kappa,
                // ⟨η, ρ_s⟩ or ⟨ρ_t, η⟩: carried by the cell averages
                (true, false) => cross += 1,
                (false, true) => {}
            }
        }
        total += factor * block[cross];
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(order: usize) -> IntegrandSpec<f64> {
        IntegrandSpec {
            order,
            a: 0.2,
            b: 1.1,
            time: TimeWeight { coeffs: vec![1.0, 0.5] },
            space: SmoothTestFunction::gaussian(1.0, 0.6, 0.15),
        }
    }

    #[test]
    fn order_zero_is_increment_variance() {
        let h = Hurst::new(0.75).unwrap();
        let s = IntegrandSpec { time: TimeWeight::constant(2.0), ..spec(0) };
        let want = 4.0 * 0.9f64.powf(1.5);
        let r = variance_rhs(&s, &h, 16).unwrap();
        assert_eq!(r.term2, 0.0);
        assert!((r.total() / want - 1.0).abs() < 1e-6, "{}", r.total());
        let b = variance_bruteforce(&s, &h, 60).unwrap();
        assert!((b / want - 1.0).abs() < 1e-6, "{b}");
    }

    #[test]
    fn identity_matches_enumeration() {
        for hv in [0.6, 0.8] {
            let h = Hurst::new(hv).unwrap();
            for m in 0..=2 {
                let s = spec(m);
                let r = variance_rhs(&s, &h, 120).unwrap().total();
                let b = variance_bruteforce(&s, &h, 120).unwrap();
                assert!((r / b - 1.0).abs() < 1e-3, "H={hv} m={m} {r} {b}");
            }
        }
    }

    #[test]
    fn terms_are_nonnegative() {
        let h = Hurst::new(0.7).unwrap();
        let r = variance_rhs(&spec(2), &h, 60).unwrap();
        assert!(r.term1 > 0.0 && r.term2 > 0.0 && r.term3 > 0.0, "{r:?}");
    }

    #[test]
    fn limits_and_degenerate_inputs() {
        let h = Hurst::new(0.7).unwrap();
        assert!(matches!(variance_rhs(&spec(3), &h, 40), Err(Error::Unsupported(_))));
        assert!(matches!(variance_rhs(&spec(1), &h, 121), Err(Error::Memory(_))));
        assert!(matches!(variance_bruteforce(&spec(1), &h, 500), Err(Error::Memory(_))));
        let z = IntegrandSpec { time: TimeWeight::constant(0.0), ..spec(2) };
        assert_eq!(variance_rhs(&z, &h, 40).unwrap().total(), 0.0);
        assert_eq!(variance_bruteforce(&z, &h, 40).unwrap(), 0.0);
        let bad = IntegrandSpec { a: 1.0, b: 1.0, ..spec(1) };
        assert!(variance_rhs(&bad, &h, 40).is_err());
    }
}
