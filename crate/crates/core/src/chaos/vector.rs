//! Truncated Wiener chaos on a weighted grid.
//!
//! A level-n kernel is a dense symmetric tensor of nodal values, flattened row-major. The grid
//! weights play the role of the measure, so <f, g> = ∑ f(i..)g(i..)∏w and I_1(g) = ∑ g_i ΔB_i with
//! ΔB_i ~ N(0, w_i).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernels::Hurst;
use crate::numcore::{Grid1D, Real};

/// Highest chaos level stored.
pub const MAX_ORDER: usize = 4;
/// Largest dense tensor allowed, in entries.
pub const MAX_ENTRIES: usize = 1 << 24;

/// Finite chaos expansion c0 + I_1(g1) + ... + I_4(f4) on a shared grid.
#[derive(Debug, Clone)]
pub struct ChaosVector<T = f64> {
    grid: Arc<Grid1D<T>>,
    /// levels[n] is empty when the level-n kernel is zero.
    levels: Vec<Vec<T>>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binom(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
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

fn check_size(n_nodes: usize, order: usize) -> Result<usize> {
    let mut len = 1usize;
    for _ in 0..order {
        len = len.checked_mul(n_nodes).ok_or_else(|| Error::Memory("tensor size overflows".into()))?;
    }
    if len > MAX_ENTRIES {
        return Err(Error::Memory(format!("order-{order} tensor on {n_nodes} nodes needs {len} entries, limit {MAX_ENTRIES}")));
    }
    Ok(len)
}

/// Average of a flattened order-n tensor over all index permutations.
fn symmetrize<T: Real>(f: &[T], n: usize, nn: usize) -> Vec<T> {
    if n <= 1 {
        return f.to_vec();
    }
    let perms = permutations(n);
    let inv = T::one() / T::from_usize_(perms.len());
    let mut digits = vec![0usize; n];
    let mut out = vec![T::zero(); f.len()];
    for (flat, o) in out.iter_mut().enumerate() {
        let mut r = flat;
        for d in (0..n).rev() {
            digits[d] = r % nn;
            r /= nn;
        }
        let mut s = T::zero();
        for p in &perms {
            let mut idx = 0;
            for &k in p {
                idx = idx * nn + digits[k];
            }
            s += f[idx];
        }
        *o = s * inv;
    }
    out
}

impl<T: Real> ChaosVector<T> {
    pub fn zero(grid: Arc<Grid1D<T>>) -> Self {
        ChaosVector { grid, levels: vec![Vec::new(); MAX_ORDER + 1] }
    }

    pub fn constant(grid: Arc<Grid1D<T>>, c: T) -> Self {
        let mut v = Self::zero(grid);
        v.levels[0] = vec![c];
        v
    }

    /// I_1(g) from nodal values.
    pub fn first(grid: Arc<Grid1D<T>>, g: Vec<T>) -> Result<Self> {
        Self::level(grid, 1, g)
    }

    /// I_2(F) from a row-major matrix of nodal values; F is symmetrized.
    pub fn second(grid: Arc<Grid1D<T>>, f: Vec<T>) -> Result<Self> {
        Self::level(grid, 2, f)
    }

    /// I_n(f) for a flattened order-n tensor; f is symmetrized.
    pub fn level(grid: Arc<Grid1D<T>>, n: usize, f: Vec<T>) -> Result<Self> {
        if n > MAX_ORDER {
            return Err(Error::Unsupported(format!("chaos order {n} above {MAX_ORDER}")));
        }
        let nn = grid.len();
        let len = check_size(nn, n)?;
        if f.len() != len {
            return Err(Error::Shape(format!("order-{n} kernel needs {len} entries, got {}", f.len())));
        }
        let mut v = Self::zero(grid);
        v.levels[n] = symmetrize(&f, n, nn);
        Ok(v)
    }

    /// I_n(g^{⊗n}).
    pub fn power(grid: Arc<Grid1D<T>>, g: &[T], n: usize) -> Result<Self> {
        if g.len() != grid.len() {
            return Err(Error::Shape(format!("vector of length {} on a {}-node grid", g.len(), grid.len())));
        }
        if n > MAX_ORDER {
            return Err(Error::Unsupported(format!("chaos order {n} above {MAX_ORDER}")));
        }
        check_size(grid.len(), n)?;
        let mut f = vec![T::one()];
        for _ in 0..n {
            f = outer(&f, g);
        }
        let mut v = Self::zero(grid);
        v.levels[n] = f;
        Ok(v)
    }

    pub fn grid(&self) -> &Arc<Grid1D<T>> {
        &self.grid
    }

    /// Highest non-zero level (0 for the zero element).
    pub fn order(&self) -> usize {
        (0..=MAX_ORDER).rev().find(|n| !self.levels[*n].is_empty()).unwrap_or(0)
    }

    /// Kernel of level n (empty when zero).
    pub fn kernel(&self, n: usize) -> &[T] {
        &self.levels[n]
    }

    pub fn expectation(&self) -> T {
        self.levels[0].first().copied().unwrap_or(T::zero())
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::Shape("chaos vectors live on different grids".into()))
        }
    }

    fn add_level(&mut self, n: usize, f: Vec<T>, coef: T) {
        if self.levels[n].is_empty() {
            self.levels[n] = f.into_iter().map(|x| x * coef).collect();
        } else {
            for (a, b) in self.levels[n].iter_mut().zip(f) {
                *a += b * coef;
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let mut out = self.clone();
        for n in 0..=MAX_ORDER {
            if !other.levels[n].is_empty() {
                out.add_level(n, other.levels[n].clone(), T::one());
            }
        }
        Ok(out)
    }

    pub fn scale(&self, a: T) -> Self {
        let mut out = self.clone();
        for l in out.levels.iter_mut() {
            for x in l.iter_mut() {
                *x *= a;
            }
        }
        out
    }

    /// E[p q] = ∑ n! <f_n, g_n>.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.same_grid(other)?;
        let nn = self.grid.len();
        let mut s = T::zero();
        for n in 0..=MAX_ORDER {
            let (a, b) = (&self.levels[n], &other.levels[n]);
            if a.is_empty() || b.is_empty() {
                continue;
            }
            let c = contract(a, n, b, n, n, &self.grid.weights, nn);
            s += T::lit(factorial(n)) * c[0];
        }
        Ok(s)
    }

    /// Product I_p(f)I_q(g) = ∑_r r! C(p,r) C(q,r) I_{p+q−2r}(f ⊗_r g), level by level.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.combine(other, false)
    }

    /// Wick product: the r = 0 terms only.
    pub fn wick(&self, other: &Self) -> Result<Self> {
        self.combine(other, true)
    }

    fn combine(&self, other: &Self, wick_only: bool) -> Result<Self> {
        self.same_grid(other)?;
        let nn = self.grid.len();
        let w = &self.grid.weights;
        let mut out = Self::zero(self.grid.clone());
        for p in 0..=MAX_ORDER {
            if self.levels[p].is_empty() {
                continue;
            }
            for q in 0..=MAX_ORDER {
                if other.levels[q].is_empty() {
                    continue;
                }
                let rmax = if wick_only { 0 } else { p.min(q) };
                for r in 0..=rmax {
                    let n = p + q - 2 * r;
                    if n > MAX_ORDER {
                        return Err(Error::Unsupported(format!("product reaches chaos order {n}, cap is {MAX_ORDER}")));
                    }
                    check_size(nn, n)?;
                    let c = contract(&self.levels[p], p, &other.levels[q], q, r, w, nn);
                    let coef = factorial(r) * binom(p, r) * binom(q, r);
                    out.add_level(n, symmetrize(&c, n, nn), T::lit(coef));
                }
            }
        }
        Ok(out)
    }

    /// S(p)(ξ) = ∑ <f_n, ξ^{⊗n}> for nodal values of ξ.
    pub fn s_transform_of(&self, xi: &[T]) -> Result<T> {
        let nn = self.grid.len();
        if xi.len() != nn {
            return Err(Error::Shape(format!("ξ has {} values on a {nn}-node grid", xi.len())));
        }
        let w = &self.grid.weights;
        let mut s = T::zero();
        for n in 0..=MAX_ORDER {
            let mut f = self.levels[n].clone();
            if f.is_empty() {
                continue;
            }
            for k in (0..n).rev() {
                f = contract(&f, k + 1, xi, 1, 1, w, nn);
            }
            s += f[0];
        }
        Ok(s)
    }

    /// Shift of the argument ω ↦ ω + ξ, for elements of order ≤ 2.
    pub fn translate(&self, xi: &[T]) -> Result<Self> {
        if self.order() > 2 {
            return Err(Error::Unsupported(format!("translation implemented up to order 2, got {}", self.order())));
        }
        let nn = self.grid.len();
        if xi.len() != nn {
            return Err(Error::Shape(format!("ξ has {} values on a {nn}-node grid", xi.len())));
        }
        let w = &self.grid.weights;
        let mut out = self.clone();
        if !self.levels[1].is_empty() {
            out.add_level(0, contract(&self.levels[1], 1, xi, 1, 1, w, nn), T::one());
        }
        if !self.levels[2].is_empty() {
            let g = contract(&self.levels[2], 2, xi, 1, 1, w, nn);
            out.add_level(0, contract(&g, 1, xi, 1, 1, w, nn), T::one());
            out.add_level(1, g, T::lit(2.0));
        }
        Ok(out)
    }

    /// D_y: I_n(f) ↦ n I_{n−1}(f ⊗_1 y).
    pub fn d_op(&self, y: &Direction<T>) -> Result<Self> {
        let nn = self.grid.len();
        y.check(nn)?;
        let w = &self.grid.weights;
        let mut out = Self::zero(self.grid.clone());
        for n in 1..=MAX_ORDER {
            if self.levels[n].is_empty() {
                continue;
            }
            out.add_level(n - 1, contract(&self.levels[n], n, &y.values, 1, 1, w, nn), T::from_usize_(n));
        }
        Ok(out)
    }

    /// D*_y: I_n(f) ↦ I_{n+1}(sym(f ⊗ y)).
    pub fn dstar_op(&self, y: &Direction<T>) -> Result<Self> {
        let nn = self.grid.len();
        y.check(nn)?;
        let mut out = Self::zero(self.grid.clone());
        for n in 0..=MAX_ORDER {
            if self.levels[n].is_empty() {
                continue;
            }
            if n + 1 > MAX_ORDER {
                return Err(Error::Unsupported(format!("D* reaches chaos order {}, cap is {MAX_ORDER}", n + 1)));
            }
            check_size(nn, n + 1)?;
            out.add_level(n + 1, symmetrize(&outer(&self.levels[n], &y.values), n + 1, nn), T::one());
        }
        Ok(out)
    }
}

fn outer<T: Real>(f: &[T], g: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(f.len() * g.len());
    for a in f {
        for b in g {
            out.push(*a * *b);
        }
    }
    out
}

/// f ⊗_r g: contract the last r indices of f (order p) against the last r of g (order q).
fn contract<T: Real>(f: &[T], p: usize, g: &[T], q: usize, r: usize, w: &[T], nn: usize) -> Vec<T> {
    let rr = nn.pow(r as u32);
    let pf = nn.pow((p - r) as u32);
    let qf = nn.pow((q - r) as u32);
    // weight of a flattened block of r indices
    let mut wr = vec![T::one(); rr];
    for (z, wz) in wr.iter_mut().enumerate() {
        let mut k = z;
        for _ in 0..r {
            *wz *= w[k % nn];
            k /= nn;
        }
    }
    let mut out = vec![T::zero(); pf * qf];
    for x in 0..pf {
        let fx = &f[x * rr..(x + 1) * rr];
        for y in 0..qf {
            let gy = &g[y * rr..(y + 1) * rr];
            let mut s = T::zero();
            for z in 0..rr {
                s += fx[z] * gy[z] * wr[z];
            }
            out[x * qf + y] = s;
        }
    }
    out
}

/// A direction y for D_y and D*_y, stored as nodal values so that <y, g> = ∑ w_i y_i g_i.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction<T = f64> {
    pub values: Vec<T>,
}

impl<T: Real> Direction<T> {
    pub fn from_fn<F: Fn(T) -> T>(grid: &Grid1D<T>, f: F) -> Self {
        Direction { values: grid.nodes.iter().map(|x| f(*x)).collect() }
    }

    /// √d δ_s∘I_+^{H/2}, i.e. the function √c (s − x)_+^{H/2−1}, made exact on the grid's
    /// interpolants: piecewise constant on cell grids, local cubics otherwise.
    pub fn frac_point(grid: &Grid1D<T>, h: &Hurst<T>, s: T) -> Self {
        let al = h.alpha();
        let rc = h.c.sqrt();
        let n = grid.len();
        let mut row = vec![T::zero(); n];
        if let Some(e) = &grid.edges {
            for i in 0..n {
                let hi = e[i + 1].min(s);
                if hi > e[i] {
                    row[i] = ((s - e[i]).powf(al) - (s - hi).powf(al)) / al;
                }
            }
        } else {
            let x = &grid.nodes;
            for k in 0..n - 1 {
                if x[k] >= s {
                    break;
                }
                let w = x[k + 1] - x[k];
                let mom = power_moments(al, (s - x[k]) / w);
                let j0 = if n < 4 { 0 } else { k.saturating_sub(1).min(n - 4) };
                let j1 = (j0 + 4).min(n);
                let z: Vec<T> = (j0..j1).map(|j| (x[j] - x[k]) / w).collect();
                for (jj, zj) in z.iter().enumerate() {
                    // Lagrange basis at z_jj as a polynomial in z, lowest degree first
                    let mut poly = vec![T::one()];
                    let mut den = T::one();
                    for (ll, zl) in z.iter().enumerate() {
                        if ll == jj {
                            continue;
                        }
                        let mut next = vec![T::zero(); poly.len() + 1];
                        for (d, c) in poly.iter().enumerate() {
                            next[d + 1] += *c;
                            next[d] -= *c * *zl;
                        }
                        poly = next;
                        den *= *zj - *zl;
                    }
                    let v: T = poly.iter().zip(&mom).map(|(c, m)| *c * *m).sum();
                    row[j0 + jj] += w.powf(al) * v / den;
                }
            }
        }
        Direction { values: row.iter().zip(&grid.weights).map(|(r, w)| rc * *r / *w).collect() }
    }

    /// <y, g> on the grid.
    pub fn pair(&self, grid: &Grid1D<T>, g: &[T]) -> T {
        grid.dot(&self.values, g)
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.values.len() != n {
            return Err(Error::Shape(format!("direction has {} values on a {n}-node grid", self.values.len())));
        }
        Ok(())
    }
}

/// ∫_0^{min(1,σ)} (σ − z)^{α−1} z^p dz for p = 0..=3.
fn power_moments<T: Real>(al: T, sigma: T) -> [T; 4] {
    let mut out = [T::zero(); 4];
    if sigma > T::lit(4.0) {
        // the kernel is smooth on [0, 1] here
        let gl = crate::numcore::GaussLegendre::<T>::new(10);
        for (p, o) in out.iter_mut().enumerate() {
            *o = gl.integrate(T::zero(), T::one(), |z| (sigma - z).powf(al - T::one()) * z.powi(p as i32));
        }
        return out;
    }
    // z = σ − u: ∫_{u1}^{σ} u^{α−1}(σ − u)^p du, u1 = σ − min(1, σ)
    let u1 = sigma - sigma.min(T::one());
    let binom = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];
    for (p, o) in out.iter_mut().enumerate() {
        let mut acc = T::zero();
        for q in 0..=p {
            let e = al + T::from_usize_(q);
            let sign = if q % 2 == 0 { T::one() } else { -T::one() };
            acc += T::lit(binom[p][q]) * sign * sigma.powi((p - q) as i32) * (sigma.powf(e) - u1.powf(e)) / e;
        }
        *o = acc;
    }
    out
}

/// Uniform nodes on [lo, hi] with trapezoid weights: nodal values stand for the piecewise-linear
/// interpolant with lumped mass.
pub fn trapezoid_grid<T: Real>(lo: T, hi: T, n: usize) -> Result<Arc<Grid1D<T>>> {
    if n < 2 || !(hi > lo) {
        return Err(Error::Domain(format!("need n ≥ 2 and lo < hi, got {n} on [{lo}, {hi}]")));
    }
    let h = (hi - lo) / T::from_usize_(n - 1);
    let nodes: Vec<T> = (0..n).map(|i| lo + h * T::from_usize_(i)).collect();
    let mut weights = vec![h; n];
    weights[0] = h * T::lit(0.5);
    weights[n - 1] = h * T::lit(0.5);
    Ok(Arc::new(Grid1D::new(nodes, weights, lo, hi)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<Grid1D<f64>> {
        trapezoid_grid(0.0, 1.0, 6).unwrap()
    }

    fn sample(g: &Arc<Grid1D<f64>>, shift: f64) -> ChaosVector<f64> {
        let n = g.len();
        let first: Vec<f64> = (0..n).map(|i| (i as f64 + shift).sin()).collect();
        let second: Vec<f64> = (0..n * n).map(|k| ((k / n) as f64 * 0.3 + shift).cos() * ((k % n) as f64 * 0.3 + shift).cos()).collect();
        ChaosVector::constant(g.clone(), 0.4 + shift)
            .add(&ChaosVector::first(g.clone(), first).unwrap())
            .unwrap()
            .add(&ChaosVector::second(g.clone(), second).unwrap())
            .unwrap()
    }

    #[test]
    fn product_expectation_is_inner_product() {
        let g = grid();
        let (p, q) = (sample(&g, 0.1), sample(&g, 0.7));
        let e = p.multiply(&q).unwrap().expectation();
        let i = p.inner(&q).unwrap();
        assert!((e - i).abs() < 1e-12 * i.abs().max(1.0), "{e} {i}");
    }

    #[test]
    fn square_of_first_chaos() {
        let g = grid();
        let v: Vec<f64> = g.nodes.iter().map(|x| 1.0 + x).collect();
        let p = ChaosVector::first(g.clone(), v.clone()).unwrap();
        let sq = p.multiply(&p).unwrap();
        let norm = g.dot(&v, &v);
        assert!((sq.expectation() - norm).abs() < 1e-14);
        let two = ChaosVector::power(g.clone(), &v, 2).unwrap();
        for (a, b) in sq.kernel(2).iter().zip(two.kernel(2)) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn s_transform_turns_wick_products_into_products() {
        let g = grid();
        let (p, q) = (sample(&g, 0.2), sample(&g, 0.5));
        let xi: Vec<f64> = g.nodes.iter().map(|x| 0.3 - x * x).collect();
        let lhs = p.wick(&q).unwrap().s_transform_of(&xi).unwrap();
        let rhs = p.s_transform_of(&xi).unwrap() * q.s_transform_of(&xi).unwrap();
        assert!((lhs - rhs).abs() < 1e-12, "{lhs} {rhs}");
    }

    #[test]
    fn translation_mean_is_s_transform() {
        let g = grid();
        let p = sample(&g, 0.3);
        let xi: Vec<f64> = g.nodes.iter().map(|x| (2.0 * x).cos()).collect();
        let a = p.translate(&xi).unwrap().expectation();
        let b = p.s_transform_of(&xi).unwrap();
        assert!((a - b).abs() < 1e-12);
        let cube = p.multiply(&p).unwrap();
        assert!(cube.translate(&xi).is_err());
    }

    #[test]
    fn derivative_and_divergence_are_adjoint() {
        let g = grid();
        let (p, q) = (sample(&g, 0.4), sample(&g, 0.9));
        let y = Direction::from_fn(&g, |x| 1.0 - 0.5 * x);
        let a = p.d_op(&y).unwrap().inner(&q).unwrap();
        let b = p.inner(&q.dstar_op(&y).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} {b}");
    }

    #[test]
    fn third_moment_of_second_chaos() {
        // E[I_2(f)³] = 8 tr((F W)³)
        let g = grid();
        let n = g.len();
        let f: Vec<f64> = (0..n * n).map(|k| 1.0 / (1.0 + (k / n) as f64 + (k % n) as f64)).collect();
        let p = ChaosVector::second(g.clone(), f.clone()).unwrap();
        let m3 = p.multiply(&p).unwrap().inner(&p).unwrap();
        let w = &g.weights;
        let fw = nalgebra::DMatrix::from_fn(n, n, |i, j| f[i * n + j] * w[j]);
        let tr = (&fw * &fw * &fw).trace();
        assert!((m3 - 8.0 * tr).abs() < 1e-12 * tr.abs(), "{m3} {tr}");
    }

    #[test]
    fn order_cap_is_enforced() {
        let g = grid();
        let p = ChaosVector::power(g.clone(), &vec![1.0; g.len()], 3).unwrap();
        assert!(matches!(p.wick(&p), Err(Error::Unsupported(_))));
        let y = Direction::from_fn(&g, |_| 1.0);
        let four = ChaosVector::power(g.clone(), &vec![1.0; g.len()], 4).unwrap();
        assert!(four.dstar_op(&y).is_err());
    }

    #[test]
    fn frac_point_integrates_polynomials_exactly() {
        let h = Hurst::new(0.7f64).unwrap();
        let g = trapezoid_grid(0.0, 1.0, 41).unwrap();
        let s: f64 = 0.83;
        let y = Direction::frac_point(&g, &h, s);
        let al = h.alpha();
        // ∫_0^s √c (s−x)^{α−1} x dx = √c s^{α+1}/(α(α+1))
        let exact = h.c.sqrt() * s.powf(al + 1.0) / (al * (al + 1.0));
        let got = y.pair(&g, &g.nodes);
        assert!((got - exact).abs() < 1e-10, "{got} {exact}");
    }
}
