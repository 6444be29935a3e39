//! Symmetric kernels on cell grids. Values are cell averages, so a grid function `g` stands for
//! the piecewise-constant function with those averages and all forms are exact for it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Hurst;
use crate::error::{Error, Result};
use crate::numcore::quad::{Endpoint, PowerRule};
use crate::numcore::{Grid1D, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct KernelGrid<T = f64> {
    pub grid: Grid1D<T>,
    /// n×n row-major cell averages.
    pub values: Vec<T>,
    pub t: T,
    pub hurst: Option<T>,
    /// L² mass of the diagonal singularity below cell resolution (0 when not tracked).
    #[serde(default)]
    pub subcell_l2: T,
}

impl<T: Real> KernelGrid<T> {
    pub fn zeros(grid: Grid1D<T>, t: T) -> Self {
        let n = grid.len();
        KernelGrid { grid, values: vec![T::zero(); n * n], t, hurst: None, subcell_l2: T::zero() }
    }

    pub fn from_values(grid: Grid1D<T>, values: Vec<T>, t: T) -> Result<Self> {
        let n = grid.len();
        if values.len() != n * n {
            return Err(Error::Shape(format!("{} values for a {n}-node grid", values.len())));
        }
        Ok(KernelGrid { grid, values, t, hurst: None, subcell_l2: T::zero() })
    }

    /// Cells for f_t: `n_core` Chebyshev cells on [0, t] and geometric cells to the left,
    /// ratio `near_ratio` down to −2t and 1.5 beyond, until −far·t.
    pub fn default_grid(t: T, n_core: usize, near_ratio: T, far: T) -> Result<Grid1D<T>> {
        let core = Grid1D::chebyshev_cells(T::zero(), t, n_core)?;
        let core_edges = core.edges.clone().unwrap();
        let mut left = vec![T::zero()];
        let mut w = core.weights[0];
        while *left.last().unwrap() > -far * t {
            let x = *left.last().unwrap();
            w *= if x > -T::lit(2.0) * t { near_ratio } else { T::lit(1.5) };
            left.push(x - w);
        }
        left.reverse();
        left.pop();
        left.extend(core_edges);
        Grid1D::cells(left)
    }

    /// Cell averages of f_t: F_ij = ∫_0^t Ā_i(s)Ā_j(s) ds with
    /// Ā_i(s) = √c [(s−l_i)_+^{H/2} − (s−r_i)_+^{H/2}] / (H/2 · h_i).
    pub fn assemble(h: &Hurst<T>, t: T, grid: Grid1D<T>) -> Result<Self> {
        let edges = grid.edges.clone().ok_or_else(|| Error::Domain("kernel assembly needs a cell grid".into()))?;
        if !(t > T::zero()) {
            return Err(Error::Domain(format!("time must be positive, got {t}")));
        }
        let n = grid.len();
        // s-panels between all edges inside (0, t), graded toward each left end
        let mut bps: Vec<T> = edges.iter().copied().filter(|e| *e > T::zero() && *e < t).collect();
        bps.insert(0, T::zero());
        bps.push(t);
        let rule = PowerRule::<T>::new(6, 0.3, 6);
        let (mut sn, mut sw) = (Vec::new(), Vec::new());
        for p in bps.windows(2) {
            let (x, w) = rule.mapped(p[0], p[1], T::zero(), Endpoint::Lo);
            sn.extend(x);
            sw.extend(w);
        }
        let alpha = h.alpha();
        let sc = h.c.sqrt() / alpha;
        let pos = |v: T| if v > T::zero() { v.powf(alpha) } else { T::zero() };
        // rows scaled by √w_s so F = A Aᵀ
        let a: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let (l, r) = (edges[i], edges[i + 1]);
                let hi = r - l;
                sn.iter().zip(&sw).map(|(s, w)| sc * (pos(*s - l) - pos(*s - r)) / hi * w.sqrt()).collect()
            })
            .collect();
        let rows: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| if j < i { T::zero() } else { dot(&a[i], &a[j]) }).collect())
            .collect();
        let mut values = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                values[i * n + j] = rows[i][j];
                values[j * n + i] = rows[i][j];
            }
        }
        let subcell = subcell_defect(h, &edges, t);
        Ok(KernelGrid { grid, values, t, hurst: Some(h.h), subcell_l2: subcell })
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.n() + j]
    }

    /// (T g)_i = ∑_j F_ij w_j g_j.
    pub fn apply(&self, g: &[T]) -> Vec<T> {
        let n = self.n();
        let wg: Vec<T> = self.grid.weights.iter().zip(g).map(|(w, x)| *w * *x).collect();
        (0..n).map(|i| dot(&self.values[i * n..(i + 1) * n], &wg)).collect()
    }

    /// ∑_ij w_i w_j F_ij v_i v_j.
    pub fn quad_form(&self, v: &[T]) -> T {
        self.grid.dot(&self.apply(v), v)
    }

    /// ∑_ij w_i w_j F_ij².
    pub fn frobenius_sq(&self) -> T {
        let n = self.n();
        let w = &self.grid.weights;
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                let f = self.values[i * n + j];
                s += w[i] * w[j] * f * f;
            }
        }
        s
    }

    /// Weighted trace of A ⊗₁ A, i.e. ‖A‖², including the sub-cell singular mass.
    pub fn trace_contract1(&self) -> T {
        self.frobenius_sq() + self.subcell_l2
    }

    pub fn symmetry_error(&self) -> T {
        let n = self.n();
        let mut e = T::zero();
        for i in 0..n {
            for j in 0..i {
                e = e.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        e
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("kernel grid serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Domain(format!("bad kernel grid json: {e}")))
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// C(x,z) = ∑_j w_j A(x,y_j) B(y_j,z).
pub fn contract1<T: Real>(a: &KernelGrid<T>, b: &KernelGrid<T>) -> Result<KernelGrid<T>> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::Shape("contraction needs kernels on the same grid".into()));
    }
    let n = a.n();
    let w = &a.grid.weights;
    let bt: Vec<Vec<T>> = (0..n).map(|j| (0..n).map(|k| b.get(k, j) * w[k]).collect()).collect();
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| dot(&a.values[i * n..(i + 1) * n], &bt[j])).collect())
        .collect();
    let values = rows.into_iter().flatten().collect();
    Ok(KernelGrid { grid: a.grid.clone(), values, t: a.t, hurst: a.hurst, subcell_l2: T::zero() })
}

/// Grid version of T_t: (T g)(y_i) = ∑_j f(y_i, x_j) w_j g_j.
pub fn apply_t<T: Real>(kg: &KernelGrid<T>, g: &[T]) -> Result<Vec<T>> {
    if g.len() != kg.n() {
        return Err(Error::Shape(format!("{} values for a {}-node grid", g.len(), kg.n())));
    }
    Ok(kg.apply(g))
}

/// ∫∫ over a cell pair of |x−y|^γ, via G(z) = |z|^{γ+2}/((γ+1)(γ+2)).
fn pair_power<T: Real>(gamma: T, a: T, b: T, c: T, d: T) -> T {
    let k = (gamma + T::one()) * (gamma + T::lit(2.0));
    let g = |z: T| z.abs().powf(gamma + T::lit(2.0)) / k;
    g(b - c) + g(a - d) - g(a - c) - g(b - d)
}

/// Near the diagonal inside (0, t) the kernel is κ|x−y|^{H−1} plus a smooth part; the L² mass
/// that cell averages cannot carry is computed for that singular part on neighbouring cells.
fn subcell_defect<T: Real>(h: &Hurst<T>, edges: &[T], t: T) -> T {
    let b = h.h - T::one();
    let k2 = h.kappa * h.kappa;
    let n = edges.len() - 1;
    let inside: Vec<usize> = (0..n).filter(|&i| edges[i] >= T::zero() && edges[i + 1] <= t).collect();
    let mut s = T::zero();
    for (p, &i) in inside.iter().enumerate() {
        let (a0, b0) = (edges[i], edges[i + 1]);
        let hi = b0 - a0;
        for &j in inside.iter().skip(p.saturating_sub(4)).take(9) {
            let (c0, d0) = (edges[j], edges[j + 1]);
            let hj = d0 - c0;
            let m2 = pair_power(b + b, a0, b0, c0, d0);
            let m1 = pair_power(b, a0, b0, c0, d0);
            s += k2 * (m2 - m1 * m1 / (hi * hj));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::FKernel;
    use approx::assert_relative_eq;

    #[test]
    fn pair_power_constant() {
        assert_relative_eq!(pair_power(0.0f64, 0.0, 0.5, 1.0, 1.7), 0.35, max_relative = 1e-13);
    }

    #[test]
    fn cell_averages_match_pointwise_kernel_off_diagonal() {
        let h = Hurst::new(0.75f64).unwrap();
        let g = Grid1D::cells(vec![-3.0, -1.0, -0.2, 0.0, 0.3, 0.6, 1.0]).unwrap();
        let kg = KernelGrid::assemble(&h, 1.0, g.clone()).unwrap();
        assert_eq!(kg.symmetry_error(), 0.0);
        let fk = FKernel::new(h);
        // cells 1 and 4: average by tensor Gauss
        let gl = crate::numcore::GaussLegendre::<f64>::new(10);
        let e = g.edges.clone().unwrap();
        let avg = gl.integrate(e[1], e[2], |x| gl.integrate(e[4], e[5], |y| fk.eval(1.0, x, y))) / (g.weights[1] * g.weights[4]);
        assert_relative_eq!(kg.get(1, 4), avg, max_relative = 1e-7);
    }

    #[test]
    fn zero_kernel_contracts_to_zero() {
        let g = Grid1D::<f64>::chebyshev_cells(0.0, 1.0, 8).unwrap();
        let z = KernelGrid::zeros(g, 1.0);
        let c = contract1(&z, &z).unwrap();
        assert!(c.values.iter().all(|v| *v == 0.0));
        let other = KernelGrid::zeros(Grid1D::chebyshev_cells(0.0, 1.0, 9).unwrap(), 1.0);
        assert!(contract1(&z, &other).is_err());
    }

    #[test]
    fn json_round_trip() {
        let h = Hurst::new(0.7f64).unwrap();
        let g = Grid1D::cells(vec![-1.0, 0.0, 0.5, 1.0]).unwrap();
        let kg = KernelGrid::assemble(&h, 1.0, g).unwrap();
        let back = KernelGrid::from_json(&kg.to_json()).unwrap();
        assert_eq!(back, kg);
    }

    #[test]
    fn self_adjoint_on_grid() {
        let h = Hurst::new(0.8f64).unwrap();
        let g = KernelGrid::default_grid(1.0, 40, 1.3, 1e6).unwrap();
        let kg = KernelGrid::assemble(&h, 1.0, g).unwrap();
        let a: Vec<f64> = kg.grid.nodes.iter().map(|x| (-x * x).exp()).collect();
        let b: Vec<f64> = kg.grid.nodes.iter().map(|x| (x - 0.3).cos() / (1.0 + x * x)).collect();
        let lhs = kg.grid.dot(&kg.apply(&a), &b);
        let rhs = kg.grid.dot(&a, &kg.apply(&b));
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }
}
