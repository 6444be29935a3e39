//! Product-integration discretization of (K v)(s) = ∫_0^t |s−r|^{H−1} v(r) dr on a mesh graded
//! toward both ends: v is taken piecewise linear and each interval is integrated in closed form.

use nalgebra::DMatrix;

use super::Hurst;
use crate::error::{domain, Result};
use crate::numcore::Real;

#[derive(Debug, Clone)]
pub struct AbsPowOp<T = f64> {
    pub t: T,
    pub beta: T,
    /// Mesh points 0 = r_0 < … < r_m = t.
    pub nodes: Vec<T>,
    /// Trapezoid weights for ∫_0^t on the mesh.
    pub weights: Vec<T>,
    /// Row-major (m+1)×(m+1) matrix, row i giving K v at r_i.
    w: Vec<T>,
}

/// Mesh with points t·u^q/(u^q + (1−u)^q), u = j/m.
pub fn graded_mesh<T: Real>(t: T, m: usize, q: T) -> Vec<T> {
    (0..=m)
        .map(|j| {
            let u = T::from_usize_(j) / T::from_usize_(m);
            let a = u.powf(q);
            let b = (T::one() - u).powf(q);
            t * a / (a + b)
        })
        .collect()
}

impl<T: Real> AbsPowOp<T> {
    pub fn new(h: &Hurst<T>, t: T, m: usize) -> Result<Self> {
        if !(t > T::zero()) || m < 4 {
            return domain(format!("need t > 0 and at least 4 intervals (t = {t}, m = {m})"));
        }
        let nodes = graded_mesh(t, m, T::lit(2.5));
        let beta = h.h - T::one();
        let n = m + 1;
        let b1 = beta + T::one();
        let b2 = beta + T::lit(2.0);
        let mut w = vec![T::zero(); n * n];
        for i in 0..n {
            let s = nodes[i];
            let row = &mut w[i * n..(i + 1) * n];
            for j in 0..m {
                let (rl, rr) = (nodes[j], nodes[j + 1]);
                let len = rr - rl;
                // I0 = ∫|s−r|^β dr, J = ∫|s−r|^β (r − r_l) dr over [r_l, r_r]
                let (i0, jj) = if i <= j {
                    let (u0, u1) = (rl - s, rr - s);
                    let i0 = (u1.powf(b1) - u0.powf(b1)) / b1;
                    let i1 = (u1.powf(b2) - u0.powf(b2)) / b2;
                    (i0, i1 + (s - rl) * i0)
                } else {
                    let (u0, u1) = (s - rr, s - rl);
                    let i0 = (u1.powf(b1) - u0.powf(b1)) / b1;
                    let i1 = (u1.powf(b2) - u0.powf(b2)) / b2;
                    (i0, (s - rl) * i0 - i1)
                };
                row[j] += i0 - jj / len;
                row[j + 1] += jj / len;
            }
        }
        let mut weights = vec![T::zero(); n];
        for j in 0..m {
            let half = (nodes[j + 1] - nodes[j]) * T::lit(0.5);
            weights[j] += half;
            weights[j + 1] += half;
        }
        Ok(AbsPowOp { t, beta, nodes, weights, w })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n).map(|i| self.w[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| *a * *b).sum()).collect()
    }

    /// ∫_0^t u v by the trapezoid rule on the mesh.
    pub fn dot(&self, u: &[T], v: &[T]) -> T {
        self.weights.iter().zip(u).zip(v).map(|((w, a), b)| *w * *a * *b).sum()
    }

    /// ∫∫ u(s) K^{(p)}(s,r) v(r) ds dr where K^{(p)} is the p-fold composition (p ≥ 1)
    /// of |s−r|^{H−1}, i.e. the chain kernel with p−1 intermediate points.
    pub fn chain_form(&self, u: &[T], v: &[T], p: usize) -> T {
        let mut x = v.to_vec();
        for _ in 0..p {
            x = self.apply(&x);
        }
        self.dot(u, &x)
    }

    pub fn sample<F: Fn(T) -> T>(&self, f: F) -> Vec<T> {
        self.nodes.iter().map(|x| f(*x)).collect()
    }

    /// Eigenvalues of the collocation matrix (complex in general; the leading ones are real).
    pub fn eigenvalues(&self) -> Vec<num_complex::Complex<f64>> {
        let n = self.len();
        let m = DMatrix::from_row_iterator(n, n, self.w.iter().map(|v| v.f64()));
        m.complex_eigenvalues().iter().copied().collect()
    }
}
