//! Path simulation on a time grid by discretizing the double Wiener integral.
//!
//! The x-axis is cut into cells carrying independent Gaussians ΔW_i with basis functions ψ_i,
//! Y(s) = ∑ a_i(s) ΔW_i is the projection of the kernel at s, and
//! X_t = ∫_0^t (Y(s)² − diag(s)) ds, where the diagonal either drops the i = j terms of the
//! double sum or subtracts their mean. The s-integral uses Gauss nodes on uniform cells aligned
//! with the x-cells.
//!
//! Double sum: ψ_i = 1 on the cell, kernel (s − x)_+^{H/2−1}; the uniform cells are handled
//! by FFT convolution and the geometric cells far to the left by Chebyshev interpolation in s.
//! Finite interval: ψ_i = x^{−H/2} on cells of (0, t_max), kernel s^{H/2}x^{−H/2}(s − x)_+^{H/2−1}.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernels::Hurst;
use crate::numcore::grid::Sing;
use crate::numcore::quad::{Endpoint, PowerRule};
use crate::numcore::rng::par_blocks;
use crate::numcore::{GaussLegendre, Grid1D, Real, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathMethod {
    DoubleSum,
    FiniteInterval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Diagonal {
    /// Drop the i = j terms of the double sum.
    Excluded,
    /// Keep them and subtract their mean, which makes X_t the double Wiener integral of the
    /// projected kernel.
    Centered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    /// Uniform s-cells on [0, t_max]; x-cells share their edges.
    pub cells: usize,
    /// Gauss nodes per s-cell.
    pub gauss: usize,
    /// Uniform x-cells continue this far left of 0, as a fraction of t_max (double sum only).
    pub core_left: f64,
    /// Growth ratio of the geometric cells further left, or toward 0 for the finite interval.
    pub ratio: f64,
    /// Left end of the x-grid (double sum only).
    pub far: f64,
    pub diagonal: Diagonal,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig { cells: 2048, gauss: 3, core_left: 0.25, ratio: 1.3, far: 1e60, diagonal: Diagonal::Centered }
    }
}

/// Simulated values of X at `times`, one row per path.
#[derive(Debug, Clone, Serialize)]
pub struct PathEnsemble<T = f64> {
    pub times: Vec<T>,
    pub samples: Vec<Vec<T>>,
    pub seed: SeedSpec,
    pub method: PathMethod,
    pub config: PathConfig,
}

impl<T: Real> PathEnsemble<T> {
    pub fn n_paths(&self) -> usize {
        self.samples.len()
    }

    pub fn column(&self, k: usize) -> Vec<T> {
        self.samples.iter().map(|r| r[k]).collect()
    }

    /// Sample covariance matrix of the time columns.
    pub fn covariance(&self) -> Vec<Vec<f64>> {
        let n = self.n_paths() as f64;
        let k = self.times.len();
        let mean: Vec<f64> = (0..k).map(|j| self.samples.iter().map(|r| r[j].f64()).sum::<f64>() / n).collect();
        let mut c = vec![vec![0.0; k]; k];
        for r in &self.samples {
            for i in 0..k {
                let di = r[i].f64() - mean[i];
                for j in 0..=i {
                    c[i][j] += di * (r[j].f64() - mean[j]);
                }
            }
        }
        for i in 0..k {
            for j in 0..=i {
                c[i][j] /= n - 1.0;
                c[j][i] = c[i][j];
            }
        }
        c
    }
}

/// Uniform-cell part of the double sum: per Gauss offset q the kernel sequence k_q[m] with
/// a_i(s) = k_q[j + i0 − i] for s in s-cell j, and its FFT.
struct Toeplitz {
    i0: usize,
    nc: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    khat: Vec<Vec<Complex<f64>>>,
    k2hat: Vec<Vec<Complex<f64>>>,
    /// ∑_i k_q[m]² Δx over the uniform cells, per s-node (the centered diagonal).
    mean_diag: Vec<f64>,
}

/// Far-left cells: their kernels are smooth in s, so they are sampled on Chebyshev nodes.
struct FarPart {
    a: DMatrix<f64>,
    interp: DMatrix<f64>,
    sd: Vec<f64>,
    mean_diag: Vec<f64>,
}

enum Engine {
    Dense(DMatrix<f64>),
    Fast(Toeplitz, FarPart),
}

/// Discretized model for one H, time grid and method.
pub struct PathSimulator {
    pub h: Hurst<f64>,
    pub method: PathMethod,
    pub config: PathConfig,
    /// Times after snapping to the s-cell edges.
    pub times: Vec<f64>,
    ends: Vec<usize>,
    s_nodes: Vec<f64>,
    s_weights: Vec<f64>,
    edges: Vec<f64>,
    /// Variance of ΔW_i.
    var: Vec<f64>,
    engine: Engine,
}

const FAR_CHEB: usize = 32;
/// Largest dense kernel matrix, in entries.
const DENSE_LIMIT: usize = 1 << 24;

fn chebyshev_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * 0.5 * (1.0 - (std::f64::consts::PI * k as f64 / (n - 1) as f64).cos())).collect()
}

/// Barycentric Lagrange weights at x for Chebyshev points of the second kind.
fn cheb_basis(pts: &[f64], x: f64) -> Vec<f64> {
    let n = pts.len();
    let mut out = vec![0.0; n];
    if let Some(j) = pts.iter().position(|p| *p == x) {
        out[j] = 1.0;
        return out;
    }
    let mut den = 0.0;
    for (j, p) in pts.iter().enumerate() {
        let w = if j % 2 == 0 { 1.0 } else { -1.0 } * if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
        out[j] = w / (x - p);
        den += out[j];
    }
    out.iter().map(|v| v / den).collect()
}

impl PathSimulator {
    pub fn new(h: &Hurst<f64>, times: &[f64], method: PathMethod, config: PathConfig) -> Result<Self> {
        if times.is_empty() || times.iter().any(|t| !(*t > 0.0) || !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return domain("times must be positive and increasing");
        }
        if config.cells < 4 || config.gauss == 0 || !(config.ratio > 1.0) || !(config.core_left >= 0.0) {
            return domain(format!("bad path configuration {config:?}"));
        }
        let t_max = *times.last().unwrap();
        let ns = config.cells;
        let dt = t_max / ns as f64;
        let snapped: Vec<usize> = times.iter().map(|t| ((t / dt).round() as usize).max(1)).collect();
        if snapped.windows(2).any(|w| w[1] <= w[0]) {
            return domain("times closer than one s-cell");
        }
        let gl = GaussLegendre::<f64>::new(config.gauss);
        let (mut s_nodes, mut s_weights) = (Vec::new(), Vec::new());
        for j in 0..ns {
            gl.push_mapped(j as f64 * dt, (j + 1) as f64 * dt, &mut s_nodes, &mut s_weights);
        }
        let ends = snapped.iter().map(|j| j * config.gauss).collect();
        let times = snapped.iter().map(|j| *j as f64 * dt).collect();
        let al = h.alpha();
        match method {
            PathMethod::DoubleSum => {
                let i0 = (config.core_left * ns as f64).round() as usize;
                let core_lo = -(i0 as f64) * dt;
                if config.far <= -core_lo {
                    return domain("far end must lie left of the uniform cells");
                }
                let edges = Grid1D::<f64>::halfline_cells(core_lo, t_max, i0 + ns, config.ratio, config.far)?.edges.unwrap();
                let var: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
                let nc = i0 + ns;
                let nf = edges.len() - 1 - nc;
                let rc = h.c.sqrt();
                let len = (2 * nc).next_power_of_two();
                let mut planner = FftPlanner::<f64>::new();
                let fwd = planner.plan_fft_forward(len);
                let inv = planner.plan_fft_inverse(len);
                let g: Vec<f64> = gl.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect();
                let mut khat = Vec::new();
                let mut k2hat = Vec::new();
                let mut mean_core = vec![0.0; s_nodes.len()];
                for (q, gq) in g.iter().enumerate() {
                    let k: Vec<f64> = (0..nc)
                        .map(|m| {
                            let u = m as f64 + gq;
                            rc * dt.powf(al - 1.0) * (u.powf(al) - (u - 1.0).max(0.0).powf(al)) / al
                        })
                        .collect();
                    // prefix sums of k² give the centered diagonal at every s-node
                    let mut pre = vec![0.0; nc + 1];
                    for m in 0..nc {
                        pre[m + 1] = pre[m] + k[m] * k[m] * dt;
                    }
                    for j in 0..ns {
                        mean_core[j * config.gauss + q] = pre[j + i0 + 1];
                    }
                    let mut a: Vec<Complex<f64>> = (0..len).map(|m| Complex::new(if m < nc { k[m] } else { 0.0 }, 0.0)).collect();
                    let mut b: Vec<Complex<f64>> = a.iter().map(|v| Complex::new(v.re * v.re, 0.0)).collect();
                    fwd.process(&mut a);
                    fwd.process(&mut b);
                    khat.push(a);
                    k2hat.push(b);
                }
                let cheb = chebyshev_points(0.0, t_max, FAR_CHEB);
                let fa = DMatrix::from_fn(FAR_CHEB, nf, |k, f| {
                    let (lo, hi) = (edges[f], edges[f + 1]);
                    let s = cheb[k];
                    rc * ((s - lo).powf(al) - (s - hi).powf(al)) / (al * (hi - lo))
                });
                let interp = DMatrix::from_fn(s_nodes.len(), FAR_CHEB, |r, k| cheb_basis(&cheb, s_nodes[r])[k]);
                let far_mean: Vec<f64> = (0..s_nodes.len())
                    .map(|r| {
                        let s = s_nodes[r];
                        (0..nf)
                            .map(|f| {
                                let (lo, hi) = (edges[f], edges[f + 1]);
                                let a = rc * ((s - lo).powf(al) - (s - hi).powf(al)) / (al * (hi - lo));
                                a * a * var[f]
                            })
                            .sum()
                    })
                    .collect();
                let far = FarPart { a: fa, interp, sd: var[..nf].iter().map(|v| v.sqrt()).collect(), mean_diag: far_mean };
                let tz = Toeplitz { i0, nc, fwd, inv, khat, k2hat, mean_diag: mean_core };
                Ok(PathSimulator { h: *h, method, config, times, ends, s_nodes, s_weights, edges, var, engine: Engine::Fast(tz, far) })
            }
            PathMethod::FiniteInterval => {
                // [0, ε] as one cell (ψ = x^{−H/2} makes it exact there), geometric cells up to dt,
                // then the uniform cells
                let mut e = vec![dt];
                while *e.last().unwrap() > dt * 1e-8 {
                    let next = e.last().unwrap() / config.ratio;
                    e.push(next);
                }
                e.push(0.0);
                e.reverse();
                e.extend((2..=ns).map(|j| j as f64 * dt));
                let nx = e.len() - 1;
                if s_nodes.len() * nx > DENSE_LIMIT {
                    return Err(Error::Memory(format!("finite-interval kernel needs {} entries", s_nodes.len() * nx)));
                }
                let p = 1.0 - 2.0 * al;
                let var: Vec<f64> = e.windows(2).map(|w| (w[1].powf(p) - w[0].powf(p)) / p).collect();
                let mut sim = PathSimulator { h: *h, method, config, times, ends, s_nodes, s_weights, edges: e, var, engine: Engine::Dense(DMatrix::zeros(0, 0)) };
                let a = sim.dense_kernel()?;
                sim.engine = Engine::Dense(a);
                Ok(sim)
            }
        }
    }

    pub fn n_cells(&self) -> usize {
        self.var.len()
    }

    /// Kernel projection a_i(s) for every s-node and cell.
    fn dense_kernel(&self) -> Result<DMatrix<f64>> {
        let ns = self.s_nodes.len();
        let nx = self.var.len();
        if ns * nx > DENSE_LIMIT {
            return Err(Error::Memory(format!("dense kernel needs {} entries", ns * nx)));
        }
        let al = self.h.alpha();
        let rc = self.h.c.sqrt();
        let rule = PowerRule::<f64>::default();
        let gl = GaussLegendre::<f64>::new(8);
        let e = &self.edges;
        let mut a = DMatrix::<f64>::zeros(ns, nx);
        for (r, &s) in self.s_nodes.iter().enumerate() {
            for i in 0..nx {
                let (lo, hi) = (e[i], e[i + 1].min(s));
                if hi <= lo {
                    continue;
                }
                a[(r, i)] = match self.method {
                    PathMethod::DoubleSum => rc * ((s - lo).powf(al) - (s - hi).powf(al)) / (al * self.var[i]),
                    PathMethod::FiniteInterval => {
                        // <kernel, ψ_i>/‖ψ_i‖² with ψ_i = x^{−α}
                        let f = |x: f64| x.powf(-2.0 * al) * (s - x).powf(al - 1.0);
                        let v = if lo == 0.0 {
                            rule.integrate_weighted(|x| (s - x).powf(al - 1.0), lo, hi, -2.0 * al, Endpoint::Lo)?
                        } else if s - hi >= hi - lo {
                            gl.integrate(lo, hi, f)
                        } else {
                            Grid1D::singular(lo, hi, &[Sing { at: s, gamma: al - 1.0 }], &rule, hi - lo)?.integrate_fn(f)
                        };
                        rc * s.powf(al) * v / self.var[i]
                    }
                };
            }
        }
        Ok(a)
    }

    /// Covariance of Y at two s-nodes in the discretized model.
    pub fn noise_covariance(&self, p: usize, q: usize) -> Result<f64> {
        let a = self.dense_kernel()?;
        Ok((0..self.var.len()).map(|i| a[(p, i)] * a[(q, i)] * self.var[i]).sum())
    }

    pub fn s_nodes(&self) -> &[f64] {
        &self.s_nodes
    }

    /// Exact covariance matrix of the discretized X at the snapped times (dense; small grids).
    pub fn discrete_covariance(&self) -> Result<Vec<Vec<f64>>> {
        let a = self.dense_kernel()?;
        let ns = a.nrows();
        let nx = self.var.len();
        let b = DMatrix::from_fn(ns, nx, |r, i| a[(r, i)] * self.var[i].sqrt());
        let c = &b * b.transpose();
        let mut cum = vec![vec![0.0; ns + 1]; ns + 1];
        for p in 0..ns {
            for q in 0..ns {
                let v = self.s_weights[p] * self.s_weights[q] * c[(p, q)] * c[(p, q)];
                cum[p + 1][q + 1] = v + cum[p][q + 1] + cum[p + 1][q] - cum[p][q];
            }
        }
        // ∫_0^t a_i² ds · var_i, the weight of ΔW_i² in X_t
        let fdiag: Vec<Vec<f64>> = self
            .ends
            .iter()
            .map(|&e| (0..nx).map(|i| (0..e).map(|r| self.s_weights[r] * a[(r, i)] * a[(r, i)]).sum::<f64>() * self.var[i]).collect())
            .collect();
        let k = self.ends.len();
        let mut out = vec![vec![0.0; k]; k];
        for x in 0..k {
            for y in 0..k {
                let mut v = 2.0 * cum[self.ends[x]][self.ends[y]];
                if self.config.diagonal == Diagonal::Excluded {
                    v -= 2.0 * fdiag[x].iter().zip(&fdiag[y]).map(|(p, q)| p * q).sum::<f64>();
                }
                out[x][y] = v;
            }
        }
        Ok(out)
    }

    /// Y and the diagonal term at every s-node for one draw of the cell Gaussians.
    fn noise<R: Rng>(&self, rng: &mut R, scratch: &mut Vec<Complex<f64>>) -> (Vec<f64>, Vec<f64>) {
        let nsn = self.s_nodes.len();
        let z: Vec<f64> = self.var.iter().map(|v| {
            let g: f64 = StandardNormal.sample(rng);
            g * v.sqrt()
        }).collect();
        let excluded = self.config.diagonal == Diagonal::Excluded;
        match &self.engine {
            Engine::Dense(a) => {
                let zv = DMatrix::from_column_slice(z.len(), 1, &z);
                let y = a * &zv;
                let d = if excluded {
                    let a2 = a.map(|v| v * v);
                    (a2 * zv.map(|v| v * v)).iter().copied().collect()
                } else {
                    (0..nsn).map(|r| (0..z.len()).map(|i| a[(r, i)] * a[(r, i)] * self.var[i]).sum()).collect()
                };
                (y.iter().copied().collect(), d)
            }
            Engine::Fast(tz, far) => {
                let nf = far.sd.len();
                let (zf, zc) = z.split_at(nf);
                let len = tz.khat[0].len();
                let q_count = tz.khat.len();
                let ns = nsn / q_count;
                let mut y = vec![0.0; nsn];
                let mut d = vec![0.0; nsn];
                let conv = |src: &[f64], kh: &[Vec<Complex<f64>>], out: &mut [f64], scratch: &mut Vec<Complex<f64>>| {
                    let mut b: Vec<Complex<f64>> = (0..len).map(|i| Complex::new(if i < tz.nc { src[i] } else { 0.0 }, 0.0)).collect();
                    scratch.resize(tz.fwd.get_inplace_scratch_len().max(tz.inv.get_inplace_scratch_len()), Complex::new(0.0, 0.0));
                    tz.fwd.process_with_scratch(&mut b, scratch);
                    for (q, k) in kh.iter().enumerate() {
                        let mut c: Vec<Complex<f64>> = b.iter().zip(k).map(|(x, y)| x * y).collect();
                        tz.inv.process_with_scratch(&mut c, scratch);
                        for j in 0..ns {
                            out[j * q_count + q] += c[j + tz.i0].re / len as f64;
                        }
                    }
                };
                conv(zc, &tz.khat, &mut y, scratch);
                let yk = &far.a * DMatrix::from_column_slice(nf, 1, zf);
                let yf = &far.interp * yk;
                for (v, f) in y.iter_mut().zip(yf.iter()) {
                    *v += f;
                }
                if excluded {
                    let zc2: Vec<f64> = zc.iter().map(|v| v * v).collect();
                    conv(&zc2, &tz.k2hat, &mut d, scratch);
                    let zf2 = DMatrix::from_iterator(nf, 1, zf.iter().map(|v| v * v));
                    let dk = far.a.map(|v| v * v) * zf2;
                    let df = &far.interp * dk;
                    for (v, f) in d.iter_mut().zip(df.iter()) {
                        *v += f;
                    }
                } else {
                    for r in 0..nsn {
                        d[r] = tz.mean_diag[r] + far.mean_diag[r];
                    }
                }
                (y, d)
            }
        }
    }

    pub fn simulate<T: Real>(&self, n_paths: usize, seed: SeedSpec) -> Result<PathEnsemble<T>> {
        if n_paths == 0 {
            return domain("need at least one path");
        }
        let block = 64;
        let nb = n_paths.div_ceil(block);
        let parts = par_blocks(seed, nb, |b, rng| {
            let n = block.min(n_paths - b * block);
            let mut scratch = Vec::new();
            (0..n)
                .map(|_| {
                    let (y, d) = self.noise(rng, &mut scratch);
                    let mut row = Vec::with_capacity(self.ends.len());
                    let mut acc = 0.0;
                    let mut r = 0;
                    for &e in &self.ends {
                        while r < e {
                            acc += self.s_weights[r] * (y[r] * y[r] - d[r]);
                            r += 1;
                        }
                        row.push(T::lit(acc));
                    }
                    row
                })
                .collect::<Vec<_>>()
        });
        Ok(PathEnsemble {
            times: self.times.iter().map(|t| T::lit(*t)).collect(),
            samples: parts.into_iter().flatten().collect(),
            seed,
            method: self.method,
            config: self.config,
        })
    }
}

/// One-shot simulation.
pub fn simulate_paths<T: Real>(times: &[f64], h: &Hurst<f64>, n_paths: usize, seed: SeedSpec, method: PathMethod, config: PathConfig) -> Result<PathEnsemble<T>> {
    PathSimulator::new(h, times, method, config)?.simulate(n_paths, seed)
}

/// ½(t^{2H} + s^{2H} − |t − s|^{2H}).
pub fn rosenblatt_cov(h: f64, t: f64, s: f64) -> f64 {
    0.5 * (t.powf(2.0 * h) + s.powf(2.0 * h) - (t - s).abs().powf(2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    const T5: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

    fn small(method: PathMethod, diagonal: Diagonal) -> PathSimulator {
        let h = Hurst::new(0.75).unwrap();
        PathSimulator::new(&h, &T5, method, PathConfig { cells: 40, diagonal, ..Default::default() }).unwrap()
    }

    #[test]
    fn fast_engine_matches_dense_kernel() {
        for diag in [Diagonal::Centered, Diagonal::Excluded] {
            let sim = small(PathMethod::DoubleSum, diag);
            let a = sim.dense_kernel().unwrap();
            let seed = SeedSpec::new(5, 1);
            let mut r1 = seed.rng();
            let (y, d) = sim.noise(&mut r1, &mut Vec::new());
            let mut r2 = seed.rng();
            let z: Vec<f64> = sim.var.iter().map(|v| { let g: f64 = StandardNormal.sample(&mut r2); g * v.sqrt() }).collect();
            for r in 0..y.len() {
                let yd: f64 = (0..z.len()).map(|i| a[(r, i)] * z[i]).sum();
                let dd: f64 = match diag {
                    Diagonal::Excluded => (0..z.len()).map(|i| a[(r, i)] * a[(r, i)] * z[i] * z[i]).sum(),
                    Diagonal::Centered => (0..z.len()).map(|i| a[(r, i)] * a[(r, i)] * sim.var[i]).sum(),
                };
                assert!((y[r] - yd).abs() < 1e-9 * (1.0 + yd.abs()), "{r} {} {yd}", y[r]);
                assert!((d[r] - dd).abs() < 1e-9 * (1.0 + dd), "{r} {} {dd}", d[r]);
            }
        }
    }

    #[test]
    fn monte_carlo_matches_discrete_covariance() {
        for method in [PathMethod::DoubleSum, PathMethod::FiniteInterval] {
            let sim = small(method, Diagonal::Centered);
            let exact = sim.discrete_covariance().unwrap();
            let e: PathEnsemble<f64> = sim.simulate(40000, SeedSpec::new(17, 0)).unwrap();
            let c = e.covariance();
            for i in [0, 2, 4] {
                assert!((c[i][i] / exact[i][i] - 1.0).abs() < 0.08, "{method:?} {i} {} {}", c[i][i], exact[i][i]);
            }
            let mean = e.column(4).iter().sum::<f64>() / 40000.0;
            assert!(mean.abs() < 4.0 * (exact[4][4] / 40000.0).sqrt(), "{mean}");
        }
    }

    #[test]
    fn discrete_model_converges_to_rosenblatt_covariance() {
        let h = Hurst::new(0.9).unwrap();
        let sim = PathSimulator::new(&h, &T5, PathMethod::DoubleSum, PathConfig { cells: 256, ..Default::default() }).unwrap();
        let c = sim.discrete_covariance().unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = rosenblatt_cov(0.9, T5[i], T5[j]);
                assert!((c[i][j] / want - 1.0).abs() < 0.02, "{i} {j} {} {want}", c[i][j]);
            }
        }
    }

    #[test]
    fn methods_agree_on_the_same_resolution() {
        let a = small(PathMethod::DoubleSum, Diagonal::Centered).discrete_covariance().unwrap();
        let b = small(PathMethod::FiniteInterval, Diagonal::Centered).discrete_covariance().unwrap();
        for i in 0..5 {
            assert!((a[i][i] / b[i][i] - 1.0).abs() < 0.04, "{i} {} {}", a[i][i], b[i][i]);
        }
    }

    #[test]
    fn excluding_the_diagonal_loses_variance() {
        let a = small(PathMethod::DoubleSum, Diagonal::Centered).discrete_covariance().unwrap();
        let b = small(PathMethod::DoubleSum, Diagonal::Excluded).discrete_covariance().unwrap();
        assert!(b[4][4] < a[4][4]);
    }

    #[test]
    fn seeded_runs_repeat() {
        let sim = small(PathMethod::DoubleSum, Diagonal::Excluded);
        let a: PathEnsemble<f64> = sim.simulate(300, SeedSpec::new(1, 2)).unwrap();
        let b: PathEnsemble<f64> = sim.simulate(300, SeedSpec::new(1, 2)).unwrap();
        let c: PathEnsemble<f64> = sim.simulate(300, SeedSpec::new(2, 2)).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_ne!(a.samples, c.samples);
        assert_eq!(a.n_paths(), 300);
    }

    #[test]
    fn bad_inputs() {
        let h = Hurst::new(0.75).unwrap();
        let cfg = PathConfig { cells: 40, ..Default::default() };
        assert!(PathSimulator::new(&h, &[], PathMethod::DoubleSum, cfg).is_err());
        assert!(PathSimulator::new(&h, &[0.5, 0.3], PathMethod::DoubleSum, cfg).is_err());
        assert!(PathSimulator::new(&h, &[0.5, 0.501], PathMethod::DoubleSum, cfg).is_err());
        assert!(PathSimulator::new(&h, &[1.0], PathMethod::DoubleSum, PathConfig { ratio: 1.0, ..cfg }).is_err());
        assert!(small(PathMethod::DoubleSum, Diagonal::Centered).simulate::<f64>(0, SeedSpec::new(0, 0)).is_err());
    }

    #[test]
    fn covariance_formula() {
        assert!((rosenblatt_cov(0.7, 1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((rosenblatt_cov(0.7, 0.3, 0.8) - rosenblatt_cov(0.7, 0.8, 0.3)).abs() < 1e-15);
    }
}
