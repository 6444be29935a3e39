//! Spectrum of the operator T_1 with kernel f_1.
//!
//! T_1 = A A* with (A g)(x) = √c ∫_0^1 (s−x)_+^{H/2−1} g(s) ds, so its nonzero eigenvalues are
//! those of A*A, the operator on L²[0,1] with kernel κ|s−r|^{H−1}. That operator is discretized
//! by Galerkin projection onto cell indicators (closed-form entries), and the eigenfunctions
//! on ℝ are recovered as e_n = λ_n^{−1/2} A φ_n.
//!
//! Eigenvalues behave like C (n+δ)^{−H} with C = κ·2Γ(H)cos(πH/2)π^{−H}; the power-sum tail
//! uses that law with δ matched at the last trusted mode.

mod tail;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fracint::{SmoothTestFunction, WeylInterp};
use crate::kernels::Hurst;
use crate::numcore::quad::PowerRule;
use crate::numcore::{Endpoint, GaussLegendre, Grid1D, Real};

pub use tail::{PowerSum, TailModel};

/// Settings for [`nystrom_eig`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectrumConfig {
    /// Number of Chebyshev cells on [0, 1].
    pub cells: usize,
    /// Modes kept in the head of every power sum.
    pub n_keep: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig { cells: 400, n_keep: 200 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Spectrum<T = f64> {
    pub h: Hurst<T>,
    /// Cell edges of the [0, 1] discretization.
    pub edges: Vec<T>,
    /// λ_1 ≥ λ_2 ≥ … for the kept modes.
    pub lambdas: Vec<T>,
    /// Coefficients of φ_n in the orthonormal basis χ_j/√h_j; one row per kept mode.
    pub eigvecs: Vec<Vec<T>>,
    pub tail: TailModel<T>,
    /// FNV-1a hash of the assembled matrix.
    pub checksum: u64,
}

/// Galerkin matrix of κ|s−r|^{H−1} in the basis χ_j/√h_j.
pub fn galerkin_matrix(h: f64, kappa: f64, edges: &[f64]) -> DMatrix<f64> {
    let n = edges.len() - 1;
    let b = h - 1.0;
    let g = |z: f64| z.abs().powf(b + 2.0) / ((b + 1.0) * (b + 2.0));
    let width: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let (li, ri, lj, rj) = (edges[i], edges[i + 1], edges[j], edges[j + 1]);
            let v = if i == j {
                2.0 * g(width[i])
            } else {
                g(ri - lj) - g(li - lj) - g(ri - rj) + g(li - rj)
            };
            let v = kappa * v / (width[i] * width[j]).sqrt();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Eigenvalues (descending) on the grid made of every other edge.
fn half_grid_eigenvalues<T: Real>(h: &Hurst<T>, edges: &[f64]) -> Vec<f64> {
    let half: Vec<f64> = edges.iter().step_by(2).copied().collect();
    let m = galerkin_matrix(h.h.f64(), h.kappa.f64(), &half);
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

fn fnv1a(m: &DMatrix<f64>) -> u64 {
    let mut hsh: u64 = 0xcbf29ce484222325;
    for v in m.iter() {
        for byte in v.to_bits().to_le_bytes() {
            hsh ^= byte as u64;
            hsh = hsh.wrapping_mul(0x100000001b3);
        }
    }
    hsh
}

/// Top `n_keep` eigenpairs of T_1.
pub fn nystrom_eig<T: Real>(h: &Hurst<T>, cfg: SpectrumConfig) -> Result<Spectrum<T>> {
    if cfg.n_keep == 0 {
        return domain("n_keep must be at least 1");
    }
    if cfg.cells < 8 || cfg.cells % 2 == 1 {
        return domain(format!("need an even number of cells, at least 8, got {}", cfg.cells));
    }
    let n_keep = cfg.n_keep.min(cfg.cells);
    let grid = Grid1D::<f64>::chebyshev_cells(0.0, 1.0, cfg.cells)?;
    let edges = grid.edges.clone().expect("cell grid");
    let m = galerkin_matrix(h.h.f64(), h.kappa.f64(), &edges);
    let asym = (&m - m.transpose()).amax();
    if asym > 1e-10 {
        return Err(Error::Assembly(format!("matrix asymmetry {asym:e}")));
    }
    let checksum = fnv1a(&m);
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..cfg.cells).collect();
    order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]));
    let mut lambdas = Vec::with_capacity(n_keep);
    let mut eigvecs = Vec::with_capacity(n_keep);
    for &k in order.iter().take(n_keep) {
        let lam = eig.eigenvalues[k];
        if lam <= 0.0 {
            return Err(Error::Assembly(format!("non-positive eigenvalue {lam:e} among kept modes")));
        }
        let col = eig.eigenvectors.column(k);
        // fix the sign: positive mass on [0,1]
        let sgn = if col.iter().zip(edges.windows(2)).map(|(v, w)| v * (w[1] - w[0]).sqrt()).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        lambdas.push(T::lit(lam));
        eigvecs.push(col.iter().map(|v| T::lit(sgn * v)).collect());
    }
    // P0 Galerkin eigenvalues converge like N^{−2}; a half-size solve removes the leading error
    let coarse = half_grid_eigenvalues(h, &edges);
    let n_ex = n_keep.min(cfg.cells / 4);
    for (n, lam) in lambdas.iter_mut().enumerate().take(n_ex) {
        let f = lam.f64();
        *lam = T::lit(f + (f - coarse[n]) / 3.0);
    }
    let all: Vec<f64> = lambdas.iter().map(|l| l.f64()).collect();
    let tail = TailModel::fit(h, &all, (cfg.cells / 20).min(n_keep));
    Ok(Spectrum { h: *h, edges: edges.into_iter().map(T::lit).collect(), lambdas, eigvecs, tail, checksum })
}

impl<T: Real> Spectrum<T> {
    pub fn n_keep(&self) -> usize {
        self.lambdas.len()
    }

    /// Modes accurate enough to be used as eigenvalues; later ones are replaced by the
    /// asymptotic law in power sums and products (eigenvectors are still kept).
    pub fn n_trusted(&self) -> usize {
        self.tail.n_fit.min(self.n_keep())
    }

    /// λ_1..λ_m: computed for trusted modes, asymptotic law after.
    pub fn extended_lambdas(&self, m: usize) -> Vec<T> {
        let nt = self.n_trusted();
        (0..m).map(|n| if n < nt { self.lambdas[n] } else { self.tail.lambda(n + 1) }).collect()
    }

    pub fn n_cells(&self) -> usize {
        self.edges.len() - 1
    }

    /// Cell grid on [0, 1] carrying the dual eigenfunctions.
    pub fn grid(&self) -> Grid1D<T> {
        Grid1D::cells(self.edges.clone()).expect("edges were validated at construction")
    }

    /// ∑_n λ_n^r with its tail; r ≥ 2 only (T_1 is not trace class).
    pub fn power_sum(&self, r: u32) -> Result<PowerSum<T>> {
        power_sum(self, r)
    }

    /// The dual eigenfunction φ_n on [0, 1] (piecewise constant).
    pub fn phi(&self, n: usize, s: T) -> T {
        let e = &self.edges;
        if s < e[0] || s > e[e.len() - 1] {
            return T::zero();
        }
        let j = e.partition_point(|x| *x <= s).saturating_sub(1).min(e.len() - 2);
        self.eigvecs[n][j] / (e[j + 1] - e[j]).sqrt()
    }

    /// e_n(x) = λ_n^{−1/2} (A φ_n)(x), zero-based n.
    pub fn eigfn(&self, n: usize, x: T) -> T {
        let al = self.h.alpha();
        let e = &self.edges;
        let mut s = T::zero();
        for j in 0..e.len() - 1 {
            let r = (e[j + 1] - x).max(T::zero()).powf(al);
            if r == T::zero() {
                continue;
            }
            let l = (e[j] - x).max(T::zero()).powf(al);
            s += self.eigvecs[n][j] / (e[j + 1] - e[j]).sqrt() * (r - l);
        }
        self.h.c.sqrt() / al * s / self.lambdas[n].sqrt()
    }

    /// e_n(x/t)/√t, the eigenfunction of T_t.
    pub fn eigfn_at(&self, n: usize, t: T, x: T) -> T {
        self.eigfn(n, x / t) / t.sqrt()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spectrum serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sp: Spectrum<T> = serde_json::from_str(s).map_err(|e| Error::Domain(format!("bad spectrum file: {e}")))?;
        if sp.lambdas.len() != sp.eigvecs.len() || sp.eigvecs.iter().any(|v| v.len() + 1 != sp.edges.len()) {
            return Err(Error::Shape("spectrum file has inconsistent sizes".into()));
        }
        Ok(sp)
    }
}

/// ∑λ_n^r: head over the trusted modes, tail from the asymptotic law, and the bound
/// λ_m^{r−2}·R₂ with R₂ = ½ − ∑_{n≤m} λ_n² (m trusted modes).
pub fn power_sum<T: Real>(spec: &Spectrum<T>, r: u32) -> Result<PowerSum<T>> {
    if r < 2 {
        return domain(format!("power sums need r ≥ 2 (∑λ_n diverges), got r = {r}"));
    }
    let m = spec.n_trusted();
    let head: T = spec.lambdas[..m].iter().map(|l| l.powi(r as i32)).sum();
    let sq: T = spec.lambdas[..m].iter().map(|l| *l * *l).sum();
    let r2 = (T::lit(0.5) - sq).max(T::zero());
    let tail = spec.tail.tail_sum(r, m)?;
    Ok(PowerSum { r, head, tail, kept: m, bound: spec.lambdas[m - 1].powi(r as i32 - 2) * r2 })
}

/// β_n = <ξ, e_n(·/t)/√t> = t^{1/2−H/2} λ_n^{−1/2} √d ∫_0^1 φ_n(u) I^{H/2}_+ξ(tu) du.
pub fn project_xi<T: Real>(spec: &Spectrum<T>, t: T, xi: &SmoothTestFunction<T>) -> Result<Vec<T>> {
    if !(t > T::zero()) {
        return domain(format!("t must be positive, got {t}"));
    }
    let nk = spec.n_keep();
    if xi.is_zero() {
        return Ok(vec![T::zero(); nk]);
    }
    let h = &spec.h;
    let interp = WeylInterp::new(xi, h.alpha(), T::zero(), t)?;
    let gl = GaussLegendre::<T>::new(8);
    let e = &spec.edges;
    // cell integrals ∫_{cell} Iξ(tu) du / √h_j
    let cell: Vec<T> = (0..e.len() - 1)
        .map(|j| gl.integrate(e[j], e[j + 1], |u| interp.value(t * u)) / (e[j + 1] - e[j]).sqrt())
        .collect();
    let pre = t.powf(T::lit(0.5) - h.h * T::lit(0.5)) * h.d.sqrt();
    Ok((0..nk)
        .map(|n| {
            let s: T = spec.eigvecs[n].iter().zip(&cell).map(|(a, b)| *a * *b).sum();
            pre * s / spec.lambdas[n].sqrt()
        })
        .collect())
}

/// β_n by direct quadrature of ξ(x) e_n(x/t)/√t on ℝ (oracle for [`project_xi`]). The pieces
/// end at the scaled cell edges, where e_n has (edge − x)^{H/2} behaviour from the left.
pub fn project_fn<T: Real>(spec: &Spectrum<T>, t: T, xi: &SmoothTestFunction<T>, modes: usize) -> Result<Vec<T>> {
    if !(t > T::zero()) {
        return domain(format!("t must be positive, got {t}"));
    }
    let modes = modes.min(spec.n_keep());
    let Some((lo, hi)) = xi.support() else { return Ok(vec![T::zero(); modes]) };
    let end = hi.min(t);
    if end <= lo {
        return Ok(vec![T::zero(); modes]);
    }
    // the far left part is smooth; coarse pieces there, then every scaled edge
    let step = t.max(T::lit(0.25) * (T::zero() - lo));
    let mut cuts = vec![lo];
    let mut a = lo + step;
    while a < T::zero() {
        cuts.push(a);
        a += step;
    }
    cuts.extend(spec.edges.iter().map(|e| *e * t).filter(|x| *x > lo && *x < end));
    cuts.push(end);
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite cuts"));
    cuts.dedup();
    let rule = PowerRule::<T>::new(10, 0.3, 8);
    let mut out = vec![T::zero(); modes];
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (xs, ws) = rule.mapped(a, b, T::zero(), Endpoint::Hi);
        for (x, wt) in xs.into_iter().zip(ws) {
            let xv = xi.eval(x);
            if xv == T::zero() {
                continue;
            }
            for (n, o) in out.iter_mut().enumerate() {
                *o += wt * xv * spec.eigfn_at(n, t, x);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{c3_closed, c_k_quad};

    fn spec(h: f64) -> Spectrum {
        nystrom_eig(&Hurst::new(h).unwrap(), SpectrumConfig::default()).unwrap()
    }

    #[test]
    fn modes_positive_decreasing_orthonormal() {
        let sp = spec(0.75);
        assert_eq!(sp.n_keep(), 200);
        assert!(sp.lambdas.windows(2).all(|w| w[0] >= w[1]) && sp.lambdas[199] > 0.0);
        for m in [0, 3, 50] {
            for n in [0, 3, 50] {
                let ip: f64 = sp.eigvecs[m].iter().zip(&sp.eigvecs[n]).map(|(a, b)| a * b).sum();
                assert!((ip - if m == n { 1.0 } else { 0.0 }).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn power_sums_match_cyclic_integrals() {
        let h = Hurst::new(0.75f64).unwrap();
        let sp = spec(0.75);
        assert!((sp.power_sum(2).unwrap().value() - 0.5).abs() < 1e-3);
        let k3 = h.kappa.powi(3) * c3_closed(&h);
        assert!((sp.power_sum(3).unwrap().value() / k3 - 1.0).abs() < 1e-3);
        let k4 = h.kappa.powi(4) * c_k_quad(&h, 4).unwrap();
        assert!((sp.power_sum(4).unwrap().value() / k4 - 1.0).abs() < 1e-3);
        let v: Vec<f64> = (2..10).map(|r| sp.power_sum(r).unwrap().value()).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
        assert!(sp.power_sum(1).is_err() && sp.power_sum(0).is_err());
    }

    #[test]
    fn doubling_stability() {
        let h = Hurst::new(0.6f64).unwrap();
        let a = nystrom_eig(&h, SpectrumConfig { cells: 200, n_keep: 10 }).unwrap();
        let b = nystrom_eig(&h, SpectrumConfig { cells: 400, n_keep: 10 }).unwrap();
        for n in 0..10 {
            assert!((a.lambdas[n] / b.lambdas[n] - 1.0).abs() < 5e-3);
        }
    }

    #[test]
    fn projections_agree_across_routes() {
        let sp = spec(0.75);
        let xi = SmoothTestFunction::gaussian(1.0, 0.3, 0.4);
        let a = project_xi(&sp, 1.5, &xi).unwrap();
        let b = project_fn(&sp, 1.5, &xi, 5).unwrap();
        for n in 0..5 {
            assert!((a[n] - b[n]).abs() < 1e-7, "{n}: {} vs {}", a[n], b[n]);
        }
        assert!(project_xi(&sp, 1.0, &SmoothTestFunction::zero()).unwrap().iter().all(|b| *b == 0.0));
        assert!(project_xi(&sp, 0.0, &xi).is_err());
    }

    #[test]
    fn mean_under_translation_from_modes() {
        // <ξ, T_t ξ> = ∑ λ_n t^H β_n² converges to the Weyl-route value
        let h = Hurst::new(0.75f64).unwrap();
        let sp = spec(0.75);
        let xi = SmoothTestFunction::gaussian(1.0, 0.5, 0.3);
        let b = project_xi(&sp, 1.0, &xi).unwrap();
        let s: f64 = sp.lambdas.iter().zip(&b).map(|(l, b)| l * b * b).sum();
        let w = crate::kernels::inner_f_xi2(&h, 1.0, &xi).unwrap();
        assert!((s - w).abs() / w < 1e-5);
    }

    #[test]
    fn json_round_trip_and_extension() {
        let h = Hurst::new(0.8f64).unwrap();
        let sp = nystrom_eig(&h, SpectrumConfig { cells: 60, n_keep: 8 }).unwrap();
        let back = Spectrum::<f64>::from_json(&sp.to_json()).unwrap();
        assert_eq!(back.lambdas, sp.lambdas);
        assert_eq!(back.checksum, sp.checksum);
        let ext = sp.extended_lambdas(50);
        assert_eq!(ext[..sp.n_trusted()], sp.lambdas[..sp.n_trusted()]);
        assert!(ext.windows(2).all(|w| w[0] > w[1]));
        assert!(nystrom_eig(&h, SpectrumConfig { cells: 60, n_keep: 0 }).is_err());
    }
}
