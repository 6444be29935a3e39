//! Weyl fractional integrals I_+^α of parametric test functions.
//!
//! Test functions are finite sums of atoms `coef·z^k·exp(−z²/2)` with `z = (x − center)/width`.
//! Derivatives stay in the same family, so I_+^α(ξ′) is computed exactly rather than by differencing.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::kernels::Hurst;
use crate::numcore::quad::{Endpoint, GaussLegendre, PowerRule};
use crate::numcore::special::gamma_unchecked;
use crate::numcore::Real;

/// One Gaussian-bump atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Atom<T = f64> {
    pub coef: T,
    pub center: T,
    pub width: T,
    pub degree: u32,
}

impl<T: Real> Atom<T> {
    #[inline]
    pub fn eval(&self, x: T) -> T {
        let z = (x - self.center) / self.width;
        self.coef * z.powi(self.degree as i32) * (-T::lit(0.5) * z * z).exp()
    }

    /// Atoms of the derivative: (coef/w)(k z^{k−1} − z^{k+1}) e^{−z²/2}.
    pub fn derivative(&self) -> Vec<Atom<T>> {
        let k = self.degree;
        let s = self.coef / self.width;
        let mut out = vec![Atom { coef: -s, degree: k + 1, ..*self }];
        if k > 0 {
            out.push(Atom { coef: s * T::from_usize_(k as usize), degree: k - 1, ..*self });
        }
        out
    }

    /// sup |atom| = |coef|·k^{k/2}·e^{−k/2}.
    pub fn sup_abs(&self) -> T {
        let k = T::from_usize_(self.degree as usize);
        if self.degree == 0 {
            self.coef.abs()
        } else {
            self.coef.abs() * k.powf(k * T::lit(0.5)) * (-k * T::lit(0.5)).exp()
        }
    }

    /// ∫|atom| = |coef|·w·2^{(k+1)/2}·Γ((k+1)/2).
    pub fn l1(&self) -> T {
        let kp = T::from_usize_(self.degree as usize + 1) * T::lit(0.5);
        self.coef.abs() * self.width * T::lit(2.0).powf(kp) * gamma_unchecked(kp)
    }

    /// Half-width (in x) outside which the atom is below double precision relevance.
    pub fn reach(&self) -> T {
        self.width * T::from_usize_(10 + self.degree as usize)
    }
}

/// A rapidly decreasing smooth test function ξ given as a sum of atoms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SmoothTestFunction<T = f64> {
    pub terms: Vec<Atom<T>>,
}

impl<T: Real> SmoothTestFunction<T> {
    pub fn zero() -> Self {
        SmoothTestFunction { terms: Vec::new() }
    }

    pub fn gaussian(coef: T, center: T, width: T) -> Self {
        SmoothTestFunction { terms: vec![Atom { coef, center, width, degree: 0 }] }
    }

    pub fn from_atoms(terms: Vec<Atom<T>>) -> Self {
        SmoothTestFunction { terms }
    }

    pub fn with(mut self, coef: T, center: T, width: T, degree: u32) -> Self {
        self.terms.push(Atom { coef, center, width, degree });
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|a| a.coef == T::zero())
    }

    pub fn eval(&self, x: T) -> T {
        self.terms.iter().map(|a| a.eval(x)).sum()
    }

    pub fn derivative(&self) -> Self {
        SmoothTestFunction { terms: self.terms.iter().flat_map(|a| a.derivative()).collect() }
    }

    pub fn scaled(&self, s: T) -> Self {
        SmoothTestFunction { terms: self.terms.iter().map(|a| Atom { coef: a.coef * s, ..*a }).collect() }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        SmoothTestFunction { terms }
    }

    /// Interval outside which ξ is negligible, `None` for ξ ≡ 0.
    pub fn support(&self) -> Option<(T, T)> {
        let live: Vec<&Atom<T>> = self.terms.iter().filter(|a| a.coef != T::zero()).collect();
        if live.is_empty() {
            return None;
        }
        let lo = live.iter().map(|a| a.center - a.reach()).fold(T::infinity(), T::min);
        let hi = live.iter().map(|a| a.center + a.reach()).fold(T::neg_infinity(), T::max);
        Some((lo, hi))
    }

    fn min_width(&self) -> T {
        self.terms.iter().map(|a| a.width).fold(T::infinity(), T::min)
    }

    /// Triangle-inequality bound ∑ sup|atom| ≥ ‖ξ‖_∞.
    pub fn sup_norm_bound(&self) -> T {
        self.terms.iter().map(|a| a.sup_abs()).sum()
    }

    /// Triangle-inequality bound ∑ ‖atom‖_1 ≥ ‖ξ‖_1.
    pub fn l1_norm_bound(&self) -> T {
        self.terms.iter().map(|a| a.l1()).sum()
    }

    /// ‖ξ‖_∞ by a fine scan plus golden-section polish; exact for a single atom.
    pub fn sup_norm(&self) -> T {
        if self.terms.len() == 1 {
            return self.terms[0].sup_abs();
        }
        let Some((lo, hi)) = self.support() else { return T::zero() };
        let h = self.min_width() / T::lit(16.0);
        let n = ((hi - lo) / h).ceil().to_usize().unwrap_or(1).max(2);
        let step = (hi - lo) / T::from_usize_(n);
        let f = |x: T| self.eval(x).abs();
        let (mut best_x, mut best) = (lo, T::zero());
        for i in 0..=n {
            let x = lo + step * T::from_usize_(i);
            let v = f(x);
            if v > best {
                best = v;
                best_x = x;
            }
        }
        golden_max(f, best_x - step, best_x + step).max(best)
    }

    /// ‖ξ‖_1 by composite Gauss-Legendre over the support; exact for a single atom.
    pub fn l1_norm(&self) -> T {
        if self.terms.len() == 1 {
            return self.terms[0].l1();
        }
        self.integrate(|x| self.eval(x).abs(), 64)
    }

    /// ∫ ξ η over the joint support.
    pub fn dot(&self, other: &Self) -> T {
        let joint = self.plus(other);
        joint.integrate(|x| self.eval(x) * other.eval(x), 8)
    }

    pub fn l2_norm_sq(&self) -> T {
        self.dot(self)
    }

    /// ∫ g over the support of ξ with panels of width min_width/`per_width`.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut g: F, per_width: usize) -> T {
        let Some((lo, hi)) = self.support() else { return T::zero() };
        let gl = GaussLegendre::<T>::new(16);
        let pw = self.min_width() / T::from_usize_(per_width.max(1)) * T::lit(4.0);
        let n = ((hi - lo) / pw).ceil().to_usize().unwrap_or(1).max(1);
        let step = (hi - lo) / T::from_usize_(n);
        (0..n)
            .map(|i| {
                let a = lo + step * T::from_usize_(i);
                gl.integrate(a, a + step, &mut g)
            })
            .sum()
    }
}

fn golden_max<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T) -> T {
    let r = T::lit(0.618_033_988_749_894_8);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    for _ in 0..80 {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    f((a + b) * T::lit(0.5))
}

/// Reusable evaluator of I_+^α for a fixed α.
#[derive(Debug, Clone)]
pub struct Weyl<T = f64> {
    alpha: T,
    inv_gamma: T,
    sing: PowerRule<T>,
    gl: GaussLegendre<T>,
}

impl<T: Real> Weyl<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return domain(format!("fractional order must lie in (0,1), got {alpha}"));
        }
        Ok(Weyl {
            alpha,
            inv_gamma: gamma_unchecked(alpha).recip(),
            sing: PowerRule::new(8, 0.35, 10),
            gl: GaussLegendre::new(16),
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// I_+^α(atom)(x) = (1/Γ(α)) ∫_0^∞ u^{α−1} atom(x − u) du.
    pub fn atom(&self, a: &Atom<T>, x: T) -> T {
        if a.coef == T::zero() {
            return T::zero();
        }
        let reach = a.reach();
        let u_hi = x - a.center + reach;
        if u_hi <= T::zero() {
            return T::zero();
        }
        let mut u_lo = (x - a.center - reach).max(T::zero());
        if u_lo < a.width {
            u_lo = T::zero();
        }
        let pw = a.width * T::lit(0.5);
        let am1 = self.alpha - T::one();
        let mut s = T::zero();
        let mut start = u_lo;
        if u_lo == T::zero() {
            let first = pw.min(u_hi);
            s += self
                .sing
                .integrate_weighted(|u| a.eval(x - u), T::zero(), first, am1, Endpoint::Lo)
                .unwrap_or(T::nan());
            start = first;
        }
        if u_hi > start {
            let n = ((u_hi - start) / pw).ceil().to_usize().unwrap_or(1).max(1);
            let step = (u_hi - start) / T::from_usize_(n);
            for i in 0..n {
                let p = start + step * T::from_usize_(i);
                s += self.gl.integrate(p, p + step, |u| u.powf(am1) * a.eval(x - u));
            }
        }
        s * self.inv_gamma
    }

    pub fn eval(&self, xi: &SmoothTestFunction<T>, x: T) -> T {
        xi.terms.iter().map(|a| self.atom(a, x)).sum()
    }

    /// (I_+^α ξ)′(x) = I_+^α(ξ′)(x).
    pub fn eval_dt(&self, xi: &SmoothTestFunction<T>, x: T) -> T {
        xi.terms.iter().flat_map(|a| a.derivative()).map(|a| self.atom(&a, x)).sum()
    }

    /// I_+^α f(x) for a general integrand vanishing below `lo`, with kinks at `breaks`.
    /// Pieces longer than `max_panel` are subdivided.
    pub fn eval_fn<F: Fn(T) -> T>(&self, f: F, x: T, lo: T, breaks: &[T], max_panel: T) -> T {
        if x <= lo {
            return T::zero();
        }
        let am1 = self.alpha - T::one();
        let mut ub: Vec<T> = breaks.iter().map(|b| x - *b).filter(|u| *u > T::zero() && *u < x - lo).collect();
        ub.push(T::zero());
        ub.push(x - lo);
        ub.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut s = T::zero();
        for w in ub.windows(2) {
            let (p, q) = (w[0], w[1]);
            let n = ((q - p) / max_panel).ceil().to_usize().unwrap_or(1).max(1);
            let step = (q - p) / T::from_usize_(n);
            for i in 0..n {
                let a = p + step * T::from_usize_(i);
                let b = a + step;
                if a == T::zero() {
                    s += self.sing.integrate_weighted(|u| f(x - u), a, b, am1, Endpoint::Lo).unwrap_or(T::nan());
                } else {
                    // kinks of f sit at panel ends, so grade toward both
                    let m = (a + b) * T::lit(0.5);
                    s += self.sing.integrate_weighted(|u| u.powf(am1) * f(x - u), a, m, T::zero(), Endpoint::Lo).unwrap_or(T::nan());
                    s += self.sing.integrate_weighted(|u| u.powf(am1) * f(x - u), m, b, T::zero(), Endpoint::Hi).unwrap_or(T::nan());
                }
            }
        }
        s * self.inv_gamma
    }
}

/// I_+^α(ξ)(x).
pub fn weyl_integral<T: Real>(xi: &SmoothTestFunction<T>, alpha: T, x: T) -> Result<T> {
    Ok(Weyl::new(alpha)?.eval(xi, x))
}

/// I_+^α(ξ′)(x), the x-derivative of I_+^α(ξ).
pub fn weyl_integral_dt<T: Real>(xi: &SmoothTestFunction<T>, alpha: T, x: T) -> Result<T> {
    Ok(Weyl::new(alpha)?.eval_dt(xi, x))
}

/// Closed form I_+^α(1_{[a,b]})(x) = ((x−a)_+^α − (x−b)_+^α)/Γ(α+1).
pub fn weyl_box<T: Real>(alpha: T, a: T, b: T, x: T) -> T {
    let pos = |v: T| if v > T::zero() { v.powf(alpha) } else { T::zero() };
    (pos(x - a) - pos(x - b)) / gamma_unchecked(alpha + T::one())
}

/// Chebyshev interpolant of x ↦ I_+^α ξ(x) (and optionally its derivative) on [lo, hi].
/// Used where the Weyl integral is needed at many points.
#[derive(Debug, Clone)]
pub struct WeylInterp<T = f64> {
    lo: T,
    piece: T,
    nodes: Vec<T>,
    bary: Vec<T>,
    vals: Vec<Vec<T>>,
    dvals: Vec<Vec<T>>,
}

impl<T: Real> WeylInterp<T> {
    pub fn new(xi: &SmoothTestFunction<T>, alpha: T, lo: T, hi: T) -> Result<Self> {
        let w = Weyl::new(alpha)?;
        if !(hi > lo) {
            return domain("interpolation interval must be non-empty");
        }
        let minw = if xi.terms.is_empty() { hi - lo } else { xi.min_width() };
        let n_pieces = ((hi - lo) / minw).ceil().to_usize().unwrap_or(1).max(1);
        let piece = (hi - lo) / T::from_usize_(n_pieces);
        let m = 24usize;
        // Chebyshev points of the first kind on [-1, 1] with barycentric weights
        let mut nodes = Vec::with_capacity(m);
        let mut bary = Vec::with_capacity(m);
        for j in 0..m {
            let th = T::PI() * (T::from_usize_(2 * j + 1)) / T::from_usize_(2 * m);
            nodes.push(th.cos());
            let sgn = if j % 2 == 0 { T::one() } else { -T::one() };
            bary.push(sgn * th.sin());
        }
        let mut vals = Vec::with_capacity(n_pieces);
        let mut dvals = Vec::with_capacity(n_pieces);
        let dxi = xi.derivative();
        for p in 0..n_pieces {
            let a = lo + piece * T::from_usize_(p);
            let xs: Vec<T> = nodes.iter().map(|t| a + (*t + T::one()) * T::lit(0.5) * piece).collect();
            vals.push(xs.iter().map(|x| w.eval(xi, *x)).collect());
            dvals.push(xs.iter().map(|x| w.eval(&dxi, *x)).collect());
        }
        Ok(WeylInterp { lo, piece, nodes, bary, vals, dvals })
    }

    fn interp(&self, table: &[Vec<T>], x: T) -> T {
        let n_pieces = table.len();
        let rel = (x - self.lo) / self.piece;
        let p = rel.floor().to_isize().unwrap_or(0).clamp(0, n_pieces as isize - 1) as usize;
        let t = (rel - T::from_usize_(p)) * T::lit(2.0) - T::one();
        let v = &table[p];
        let (mut num, mut den) = (T::zero(), T::zero());
        for j in 0..self.nodes.len() {
            let d = t - self.nodes[j];
            if d == T::zero() {
                return v[j];
            }
            let q = self.bary[j] / d;
            num += q * v[j];
            den += q;
        }
        num / den
    }

    pub fn value(&self, x: T) -> T {
        self.interp(&self.vals, x)
    }

    pub fn deriv(&self, x: T) -> T {
        self.interp(&self.dvals, x)
    }
}

/// Outcome of the sup-norm bound ‖I_+^{H/2}ξ‖_∞ ≤ C_H(‖ξ‖_∞ + ‖ξ′‖_∞ + ‖ξ‖_1).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SupBound<T = f64> {
    pub lhs: T,
    pub rhs: T,
    pub c_h: T,
    pub sup_xi: T,
    pub sup_dxi: T,
    pub l1_xi: T,
}

impl<T: Real> SupBound<T> {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// C_H from splitting the Weyl kernel at lag 1: max(1/Γ(H/2+1), 1/Γ(H/2)).
pub fn sup_bound_constant<T: Real>(h: &Hurst<T>) -> T {
    let a = h.alpha();
    gamma_unchecked(a + T::one()).recip().max(gamma_unchecked(a).recip())
}

/// Scan-grid lower estimate of ‖I_+^{H/2}ξ‖_∞ against the bound's right-hand side.
pub fn sup_bound_check<T: Real>(xi: &SmoothTestFunction<T>, h: &Hurst<T>) -> Result<SupBound<T>> {
    let c_h = sup_bound_constant(h);
    let Some((lo, hi)) = xi.support() else {
        return Ok(SupBound { lhs: T::zero(), rhs: T::zero(), c_h, sup_xi: T::zero(), sup_dxi: T::zero(), l1_xi: T::zero() });
    };
    let w = Weyl::new(h.alpha())?;
    let (a, b) = (lo, hi + T::lit(10.0));
    let step = xi.min_width() / T::lit(32.0);
    let n = ((b - a) / step).ceil().to_usize().unwrap_or(1);
    let mut lhs = T::zero();
    for i in 0..=n {
        let x = a + (b - a) * T::from_usize_(i) / T::from_usize_(n);
        lhs = lhs.max(w.eval(xi, x).abs());
    }
    let sup_xi = xi.sup_norm();
    let sup_dxi = xi.derivative().sup_norm();
    let l1_xi = xi.l1_norm();
    Ok(SupBound { lhs, rhs: c_h * (sup_xi + sup_dxi + l1_xi), c_h, sup_xi, sup_dxi, l1_xi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_gauss() -> SmoothTestFunction<f64> {
        SmoothTestFunction::gaussian(1.0, 0.0, 1.0)
    }

    #[test]
    fn zero_function_gives_zero() {
        let z = SmoothTestFunction::<f64>::zero();
        assert_eq!(weyl_integral(&z, 0.3, 0.7).unwrap(), 0.0);
        assert_eq!(weyl_integral_dt(&z, 0.3, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_reference_value() {
        // arbitrary precision reference for α = 0.375, x = 0
        let v = weyl_integral(&unit_gauss(), 0.375, 0.0).unwrap();
        assert_relative_eq!(v, 1.180_642_490_887_382_2, max_relative = 1e-10);
    }

    #[test]
    fn box_closed_form_via_general_route() {
        let w = Weyl::new(0.4f64).unwrap();
        let f = |y: f64| if (0.0..=1.0).contains(&y) { 1.0 } else { 0.0 };
        for &x in &[0.3f64, 1.0, 1.7, 4.0] {
            let num = w.eval_fn(f, x, 0.0, &[1.0], 10.0);
            assert_relative_eq!(num, weyl_box(0.4, 0.0, 1.0, x), max_relative = 1e-10);
        }
        assert_eq!(weyl_box(0.4f64, 0.0, 1.0, -0.5), 0.0);
    }

    #[test]
    fn rejects_bad_order() {
        assert!(weyl_integral(&unit_gauss(), 1.0, 0.0).is_err());
        assert!(weyl_integral(&unit_gauss(), 0.0, 0.0).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let xi = SmoothTestFunction::gaussian(0.8, 0.3, 0.4).with(-0.5, 1.1, 0.25, 1).with(0.3, -0.4, 0.6, 2);
        let w = Weyl::new(0.3f64).unwrap();
        for &x in &[-0.5f64, 0.2, 1.0, 2.5] {
            let h = 1e-5;
            let fd = (w.eval(&xi, x + h) - w.eval(&xi, x - h)) / (2.0 * h);
            assert!((fd - w.eval_dt(&xi, x)).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn derivative_route_via_closed_form_derivative() {
        let xi = unit_gauss();
        let dxi = SmoothTestFunction::from_atoms(vec![Atom { coef: -1.0, center: 0.0, width: 1.0, degree: 1 }]);
        let a = weyl_integral_dt(&xi, 0.3, 1.0).unwrap();
        let b = weyl_integral(&dxi, 0.3, 1.0).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-13);
    }

    #[test]
    fn semigroup_spot_check() {
        let xi = SmoothTestFunction::gaussian(1.0, 0.2, 0.7);
        let (a, b) = (0.3f64, 0.45f64);
        let wa = Weyl::new(a).unwrap();
        let wb = Weyl::new(b).unwrap();
        let wab = Weyl::new(a + b).unwrap();
        let x = 0.9;
        let (lo, _) = xi.support().unwrap();
        // I^a(I^b ξ): the inner function has a slowly decaying right tail but vanishes far left
        let inner = |y: f64| wb.eval(&xi, y);
        let outer = wa.eval_fn(inner, x, lo, &[], 0.25);
        assert_relative_eq!(outer, wab.eval(&xi, x), max_relative = 1e-6);
    }

    #[test]
    fn linearity() {
        let xi = SmoothTestFunction::gaussian(1.0, 0.0, 0.5);
        let eta = SmoothTestFunction::gaussian(1.0, 1.0, 0.3).with(0.2, 0.5, 0.2, 3);
        let comb = xi.scaled(2.0).plus(&eta.scaled(-3.0));
        let w = Weyl::new(0.35f64).unwrap();
        let x = 0.8;
        let lhs = w.eval(&comb, x);
        let rhs = 2.0 * w.eval(&xi, x) - 3.0 * w.eval(&eta, x);
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn atom_norms_match_quadrature() {
        for k in 0..4u32 {
            let a = Atom { coef: 1.3, center: 0.2, width: 0.7, degree: k };
            let f = SmoothTestFunction::from_atoms(vec![a, Atom { coef: 0.0, ..a }]);
            assert_relative_eq!(f.l1_norm(), a.l1(), max_relative = 1e-6);
            assert_relative_eq!(f.sup_norm(), a.sup_abs(), max_relative = 1e-9);
        }
    }

    #[test]
    fn sup_bound_holds() {
        let z = SmoothTestFunction::<f64>::zero();
        let h = Hurst::new(0.75).unwrap();
        let r = sup_bound_check(&z, &h).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        let r = sup_bound_check(&unit_gauss(), &h).unwrap();
        assert!(r.holds() && r.lhs > 0.0);
        let two = SmoothTestFunction::gaussian(1.0, -1.0, 0.5).with(0.7, 1.5, 0.3, 0);
        let r = sup_bound_check(&two, &Hurst::new(0.6).unwrap()).unwrap();
        assert!(r.holds());
    }

    #[test]
    fn interpolant_matches_direct() {
        let xi = SmoothTestFunction::gaussian(1.0, 0.4, 0.3).with(-0.6, 0.9, 0.5, 1);
        let w = Weyl::new(0.375f64).unwrap();
        let it = WeylInterp::new(&xi, 0.375, 0.0, 2.0).unwrap();
        for i in 0..37 {
            let x = 2.0 * i as f64 / 36.0;
            assert!((it.value(x) - w.eval(&xi, x)).abs() < 1e-11);
            assert!((it.deriv(x) - w.eval_dt(&xi, x)).abs() < 1e-10);
        }
    }
}
