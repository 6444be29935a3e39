use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernels::Hurst;
use crate::numcore::{gamma_fn, hurwitz_zeta, Real};

/// λ_n ≈ C (n + δ)^{−H} beyond the trusted modes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TailModel<T = f64> {
    pub c: T,
    pub delta: T,
    pub h: T,
    /// Mode (one-based) where δ was matched.
    pub n_fit: usize,
}

impl<T: Real> TailModel<T> {
    pub fn constant(h: &Hurst<T>) -> T {
        let hh = h.h;
        h.kappa * T::lit(2.0) * gamma_fn(hh).expect("H > 0") * (T::FRAC_PI_2() * hh).cos() * T::PI().powf(-hh)
    }

    /// `all` holds the discrete eigenvalues, largest first; δ is matched at mode `n_fit`.
    pub fn fit(h: &Hurst<T>, all: &[f64], n_fit: usize) -> Self {
        let c = Self::constant(h);
        let n_fit = n_fit.clamp(1, all.len());
        let lam = all[n_fit - 1];
        let delta = (c.f64() / lam).powf(1.0 / h.h.f64()) - n_fit as f64;
        TailModel { c, delta: T::lit(delta), h: h.h, n_fit }
    }

    pub fn lambda(&self, n: usize) -> T {
        self.c * (T::from_usize_(n) + self.delta).powf(-self.h)
    }

    /// ∑_{n > n_keep} C^r (n+δ)^{−rH}.
    pub fn tail_sum(&self, r: u32, n_keep: usize) -> Result<T> {
        let s = self.h * T::from_usize_(r as usize);
        let q = T::from_usize_(n_keep + 1) + self.delta;
        Ok(self.c.powi(r as i32) * hurwitz_zeta(s, q)?)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PowerSum<T = f64> {
    pub r: u32,
    pub head: T,
    pub tail: T,
    pub kept: usize,
    /// λ_{n_keep}^{r−2}·R₂, a crude bound on what the head misses.
    pub bound: T,
}

impl<T: Real> PowerSum<T> {
    pub fn value(&self) -> T {
        self.head + self.tail
    }
}
