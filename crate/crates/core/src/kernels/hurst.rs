use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numcore::special::{beta_fn, gamma_fn};
use crate::numcore::Real;

/// Hurst index H ∈ (1/2, 1) with its derived constants.
///
/// `c` normalizes E|X_1|² = 1, `d = c·Γ(H/2)²` is the constant in front of the
/// fractional-integral form of the kernel, `kappa = √(H(2H−1)/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Hurst<T = f64> {
    pub h: T,
    pub c: T,
    pub d: T,
    pub kappa: T,
    pub gamma_half: T,
}

impl<T: Real> Hurst<T> {
    pub fn new(h: T) -> Result<Self> {
        if !(h > T::lit(0.5) && h < T::one()) {
            return domain(format!("Hurst index must lie in (1/2, 1), got {h}"));
        }
        let half = T::lit(0.5);
        let kappa = (h * (T::lit(2.0) * h - T::one()) * half).sqrt();
        let c = kappa / beta_fn(T::one() - h, h * half)?;
        let gamma_half = gamma_fn(h * half)?;
        Ok(Hurst { h, c, d: c * gamma_half * gamma_half, kappa, gamma_half })
    }

    /// Fractional order H/2 of the Weyl integral in the S-transforms.
    pub fn alpha(&self) -> T {
        self.h * T::lit(0.5)
    }

    /// Kernel exponent H/2 − 1.
    pub fn a(&self) -> T {
        self.h * T::lit(0.5) - T::one()
    }

    /// H(2H−1).
    pub fn h2h1(&self) -> T {
        self.h * (T::lit(2.0) * self.h - T::one())
    }
}

/// Shorthand for `Hurst::new`.
pub fn make_hurst<T: Real>(h: T) -> Result<Hurst<T>> {
    Hurst::new(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constants_at_three_quarters() {
        let h = Hurst::new(0.75f64).unwrap();
        let want = 0.1875f64.sqrt() / beta_fn(0.25, 0.375).unwrap();
        assert_relative_eq!(h.c, want, max_relative = 1e-14);
        assert_relative_eq!(h.d / h.c, gamma_fn(0.375f64).unwrap().powi(2), max_relative = 1e-14);
    }

    #[test]
    fn d_over_c_is_gamma_squared() {
        for &x in &[0.55f64, 0.7, 0.95] {
            let h = Hurst::new(x).unwrap();
            assert_relative_eq!(h.d / h.c, gamma_fn(x / 2.0).unwrap().powi(2), max_relative = 1e-14);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        for &x in &[0.5f64, 1.0, 0.2, f64::NAN] {
            assert!(Hurst::new(x).is_err());
        }
    }
}
