//! Shared substrate: scalar trait, special functions, quadrature, grids, seeded streams.

pub mod grid;
pub mod quad;
pub mod rng;
pub mod special;

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

pub use grid::Grid1D;
pub use quad::{quad_power_endpoint, Endpoint, GaussLegendre, PowerRule};
pub use rng::SeedSpec;
pub use special::{beta_fn, gamma_fn, hurwitz_zeta, inc_beta, ln_gamma};

/// Scalar type the library is generic over. Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + rustfft::FftNum
    + serde::Serialize
    + serde::de::DeserializeOwned
    + 'static
{
    /// Literal conversion, `T::lit(0.5)`.
    #[inline(always)]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap()
    }
    #[inline(always)]
    fn from_usize_(n: usize) -> Self {
        Self::from_usize(n).unwrap()
    }
    #[inline(always)]
    fn f64(self) -> f64 {
        self.to_f64().unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}
