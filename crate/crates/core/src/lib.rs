//! Numerics for the Rosenblatt process.
//!
//! Everything is generic over the scalar type (`f32` or `f64`) through [`numcore::Real`];
//! the aliases below fix it to `f64`, which is what the verification tolerances assume.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chaos;
pub mod charfn;
pub mod error;
pub mod fracint;
pub mod kernels;
pub mod moments;
pub mod numcore;
pub mod spectral;
pub mod stransform;

pub use error::{Error, Result};
pub use numcore::{Real, SeedSpec};

/// Library version, echoed in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Grid1D = numcore::Grid1D<f64>;
pub type Hurst = kernels::Hurst<f64>;
pub type KernelGrid = kernels::KernelGrid<f64>;
pub type SmoothTestFunction = fracint::SmoothTestFunction<f64>;
pub type Spectrum = spectral::Spectrum<f64>;
pub type CumulantTable = charfn::CumulantTable<f64>;
pub type TranslatedCf = charfn::TranslatedCf<f64>;
pub type SContext = stransform::SContext<f64>;
pub type BandLimitedF = stransform::BandLimitedF<f64>;
pub type TimeWeight = stransform::TimeWeight<f64>;
pub type ChaosVector = chaos::ChaosVector<f64>;
pub type IntegrandSpec = chaos::IntegrandSpec<f64>;
pub type PathEnsemble = chaos::PathEnsemble<f64>;
