//! Discrete Wiener chaos (orders 0 to 4) on weighted grids, the variance identity for Wick
//! integrals, and samplers.

mod paths;
mod sampling;
mod variance;
mod vector;

pub use paths::{rosenblatt_cov, simulate_paths, Diagonal, PathConfig, PathEnsemble, PathMethod, PathSimulator};
pub use sampling::{sample_moments, simulate_marginal, skewness_jackknife, SampleMoments};
pub use variance::{variance_bruteforce, variance_rhs, IntegrandSpec, VarianceTerms, MAX_VARIANCE_NODES};
pub use vector::{trapezoid_grid, ChaosVector, Direction, MAX_ENTRIES, MAX_ORDER};
