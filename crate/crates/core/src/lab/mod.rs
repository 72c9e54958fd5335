//! Monte Carlo experiments: invariance, partition functions, the
//! Boué–Dupuis bound, transported densities and `K_R` diagnostics.
//!
//! Sample `i` of a run with master seed `seed` draws its initial data from
//! `RngStream::new(seed, i)` and its noise from a child of that stream, so
//! every estimate is a function of `(seed, config)` alone.

mod density;
mod invariance;
mod kr;
mod partition;
mod qi;
pub mod stats;
pub mod sweeps;

pub use density::{density_derivative_check, DensityConfig, DensityReport, Observable};
pub use invariance::{linear_invariance_test, InvarianceConfig, InvarianceReport};
pub use kr::{kr_membership, KRadiusCheck};
pub use partition::{
    bd_bound, maximize_inner, partition_estimate, partition_from_samples, potential_samples,
    quadratic_inner_maximum, BdConfig, BdReport, PartitionConfig, PartitionReport, Potential,
};
pub use qi::{quasi_invariance_scan, QiConfig, QiReport, QiRow};
pub use stats::{EstimatorReport, ReportMeta};

use crate::rng::RngStream;

const NOISE_TAG: u64 = 1;

/// Stream for the initial data of sample `i`.
pub fn sample_stream(seed: u64, i: u64) -> RngStream {
    RngStream::new(seed, i)
}

/// Stream for the noise increments of the trajectory started from `sample`.
pub fn noise_stream(sample: &RngStream) -> RngStream {
    sample.child(NOISE_TAG)
}
