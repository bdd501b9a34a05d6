//! Percolation events, Monte Carlo estimators and audits.
//!
//! Estimators run on [`TileWorld`]s: each trial is an exact sample of the
//! whole plane, explored only as far as the event requires. Trials draw from
//! the substreams `seed / TRIAL / i` and are reduced in trial order, so
//! results do not depend on the number of worker threads.

mod estimate;
mod events;
mod sharpness;
mod stats;

pub use estimate::{
    arm_threshold_samples, estimate_pc, estimate_theta, estimate_theta_grid, fkg_audit, mean_field_check,
    russo_audit, theta_decay, FkgReport, MeanFieldReport, PcEstimate, RussoReport,
};
pub use events::{
    arm_thresholds, black_clusters, evaluate_event, explore, one_arm_event, pivotal_set, world_event,
    world_pivotal, Coloring, LocalEvent,
};
pub use sharpness::{sharpness_grid, sharpness_ode_check, SharpnessCheck, SharpnessReport};
pub use stats::{fit_decay, DecayFit, EstimateResult, Z95};

use rayon::prelude::*;

use crate::error::Result;
use crate::rng::{tag, RngStream};
use crate::world::TileWorld;

/// Tile scale of the worlds used by the estimators: about three expected
/// points per tile, so that tiles neither swamp the bookkeeping nor hold far
/// more points than a certificate needs.
pub fn tile_epsilon(lambda: f64) -> f64 {
    (3.0 / (4.0 * std::f64::consts::PI * lambda)).sqrt().asinh().clamp(0.25, 2.0)
}

/// Stream of trial `i`.
pub fn trial_stream(seed: u64, i: u64) -> RngStream {
    RngStream::new(seed).descend(&[tag::TRIAL, i])
}

/// The world of trial `i` tiled at scale `epsilon`.
pub fn trial_world(lambda: f64, epsilon: f64, seed: u64, i: u64) -> Result<TileWorld> {
    TileWorld::new(lambda, epsilon, trial_stream(seed, i))
}

/// Runs `f` on trials `0..trials` in parallel, returning results in trial order.
pub(crate) fn run_trials<T, F>(trials: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}
