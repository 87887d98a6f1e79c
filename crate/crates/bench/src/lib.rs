//! Shared fixtures for the pipeline benchmarks.

use gpk_core::gait::{generate_gait, SpeedProfile};
use gpk_core::GaitDataset;

/// A 30 s steady walk at 3.5 km/h with realistic sensor noise.
pub fn steady_walk() -> GaitDataset {
    generate_gait(&SpeedProfile::steady(3.5, 30.0).unwrap(), 1, 0.02).unwrap()
}
