//! Shared fixtures for the benchmarks.

use aerobeam::{ScenarioConfig, TrajectoryConfig};

/// A one-ring hex layout with a handful of short flights.
pub fn small_scenario(count: usize) -> ScenarioConfig {
    ScenarioConfig {
        deployment: "hex:1:500".into(),
        trajectories: TrajectoryConfig {
            count,
            duration_s: 30.0,
            ..Default::default()
        },
        parallel: false,
        ..Default::default()
    }
}
