//! Cellular coverage simulation for UAVs flying over terrain, served by
//! sectorised base stations with steerable planar arrays.
//!
//! The crate covers terrain and line-of-sight queries, the antenna model,
//! the link budget, deployments, UAV mobility, A3 handover with beam
//! tracking, per-trajectory metrics and the simulation engine that ties them
//! together.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antenna;
pub mod channel;
pub mod engine;
pub mod error;
pub mod handover;
pub mod metrics;
pub mod mobility;
pub mod network;
pub mod plot;
pub mod report;
pub mod terrain;

pub use antenna::{
    array_factor, array_gain_db, element_gain_db, half_power_beamwidth_deg, pattern_cut, ArraySpec, ElementPattern,
    Plane, SectorOrientation, SteeringAngles, SteeringLimits,
};
pub use channel::{noise_power_dbm, pathloss_db, rx_power_dbm, snr_db, LinkSample, RadioConfig};
pub use engine::{run, sweep, Scenario, ScenarioConfig, SweepAxis, SweepError, TrajectoryConfig, TrajectoryOutcome};
pub use error::{Error, Result};
pub use handover::{A3Config, ConnectionState, HandoverEvent, MeasurementPolicy};
pub use metrics::{ecdf, handover_rate, outage_cost, ping_pong_count, EcdfPoint, TrajectoryMetrics};
pub use mobility::{generate_trajectories, AltitudeMode, Trajectory, TrajectoryParams, TrajectorySet, UavState};
pub use network::{
    best_server, measure_cell, ArrayRecord, BeamMode, BeamState, Deployment, DeploymentDefaults, LinkModel,
    MeasurementAssumption, Sector, Site,
};
pub use report::{write_report, write_sweep, HandoverRecord, RunReport, RunSummary, SampleRecord};
pub use terrain::{angles_to, DirectionAngles, Position, TerrainGrid};
