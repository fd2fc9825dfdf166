//! Scenario configuration and the time-stepped simulation loop.
//!
//! Each trajectory is simulated on its own copy of the deployment, so beam
//! state never leaks between trajectories and the result does not depend on
//! whether trajectories run serially or in parallel. Within a step the order
//! is fixed: move, track, sample, evaluate A3, hand over.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::antenna::{ElementPattern, SteeringLimits};
use crate::channel::{noise_power_dbm, LinkSample, RadioConfig};
use crate::error::{Error, Result};
use crate::handover::{evaluate_a3, execute_handover, tracking_update, A3Config, HandoverEvent, MeasurementPolicy};
use crate::metrics::{
    ecdf, mean, median, trajectory_metrics, TrajectoryMetrics, DEFAULT_OUTAGE_THRESHOLD_DB, DEFAULT_PING_PONG_WINDOW_S,
};
use crate::mobility::{generate_trajectories, load_trajectories, AltitudeMode, Trajectory, TrajectoryParams};
use crate::network::{
    best_server, measure_cell, ArrayRecord, BeamMode, BeamState, Deployment, DeploymentDefaults, LinkModel,
    MeasurementAssumption, DEFAULT_DOWNTILT_DEG, DEFAULT_SITE_HEIGHT_M,
};
use crate::report::{HandoverRecord, RunReport, RunSummary, SampleRecord};
use crate::terrain::{TerrainGrid, DEFAULT_LOS_STEP_M};

const TIME_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub count: usize,
    pub seed: u64,
    pub altitude_agl_m: f64,
    pub speed_mps: f64,
    pub duration_s: f64,
    pub altitude_mode: AltitudeMode,
    /// Replay a trajectory CSV instead of drawing a random set.
    pub file: Option<String>,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        let p = TrajectoryParams::default();
        Self {
            count: p.count,
            seed: p.seed,
            altitude_agl_m: p.altitude_agl_m,
            speed_mps: p.speed_mps,
            duration_s: p.duration_s,
            altitude_mode: AltitudeMode::Constant,
            file: None,
        }
    }
}

impl TrajectoryConfig {
    pub fn params(&self) -> TrajectoryParams {
        TrajectoryParams {
            count: self.count,
            seed: self.seed,
            altitude_agl_m: self.altitude_agl_m,
            speed_mps: self.speed_mps,
            duration_s: self.duration_s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub radio: RadioConfig,
    pub element: ElementPattern,
    /// `hex:<rings>:<isd_m>`, `grid:<nx>x<ny>:<spacing_m>` or a JSON file.
    pub deployment: String,
    /// `flat:<height_m>` or a CSV grid file.
    pub terrain: String,
    /// Side of the square map used by `flat:` terrain.
    pub map_side_m: f64,
    pub site_height_m: f64,
    pub downtilt_deg: f64,
    /// Array used by every sector; `None` keeps the deployment's own arrays
    /// (8x8 for synthetic layouts).
    pub array: Option<ArrayRecord>,
    pub trajectories: TrajectoryConfig,
    pub beam_mode: BeamMode,
    pub update_period_s: f64,
    pub a3: A3Config,
    /// How neighbours are measured for A3 in tracking mode.
    pub neighbor_measurement: MeasurementAssumption,
    pub time_step_s: f64,
    pub outage_threshold_db: f64,
    pub los_step_m: f64,
    pub ping_pong_window_s: f64,
    pub steering_limits: SteeringLimits,
    /// Simulate trajectories on the rayon pool.
    pub parallel: bool,
    /// Keep every per-step link sample in the report.
    pub keep_samples: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            radio: RadioConfig::default(),
            element: ElementPattern::default(),
            deployment: "hex:2:500".into(),
            terrain: "flat:30".into(),
            map_side_m: 4000.0,
            site_height_m: DEFAULT_SITE_HEIGHT_M,
            downtilt_deg: DEFAULT_DOWNTILT_DEG,
            array: None,
            trajectories: TrajectoryConfig::default(),
            beam_mode: BeamMode::Tracking,
            update_period_s: 0.1,
            a3: A3Config::default(),
            neighbor_measurement: MeasurementAssumption::Aligned,
            time_step_s: 0.1,
            outage_threshold_db: DEFAULT_OUTAGE_THRESHOLD_DB,
            los_step_m: DEFAULT_LOS_STEP_M,
            ping_pong_window_s: DEFAULT_PING_PONG_WINDOW_S,
            steering_limits: SteeringLimits::default(),
            parallel: true,
            keep_samples: false,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str, name: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: name.to_string(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text, &path.display().to_string())?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    /// Makes relative file references relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |s: &mut String| {
            let is_synthetic = ["flat:", "hex:", "grid:"].iter().any(|p| s.starts_with(p));
            if !is_synthetic && Path::new(s.as_str()).is_relative() {
                *s = base.join(s.as_str()).display().to_string();
            }
        };
        fix(&mut self.terrain);
        fix(&mut self.deployment);
        if let Some(f) = self.trajectories.file.as_mut() {
            fix(f);
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        self.element.validate()?;
        self.a3.validate()?;
        self.steering_limits.validate()?;
        if !(self.time_step_s > 0.0) {
            return Err(Error::config("time_step_s", "must be > 0"));
        }
        if !(self.update_period_s + TIME_EPS >= self.time_step_s) {
            return Err(Error::config(
                "update_period_s",
                format!("must be >= time_step_s ({} s)", self.time_step_s),
            ));
        }
        if !(self.map_side_m > 0.0) {
            return Err(Error::config("map_side_m", "must be > 0"));
        }
        if !(self.site_height_m > 0.0) {
            return Err(Error::config("site_height_m", "must be > 0"));
        }
        if !(-90.0..=90.0).contains(&self.downtilt_deg) {
            return Err(Error::config("downtilt_deg", "must be in [-90, 90]"));
        }
        if !(self.los_step_m > 0.0) {
            return Err(Error::config("los_step_m", "must be > 0"));
        }
        if !(self.ping_pong_window_s >= 0.0) {
            return Err(Error::config("ping_pong_window_s", "must be >= 0"));
        }
        if !self.outage_threshold_db.is_finite() {
            return Err(Error::config("outage_threshold_db", "must be finite"));
        }
        if let Some(a) = &self.array {
            a.to_spec(self.element).validate()?;
        }
        let t = &self.trajectories;
        if t.file.is_none() {
            if t.count == 0 {
                return Err(Error::config("trajectories.count", "must be >= 1"));
            }
            if !(t.speed_mps > 0.0) {
                return Err(Error::config("trajectories.speed_mps", "must be > 0"));
            }
            if !(t.duration_s > 0.0) {
                return Err(Error::config("trajectories.duration_s", "must be > 0"));
            }
        }
        if !(t.altitude_agl_m >= 0.0) {
            return Err(Error::config("trajectories.altitude_agl_m", "must be >= 0"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the configuration.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&json))
    }

    fn measurement_policy(&self) -> MeasurementPolicy {
        match self.beam_mode {
            BeamMode::Tracking => MeasurementPolicy {
                serving: MeasurementAssumption::Current,
                neighbor: self.neighbor_measurement,
            },
            BeamMode::Static => MeasurementPolicy::STATIC,
        }
    }

    fn initial_assumption(&self) -> MeasurementAssumption {
        match self.beam_mode {
            BeamMode::Tracking => MeasurementAssumption::Aligned,
            BeamMode::Static => MeasurementAssumption::Static,
        }
    }
}

/// Terrain, deployment and trajectories resolved from a configuration.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub terrain: TerrainGrid,
    pub deployment: Deployment,
    pub trajectories: Vec<Trajectory>,
    pub warnings: Vec<String>,
}

impl Scenario {
    pub fn build(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let terrain = TerrainGrid::from_source(&config.terrain, config.map_side_m)?;
        let defaults = DeploymentDefaults {
            site_height_m: config.site_height_m,
            downtilt_deg: config.downtilt_deg,
            array: config.array.unwrap_or(ArrayRecord::new(8, 8)).to_spec(config.element),
        };
        let mut deployment = Deployment::from_source(&config.deployment, &terrain, &defaults)?;
        if let Some(a) = &config.array {
            deployment.set_array(&a.to_spec(config.element));
        }
        deployment.set_beam_mode(config.beam_mode);

        let mut warnings = Vec::new();
        let trajectories = match &config.trajectories.file {
            Some(path) => load_trajectories(path, &terrain)?,
            None => {
                let set = generate_trajectories(&config.trajectories.params(), &terrain.area(), &terrain)?;
                if set.boundary_clipped {
                    warnings.push(
                        "map too small for the requested path length: starts drawn over the whole map \
                         and paths clipped at the boundary"
                            .to_string(),
                    );
                }
                set.trajectories
            }
        };
        Ok(Self {
            config: config.clone(),
            terrain,
            deployment,
            trajectories,
            warnings,
        })
    }

    fn link(&self) -> LinkModel<'_> {
        LinkModel {
            radio: &self.config.radio,
            terrain: &self.terrain,
            los_step_m: self.config.los_step_m,
            limits: self.config.steering_limits,
        }
    }

    /// Runs one trajectory from a fresh copy of the deployment.
    pub fn simulate_trajectory(&self, trajectory: &Trajectory) -> Result<TrajectoryOutcome> {
        let cfg = &self.config;
        let link = self.link();
        let limits = cfg.steering_limits;
        let policy = cfg.measurement_policy();
        let noise = noise_power_dbm(&cfg.radio);
        let mode = cfg.trajectories.altitude_mode;
        let mut deployment = self.deployment.clone();

        let realized = trajectory.realized_duration(&self.terrain.area());
        if !(realized > 0.0) {
            return Err(Error::config(
                "trajectories",
                format!("trajectory {} starts on or outside the map boundary", trajectory.id),
            ));
        }
        let n_steps = (realized / cfg.time_step_s + TIME_EPS).floor() as usize;

        let start = trajectory.step(0.0, &self.terrain, mode)?.position;
        let serving = best_server(&link, &deployment, &start, cfg.initial_assumption())?;
        let idx = deployment.sector_index(serving).expect("best server is deployed");
        if cfg.beam_mode == BeamMode::Tracking {
            let s = &mut deployment.sectors[idx];
            s.beam.steer = s.aligned_steer(&start, &limits)?;
            s.beam.last_update_t = 0.0;
        }
        let mut state = crate::handover::ConnectionState::new(serving);
        let mut samples = Vec::with_capacity(n_steps + 1);

        for k in 0..=n_steps {
            let t = k as f64 * cfg.time_step_s;
            let uav = trajectory
                .step(t.min(trajectory.duration_s), &self.terrain, mode)?
                .position;

            let idx = deployment
                .sector_index(state.serving_sector_id)
                .expect("serving sector is deployed");
            tracking_update(&mut deployment.sectors[idx], &uav, t, cfg.update_period_s, &limits)?;

            let sector = &deployment.sectors[idx];
            let m = measure_cell(&link, sector, &uav, policy.serving)?;
            samples.push(LinkSample {
                t,
                serving_sector_id: sector.id,
                snr_db: m.rx_power_dbm - noise,
                rx_power_dbm: m.rx_power_dbm,
                los: m.los,
                misalignment_deg: sector.misalignment_deg(&uav, &limits)?,
            });

            if let Some(c) = evaluate_a3(&mut state, &deployment, &link, &uav, &cfg.a3, policy, t)? {
                execute_handover(
                    &mut state,
                    c.sector_id,
                    &mut deployment,
                    &uav,
                    &limits,
                    c.rx_delta_db,
                    t,
                )?;
            }
        }

        let metrics = trajectory_metrics(
            trajectory.id,
            &samples,
            &state.handover_log,
            realized,
            cfg.outage_threshold_db,
            cfg.ping_pong_window_s,
        )?;
        Ok(TrajectoryOutcome {
            metrics,
            handovers: state.handover_log,
            samples,
            final_beams: deployment.sectors.iter().map(|s| (s.id, s.beam)).collect(),
        })
    }

    pub fn run(&self) -> Result<RunReport> {
        let outcomes: Vec<TrajectoryOutcome> = if self.config.parallel {
            self.trajectories
                .par_iter()
                .map(|t| self.simulate_trajectory(t))
                .collect::<Result<_>>()?
        } else {
            self.trajectories
                .iter()
                .map(|t| self.simulate_trajectory(t))
                .collect::<Result<_>>()?
        };
        self.assemble(outcomes)
    }

    fn assemble(&self, outcomes: Vec<TrajectoryOutcome>) -> Result<RunReport> {
        let cfg = &self.config;
        let mut metrics = Vec::with_capacity(outcomes.len());
        let mut handovers = Vec::new();
        let mut samples = Vec::new();
        for o in outcomes {
            let id = o.metrics.trajectory_id;
            handovers.extend(o.handovers.iter().map(|e| HandoverRecord::new(id, e)));
            if cfg.keep_samples {
                samples.extend(o.samples.iter().map(|s| SampleRecord::new(id, s)));
            }
            metrics.push(o.metrics);
        }
        let outage: Vec<f64> = metrics.iter().map(|m| m.outage_cost).collect();
        let rates: Vec<f64> = metrics.iter().map(|m| m.handovers_per_min).collect();
        let array_label = match &cfg.array {
            Some(a) => a.to_string(),
            None => "deployment".to_string(),
        };
        let summary = RunSummary {
            seed: cfg.trajectories.seed,
            trajectories: metrics.len(),
            sites: self.deployment.sites.len(),
            sectors: self.deployment.sectors.len(),
            beam_mode: cfg.beam_mode,
            array: array_label,
            update_period_s: cfg.update_period_s,
            altitude_agl_m: cfg.trajectories.altitude_agl_m,
            median_outage_cost: median(&outage).unwrap_or(0.0),
            mean_outage_cost: mean(&outage).unwrap_or(0.0),
            median_handovers_per_min: median(&rates).unwrap_or(0.0),
            mean_handovers_per_min: mean(&rates).unwrap_or(0.0),
            total_handovers: handovers.len(),
            total_ping_pongs: metrics.iter().map(|m| m.ping_pongs).sum(),
        };
        Ok(RunReport {
            fingerprint: cfg.fingerprint(),
            config: cfg.clone(),
            summary,
            ecdf_outage: ecdf(&outage)?,
            ecdf_handover_rate: ecdf(&rates)?,
            metrics,
            handovers,
            samples,
            trajectories: self.trajectories.clone(),
            warnings: self.warnings.clone(),
        })
    }
}

/// Raw and aggregated results of one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryOutcome {
    pub metrics: TrajectoryMetrics,
    pub handovers: Vec<HandoverEvent>,
    pub samples: Vec<LinkSample>,
    /// Beam state of every sector when the trajectory ended.
    pub final_beams: Vec<(u32, BeamState)>,
}

/// Builds the scenario and simulates every trajectory.
pub fn run(config: &ScenarioConfig) -> Result<RunReport> {
    Scenario::build(config)?.run()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Topology,
    UpdatePeriod,
    Altitude,
}

impl SweepAxis {
    pub const NAMES: [&'static str; 3] = ["topology", "update-period", "altitude"];

    /// Applies one sweep value to a copy of `base`.
    pub fn apply(&self, base: &ScenarioConfig, value: &str) -> Result<ScenarioConfig> {
        let mut cfg = base.clone();
        let number = |field: &str| {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::config(field, format!("sweep value `{value}` is not a number")))
        };
        match self {
            SweepAxis::Topology => cfg.array = Some(value.parse()?),
            SweepAxis::UpdatePeriod => cfg.update_period_s = number("update_period_s")?,
            SweepAxis::Altitude => cfg.trajectories.altitude_agl_m = number("trajectories.altitude_agl_m")?,
        }
        Ok(cfg)
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "topology" => Ok(SweepAxis::Topology),
            "update-period" | "update_period" => Ok(SweepAxis::UpdatePeriod),
            "altitude" => Ok(SweepAxis::Altitude),
            _ => Err(Error::config(
                "axis",
                format!("unknown sweep axis `{s}`; valid axes: {}", SweepAxis::NAMES.join(", ")),
            )),
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::Topology => "topology",
            SweepAxis::UpdatePeriod => "update-period",
            SweepAxis::Altitude => "altitude",
        })
    }
}

/// A sweep that stopped early; `completed` holds the runs that finished.
#[derive(Debug)]
pub struct SweepError {
    pub completed: Vec<(String, RunReport)>,
    pub failed_value: String,
    pub source: Error,
}

impl std::fmt::Display for SweepError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "sweep aborted at value `{}` after {} completed run(s): {}",
            self.failed_value,
            self.completed.len(),
            self.source
        )
    }
}

impl std::error::Error for SweepError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

/// One run per value; every run reuses the base trajectory seed.
pub fn sweep(
    base: &ScenarioConfig,
    axis: SweepAxis,
    values: &[String],
) -> std::result::Result<Vec<(String, RunReport)>, SweepError> {
    let mut completed = Vec::with_capacity(values.len());
    if values.is_empty() {
        return Err(SweepError {
            completed,
            failed_value: String::new(),
            source: Error::Empty("sweep values"),
        });
    }
    for v in values {
        match axis.apply(base, v).and_then(|cfg| run(&cfg)) {
            Ok(report) => completed.push((v.clone(), report)),
            Err(source) => {
                return Err(SweepError {
                    completed,
                    failed_value: v.clone(),
                    source,
                })
            }
        }
    }
    Ok(completed)
}
