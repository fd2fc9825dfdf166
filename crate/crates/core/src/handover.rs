//! A3-event handover and periodic beam tracking.

use serde::{Deserialize, Serialize};

use crate::antenna::SteeringLimits;
use crate::error::{Error, Result};
use crate::network::{measure_cell, BeamMode, BeamState, Deployment, LinkModel, MeasurementAssumption, Sector};
use crate::terrain::Position;

/// Tolerance for comparing accumulated simulation times.
const TIME_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct A3Config {
    pub threshold_db: f64,
    pub time_to_trigger_s: f64,
    pub hysteresis_db: f64,
}

impl Default for A3Config {
    fn default() -> Self {
        Self {
            threshold_db: 3.0,
            time_to_trigger_s: 0.0,
            hysteresis_db: 0.0,
        }
    }
}

impl A3Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_db >= 0.0) {
            return Err(Error::config("a3.threshold_db", "must be >= 0"));
        }
        if !(self.time_to_trigger_s >= 0.0) {
            return Err(Error::config("a3.time_to_trigger_s", "must be >= 0"));
        }
        if !(self.hysteresis_db >= 0.0) {
            return Err(Error::config("a3.hysteresis_db", "must be >= 0"));
        }
        Ok(())
    }

    /// Margin a neighbour must beat the serving cell by.
    pub fn entry_margin_db(&self) -> f64 {
        self.threshold_db + self.hysteresis_db
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandoverEvent {
    pub t: f64,
    pub from_sector: u32,
    pub to_sector: u32,
    pub trigger_rx_delta_db: f64,
}

/// A neighbour that satisfied the A3 condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct A3Candidate {
    pub sector_id: u32,
    pub rx_delta_db: f64,
}

/// How the serving cell and its neighbours are measured for A3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementPolicy {
    pub serving: MeasurementAssumption,
    pub neighbor: MeasurementAssumption,
}

impl MeasurementPolicy {
    pub const TRACKING: MeasurementPolicy = MeasurementPolicy {
        serving: MeasurementAssumption::Current,
        neighbor: MeasurementAssumption::Aligned,
    };
    pub const STATIC: MeasurementPolicy = MeasurementPolicy {
        serving: MeasurementAssumption::Static,
        neighbor: MeasurementAssumption::Static,
    };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionState {
    pub serving_sector_id: u32,
    pub a3_pending_since: Option<f64>,
    pub handover_log: Vec<HandoverEvent>,
}

impl ConnectionState {
    pub fn new(serving_sector_id: u32) -> Self {
        Self {
            serving_sector_id,
            a3_pending_since: None,
            handover_log: Vec::new(),
        }
    }

    /// Feeds one measurement round into the A3 timer. `best_neighbor` is the
    /// strongest non-serving cell and its power.
    pub fn observe_a3(
        &mut self,
        serving_rx_dbm: f64,
        best_neighbor: Option<(u32, f64)>,
        cfg: &A3Config,
        t: f64,
    ) -> Option<A3Candidate> {
        let entered = best_neighbor.filter(|&(_, rx)| rx - serving_rx_dbm >= cfg.entry_margin_db());
        let Some((sector_id, rx)) = entered else {
            self.a3_pending_since = None;
            return None;
        };
        let since = *self.a3_pending_since.get_or_insert(t);
        if t - since + TIME_EPS >= cfg.time_to_trigger_s {
            Some(A3Candidate {
                sector_id,
                rx_delta_db: rx - serving_rx_dbm,
            })
        } else {
            None
        }
    }
}

/// Measures the serving cell and all neighbours, then runs the A3 timer.
pub fn evaluate_a3(
    state: &mut ConnectionState,
    deployment: &Deployment,
    link: &LinkModel<'_>,
    uav: &Position,
    cfg: &A3Config,
    policy: MeasurementPolicy,
    t: f64,
) -> Result<Option<A3Candidate>> {
    let serving = deployment
        .sector(state.serving_sector_id)
        .ok_or_else(|| Error::Handover(format!("serving sector {} is not deployed", state.serving_sector_id)))?;
    let serving_rx = measure_cell(link, serving, uav, policy.serving)?.rx_power_dbm;
    let mut best: Option<(u32, f64)> = None;
    for s in &deployment.sectors {
        if s.id == state.serving_sector_id {
            continue;
        }
        let rx = measure_cell(link, s, uav, policy.neighbor)?.rx_power_dbm;
        if best.is_none_or(|(_, b)| rx > b) {
            best = Some((s.id, rx));
        }
    }
    Ok(state.observe_a3(serving_rx, best, cfg, t))
}

/// Hands the UAV over to `to_sector`. A tracking target beam is steered
/// straight at the UAV at no cost.
pub fn execute_handover(
    state: &mut ConnectionState,
    to_sector: u32,
    deployment: &mut Deployment,
    uav: &Position,
    limits: &SteeringLimits,
    rx_delta_db: f64,
    t: f64,
) -> Result<()> {
    if to_sector == state.serving_sector_id {
        return Err(Error::Handover(format!("handover from sector {to_sector} to itself")));
    }
    let idx = deployment
        .sector_index(to_sector)
        .ok_or_else(|| Error::Handover(format!("target sector {to_sector} is not deployed")))?;
    let target = &mut deployment.sectors[idx];
    if target.beam.mode == BeamMode::Tracking {
        target.beam.steer = target.aligned_steer(uav, limits)?;
        target.beam.last_update_t = t;
    }
    state.handover_log.push(HandoverEvent {
        t,
        from_sector: state.serving_sector_id,
        to_sector,
        trigger_rx_delta_db: rx_delta_db,
    });
    state.serving_sector_id = to_sector;
    state.a3_pending_since = None;
    Ok(())
}

/// Re-steers a tracking beam at the UAV once `update_period_s` has passed
/// since its last update. Static beams never move.
pub fn tracking_update(
    sector: &mut Sector,
    uav: &Position,
    t: f64,
    update_period_s: f64,
    limits: &SteeringLimits,
) -> Result<BeamState> {
    if sector.beam.mode == BeamMode::Tracking && t - sector.beam.last_update_t + TIME_EPS >= update_period_s {
        sector.beam.steer = sector.aligned_steer(uav, limits)?;
        sector.beam.last_update_t = t;
    }
    Ok(sector.beam)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a3_threshold_examples() {
        let cfg = A3Config::default();
        let mut s = ConnectionState::new(1);
        let c = s.observe_a3(-70.0, Some((2, -66.0)), &cfg, 0.0).unwrap();
        assert_eq!(c.sector_id, 2);
        assert!((c.rx_delta_db - 4.0).abs() < 1e-12);

        let mut s = ConnectionState::new(1);
        assert!(s.observe_a3(-70.0, Some((2, -68.0)), &cfg, 0.0).is_none());
        assert!(s.a3_pending_since.is_none());
        assert!(s.observe_a3(-70.0, None, &cfg, 0.0).is_none());
    }

    #[test]
    fn exactly_at_threshold_triggers() {
        let mut s = ConnectionState::new(1);
        assert!(s
            .observe_a3(-70.0, Some((2, -67.0)), &A3Config::default(), 0.0)
            .is_some());
    }

    #[test]
    fn time_to_trigger_walk() {
        let cfg = A3Config {
            time_to_trigger_s: 0.2,
            ..Default::default()
        };
        let mut s = ConnectionState::new(1);
        let steps: Vec<_> = (0..3)
            .map(|k| s.observe_a3(-70.0, Some((2, -66.0)), &cfg, k as f64 * 0.1))
            .collect();
        assert!(steps[0].is_none());
        assert!(steps[1].is_none());
        assert_eq!(steps[2].map(|c| c.sector_id), Some(2));
    }

    #[test]
    fn lapse_resets_timer() {
        let cfg = A3Config {
            time_to_trigger_s: 0.2,
            ..Default::default()
        };
        let mut s = ConnectionState::new(1);
        assert!(s.observe_a3(-70.0, Some((2, -66.0)), &cfg, 0.0).is_none());
        assert!(s.observe_a3(-70.0, Some((2, -66.0)), &cfg, 0.1).is_none());
        assert!(s.observe_a3(-70.0, Some((2, -69.0)), &cfg, 0.2).is_none());
        assert!(s.observe_a3(-70.0, Some((2, -66.0)), &cfg, 0.3).is_none());
        assert!(s.observe_a3(-70.0, Some((2, -66.0)), &cfg, 0.4).is_none());
        assert!(s.observe_a3(-70.0, Some((2, -66.0)), &cfg, 0.5).is_some());
    }

    #[test]
    fn hysteresis_raises_entry_margin() {
        let cfg = A3Config {
            hysteresis_db: 2.0,
            ..Default::default()
        };
        let mut s = ConnectionState::new(1);
        assert!(s.observe_a3(-70.0, Some((2, -66.0)), &cfg, 0.0).is_none());
        assert!(s.observe_a3(-70.0, Some((2, -64.5)), &cfg, 0.1).is_some());
    }
}
