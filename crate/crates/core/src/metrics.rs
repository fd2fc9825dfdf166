//! Per-trajectory link metrics and their empirical distributions.

use serde::{Deserialize, Serialize};

use crate::channel::LinkSample;
use crate::error::{Error, Result};
use crate::handover::HandoverEvent;

pub const DEFAULT_OUTAGE_THRESHOLD_DB: f64 = -6.0;
pub const DEFAULT_PING_PONG_WINDOW_S: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetrics {
    pub trajectory_id: u32,
    pub outage_cost: f64,
    pub handovers: usize,
    pub handovers_per_min: f64,
    pub ping_pongs: usize,
    pub realized_duration_s: f64,
    pub min_snr_db: f64,
    pub mean_snr_db: f64,
    pub max_snr_db: f64,
    pub mean_misalignment_deg: f64,
}

/// Fraction of samples whose SNR is strictly below `threshold_db`.
pub fn outage_cost(samples: &[LinkSample], threshold_db: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("outage cost of an empty sample series"));
    }
    let below = samples.iter().filter(|s| s.snr_db < threshold_db).count();
    Ok(below as f64 / samples.len() as f64)
}

/// Handovers per minute over `duration_s` seconds of flight.
pub fn handover_rate(log: &[HandoverEvent], duration_s: f64) -> Result<f64> {
    if !(duration_s > 0.0) {
        return Err(Error::config("duration_s", format!("must be > 0, got {duration_s}")));
    }
    Ok(60.0 * log.len() as f64 / duration_s)
}

/// Handovers that return to the sector just left within `window_s` of
/// leaving it.
pub fn ping_pong_count(log: &[HandoverEvent], window_s: f64) -> usize {
    log.windows(2)
        .filter(|w| w[1].to_sector == w[0].from_sector && w[1].t - w[0].t <= window_s + 1e-9)
        .count()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EcdfPoint {
    pub value: f64,
    pub cumulative_fraction: f64,
}

/// Empirical CDF as a step function with one point per distinct value.
pub fn ecdf(values: &[f64]) -> Result<Vec<EcdfPoint>> {
    if values.is_empty() {
        return Err(Error::Empty("ECDF of no values"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::config("values", "ECDF input contains NaN"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut out: Vec<EcdfPoint> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let fraction = (i + 1) as f64 / n as f64;
        match out.last_mut() {
            Some(last) if last.value == v => last.cumulative_fraction = fraction,
            _ => out.push(EcdfPoint {
                value: v,
                cumulative_fraction: fraction,
            }),
        }
    }
    Ok(out)
}

/// Median with the midpoint convention for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Builds one trajectory's metrics from its raw records.
pub fn trajectory_metrics(
    trajectory_id: u32,
    samples: &[LinkSample],
    log: &[HandoverEvent],
    realized_duration_s: f64,
    outage_threshold_db: f64,
    ping_pong_window_s: f64,
) -> Result<TrajectoryMetrics> {
    let snrs: Vec<f64> = samples.iter().map(|s| s.snr_db).collect();
    let misalign: Vec<f64> = samples.iter().map(|s| s.misalignment_deg).collect();
    Ok(TrajectoryMetrics {
        trajectory_id,
        outage_cost: outage_cost(samples, outage_threshold_db)?,
        handovers: log.len(),
        handovers_per_min: handover_rate(log, realized_duration_s)?,
        ping_pongs: ping_pong_count(log, ping_pong_window_s),
        realized_duration_s,
        min_snr_db: snrs.iter().copied().fold(f64::INFINITY, f64::min),
        mean_snr_db: mean(&snrs).unwrap_or(f64::NAN),
        max_snr_db: snrs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_misalignment_deg: mean(&misalign).unwrap_or(0.0),
    })
}
