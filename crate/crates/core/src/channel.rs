//! Link budget: free-space pathloss with a flat NLOS penalty, thermal noise
//! and SNR.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `20 log10(4 pi / c)`, the frequency-independent part of free-space loss
/// with distance in metres and frequency in hertz.
pub const FSPL_CONSTANT_DB: f64 = -147.55;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_density_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub uav_antenna_gain_dbi: f64,
    /// Extra loss applied when terrain blocks the direct path.
    pub nlos_penalty_db: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 26e9,
            bandwidth_hz: 400e6,
            tx_power_dbm: 18.0,
            noise_density_dbm_hz: -174.0,
            noise_figure_db: 9.0,
            uav_antenna_gain_dbi: 0.0,
            nlos_penalty_db: 20.0,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz > 0.0) {
            return Err(Error::config("radio.carrier_hz", "must be > 0"));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::config("radio.bandwidth_hz", "must be > 0"));
        }
        for (name, v) in [
            ("radio.tx_power_dbm", self.tx_power_dbm),
            ("radio.noise_density_dbm_hz", self.noise_density_dbm_hz),
            ("radio.noise_figure_db", self.noise_figure_db),
            ("radio.uav_antenna_gain_dbi", self.uav_antenna_gain_dbi),
            ("radio.nlos_penalty_db", self.nlos_penalty_db),
        ] {
            if !v.is_finite() {
                return Err(Error::config(name, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }
}

/// Per-step record of the serving link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkSample {
    pub t: f64,
    pub serving_sector_id: u32,
    pub snr_db: f64,
    pub rx_power_dbm: f64,
    pub los: bool,
    pub misalignment_deg: f64,
}

/// Pathloss in dB. Distances under 1 m are clamped to 1 m.
pub fn pathloss_db(cfg: &RadioConfig, distance_m: f64, los: bool) -> f64 {
    let d = if distance_m < 1.0 {
        log::warn!("pathloss distance {distance_m:.3} m clamped to 1 m");
        1.0
    } else {
        distance_m
    };
    let fspl = 20.0 * d.log10() + 20.0 * cfg.carrier_hz.log10() + FSPL_CONSTANT_DB;
    if los {
        fspl
    } else {
        fspl + cfg.nlos_penalty_db
    }
}

pub fn noise_power_dbm(cfg: &RadioConfig) -> f64 {
    cfg.noise_density_dbm_hz + 10.0 * cfg.bandwidth_hz.log10() + cfg.noise_figure_db
}

/// Received power in dBm at the UAV for a given base-station antenna gain.
pub fn rx_power_dbm(cfg: &RadioConfig, tx_gain_db: f64, distance_m: f64, los: bool) -> f64 {
    cfg.tx_power_dbm + tx_gain_db + cfg.uav_antenna_gain_dbi - pathloss_db(cfg, distance_m, los)
}

pub fn snr_db(cfg: &RadioConfig, tx_gain_db: f64, distance_m: f64, los: bool) -> f64 {
    rx_power_dbm(cfg, tx_gain_db, distance_m, los) - noise_power_dbm(cfg)
}
