//! The scenario-file reference printed by `--help`.

use aerobeam::ScenarioConfig;
use serde_json::Value;

const DESCRIPTIONS: &[(&str, &str)] = &[
    ("radio.carrier_hz", "carrier frequency"),
    ("radio.bandwidth_hz", "channel bandwidth"),
    ("radio.tx_power_dbm", "sector transmit power"),
    ("radio.noise_density_dbm_hz", "thermal noise density"),
    ("radio.noise_figure_db", "receiver noise figure"),
    ("radio.uav_antenna_gain_dbi", "UAV antenna gain"),
    ("radio.nlos_penalty_db", "extra loss when terrain blocks the path"),
    ("element.max_gain_dbi", "element peak gain"),
    ("element.hpbw_deg", "element half-power beamwidth"),
    ("element.side_lobe_floor_db", "element side-lobe attenuation limit"),
    ("element.front_back_db", "element front-to-back ratio"),
    (
        "deployment",
        "hex:<rings>:<isd_m>, grid:<nx>x<ny>:<spacing_m> or a JSON file",
    ),
    ("terrain", "flat:<height_m> or a CSV height grid"),
    ("map_side_m", "side of the square map for flat terrain"),
    ("site_height_m", "antenna height above ground"),
    ("downtilt_deg", "sector downtilt"),
    (
        "array",
        "per-sector array {m, n, dz, dy}; null keeps deployment arrays (8x8 synthetic)",
    ),
    ("trajectories.count", "number of trajectories"),
    ("trajectories.seed", "trajectory RNG seed"),
    ("trajectories.altitude_agl_m", "UAV altitude above ground"),
    ("trajectories.speed_mps", "UAV speed"),
    ("trajectories.duration_s", "flight duration"),
    ("trajectories.altitude_mode", "constant | terrain_following"),
    ("trajectories.file", "trajectory CSV to replay instead of drawing"),
    ("beam_mode", "tracking | static"),
    ("update_period_s", "beam tracking update period"),
    ("a3.threshold_db", "A3 offset"),
    ("a3.time_to_trigger_s", "A3 time to trigger"),
    ("a3.hysteresis_db", "A3 hysteresis added to the offset"),
    (
        "neighbor_measurement",
        "aligned | current | static beam assumed for neighbours",
    ),
    ("time_step_s", "simulation time step"),
    ("outage_threshold_db", "SNR below which a sample is in outage"),
    ("los_step_m", "line-of-sight sampling step"),
    ("ping_pong_window_s", "return window counted as ping-pong"),
    ("steering_limits.azimuth_deg", "maximum azimuth scan off boresight"),
    ("steering_limits.elevation_deg", "maximum elevation scan off boresight"),
    ("parallel", "simulate trajectories on all cores"),
    ("keep_samples", "also write samples.csv with every link sample"),
];

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, child, out);
            }
        }
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Every config key with its default, in file order.
pub fn default_keys() -> Vec<(String, String)> {
    let v = serde_json::to_value(ScenarioConfig::default()).expect("default config serialises");
    let mut out = Vec::new();
    flatten("", &v, &mut out);
    out
}

pub fn help_text() -> String {
    let keys = default_keys();
    let width = keys.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut text = String::from("Scenario file keys (JSON, all optional) and defaults:\n");
    for (k, default) in &keys {
        let desc = DESCRIPTIONS.iter().find(|(d, _)| d == k).map_or("", |(_, d)| d);
        text.push_str(&format!("  {k:<width$}  {default:<14} {desc}\n"));
    }
    text
}
