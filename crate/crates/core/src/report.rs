//! Run reports and the files written for them.

use std::fs::{self, File};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::channel::LinkSample;
use crate::engine::ScenarioConfig;
use crate::error::{Error, Result};
use crate::handover::HandoverEvent;
use crate::metrics::{EcdfPoint, TrajectoryMetrics};
use crate::mobility::{write_trajectories_csv, Trajectory};
use crate::network::BeamMode;
use crate::plot::{ecdf_svg, EcdfSeries};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandoverRecord {
    pub trajectory_id: u32,
    pub t: f64,
    pub from_sector: u32,
    pub to_sector: u32,
    pub trigger_rx_delta_db: f64,
}

impl HandoverRecord {
    pub fn new(trajectory_id: u32, e: &HandoverEvent) -> Self {
        Self {
            trajectory_id,
            t: e.t,
            from_sector: e.from_sector,
            to_sector: e.to_sector,
            trigger_rx_delta_db: e.trigger_rx_delta_db,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub trajectory_id: u32,
    pub t: f64,
    pub serving_sector_id: u32,
    pub snr_db: f64,
    pub rx_power_dbm: f64,
    pub los: bool,
    pub misalignment_deg: f64,
}

impl SampleRecord {
    pub fn new(trajectory_id: u32, s: &LinkSample) -> Self {
        Self {
            trajectory_id,
            t: s.t,
            serving_sector_id: s.serving_sector_id,
            snr_db: s.snr_db,
            rx_power_dbm: s.rx_power_dbm,
            los: s.los,
            misalignment_deg: s.misalignment_deg,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub trajectories: usize,
    pub sites: usize,
    pub sectors: usize,
    pub beam_mode: BeamMode,
    pub array: String,
    pub update_period_s: f64,
    pub altitude_agl_m: f64,
    pub median_outage_cost: f64,
    pub mean_outage_cost: f64,
    pub median_handovers_per_min: f64,
    pub mean_handovers_per_min: f64,
    pub total_handovers: usize,
    pub total_ping_pongs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub fingerprint: String,
    pub config: ScenarioConfig,
    pub summary: RunSummary,
    pub metrics: Vec<TrajectoryMetrics>,
    pub handovers: Vec<HandoverRecord>,
    pub ecdf_outage: Vec<EcdfPoint>,
    pub ecdf_handover_rate: Vec<EcdfPoint>,
    #[serde(skip)]
    pub samples: Vec<SampleRecord>,
    #[serde(skip)]
    pub trajectories: Vec<Trajectory>,
    pub warnings: Vec<String>,
}

/// The JSON header written next to the CSV tables.
#[derive(Serialize)]
struct ReportHeader<'a> {
    fingerprint: &'a str,
    config: &'a ScenarioConfig,
    summary: &'a RunSummary,
    warnings: &'a [String],
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `report.json` and the CSV tables; SVG plots when `plots` is set.
pub fn write_report(report: &RunReport, dir: &Path, plots: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let header = ReportHeader {
        fingerprint: &report.fingerprint,
        config: &report.config,
        summary: &report.summary,
        warnings: &report.warnings,
    };
    write_text(&dir.join("report.json"), &serde_json::to_string_pretty(&header)?)?;
    write_csv(&dir.join("metrics.csv"), &report.metrics)?;
    write_csv(&dir.join("handovers.csv"), &report.handovers)?;
    write_csv(&dir.join("ecdf_outage.csv"), &report.ecdf_outage)?;
    write_csv(&dir.join("ecdf_handover_rate.csv"), &report.ecdf_handover_rate)?;
    if !report.samples.is_empty() {
        write_csv(&dir.join("samples.csv"), &report.samples)?;
    }
    let traj_path = dir.join("trajectories.csv");
    let file = File::create(&traj_path).map_err(|e| Error::io(&traj_path, e))?;
    write_trajectories_csv(file, &report.trajectories)?;

    if plots {
        let label = format!("{} {}", report.summary.beam_mode, report.summary.array);
        let dashed = report.summary.beam_mode == BeamMode::Static;
        let outage = [EcdfSeries::new(&label, &report.ecdf_outage, dashed)];
        write_text(&dir.join("ecdf_outage.svg"), &ecdf_svg(&outage, "outage cost")?)?;
        let rate = [EcdfSeries::new(&label, &report.ecdf_handover_rate, dashed)];
        write_text(
            &dir.join("ecdf_handover_rate.svg"),
            &ecdf_svg(&rate, "handovers per minute")?,
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub axis: String,
    pub value: String,
    pub fingerprint: String,
    pub median_outage_cost: f64,
    pub mean_outage_cost: f64,
    pub median_handovers_per_min: f64,
    pub mean_handovers_per_min: f64,
    pub total_handovers: usize,
    pub total_ping_pongs: usize,
}

pub fn comparison_rows(axis: &str, runs: &[(String, RunReport)]) -> Vec<ComparisonRow> {
    runs.iter()
        .map(|(value, r)| ComparisonRow {
            axis: axis.to_string(),
            value: value.clone(),
            fingerprint: r.fingerprint.clone(),
            median_outage_cost: r.summary.median_outage_cost,
            mean_outage_cost: r.summary.mean_outage_cost,
            median_handovers_per_min: r.summary.median_handovers_per_min,
            mean_handovers_per_min: r.summary.mean_handovers_per_min,
            total_handovers: r.summary.total_handovers,
            total_ping_pongs: r.summary.total_ping_pongs,
        })
        .collect()
}

/// Writes one sub-directory per run plus `comparison.csv` and, with
/// `plots`, overlaid ECDFs.
pub fn write_sweep(axis: &str, runs: &[(String, RunReport)], dir: &Path, plots: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (value, r) in runs {
        let sub: String = value
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        write_report(r, &dir.join(format!("{axis}_{sub}")), plots)?;
    }
    write_csv(&dir.join("comparison.csv"), &comparison_rows(axis, runs))?;
    if plots && !runs.is_empty() {
        let labels: Vec<String> = runs.iter().map(|(v, _)| format!("{axis}={v}")).collect();
        let outage: Vec<EcdfSeries> = runs
            .iter()
            .zip(&labels)
            .map(|((_, r), l)| EcdfSeries::new(l, &r.ecdf_outage, r.summary.beam_mode == BeamMode::Static))
            .collect();
        write_text(&dir.join("ecdf_outage.svg"), &ecdf_svg(&outage, "outage cost")?)?;
        let rate: Vec<EcdfSeries> = runs
            .iter()
            .zip(&labels)
            .map(|((_, r), l)| EcdfSeries::new(l, &r.ecdf_handover_rate, r.summary.beam_mode == BeamMode::Static))
            .collect();
        write_text(
            &dir.join("ecdf_handover_rate.svg"),
            &ecdf_svg(&rate, "handovers per minute")?,
        )?;
    }
    Ok(())
}
