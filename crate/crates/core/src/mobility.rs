//! Straight-line, constant-speed UAV trajectories.

use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::terrain::{Area, Position, TerrainGrid};

/// Slack allowed when checking `t` against a trajectory's span.
const TIME_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AltitudeMode {
    /// Fly level at the start point's ground height plus the AGL altitude.
    #[default]
    Constant,
    /// Keep the AGL altitude over the terrain below.
    TerrainFollowing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: u32,
    /// Start point; `z` is the level-flight altitude above sea level.
    pub start: Position,
    pub heading_deg: f64,
    pub speed_mps: f64,
    pub altitude_agl_m: f64,
    pub duration_s: f64,
    /// Seed of the set this trajectory was drawn from (0 for imported sets).
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub t: f64,
    pub position: Position,
    /// East, north, up in m/s.
    pub velocity: [f64; 3],
}

impl Trajectory {
    fn direction(&self) -> (f64, f64) {
        let (s, c) = self.heading_deg.to_radians().sin_cos();
        (s, c)
    }

    pub fn path_length_m(&self) -> f64 {
        self.speed_mps * self.duration_s
    }

    /// Time at which the path leaves `area`, capped at the nominal duration.
    pub fn realized_duration(&self, area: &Area) -> f64 {
        let (ux, uy) = self.direction();
        let mut exit = self.duration_s;
        for (p, u, lo, hi) in [
            (self.start.x, ux * self.speed_mps, area.min_x, area.max_x),
            (self.start.y, uy * self.speed_mps, area.min_y, area.max_y),
        ] {
            if u > 0.0 {
                exit = exit.min((hi - p) / u);
            } else if u < 0.0 {
                exit = exit.min((lo - p) / u);
            }
        }
        exit.max(0.0)
    }

    /// Kinematic state at time `t`.
    pub fn step(&self, t: f64, terrain: &TerrainGrid, mode: AltitudeMode) -> Result<UavState> {
        if !(t >= -TIME_EPS && t <= self.duration_s + TIME_EPS) {
            return Err(Error::TimeOutOfRange {
                t,
                duration: self.duration_s,
            });
        }
        let (ux, uy) = self.direction();
        let x = self.start.x + t * self.speed_mps * ux;
        let y = self.start.y + t * self.speed_mps * uy;
        let (z, vz) = match mode {
            AltitudeMode::Constant => (self.start.z, 0.0),
            AltitudeMode::TerrainFollowing => {
                let z = terrain.elevation_at(x, y)? + self.altitude_agl_m;
                // slope along track from a 1 m central difference, where available
                let h = 0.5;
                let ahead = terrain.elevation_at(x + h * ux, y + h * uy);
                let behind = terrain.elevation_at(x - h * ux, y - h * uy);
                let vz = match (ahead, behind) {
                    (Ok(a), Ok(b)) => (a - b) / (2.0 * h) * self.speed_mps,
                    _ => 0.0,
                };
                (z, vz)
            }
        };
        Ok(UavState {
            t,
            position: Position::new(x, y, z),
            velocity: [self.speed_mps * ux, self.speed_mps * uy, vz],
        })
    }
}

/// Parameters of a random trajectory set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryParams {
    pub count: usize,
    pub seed: u64,
    pub altitude_agl_m: f64,
    pub speed_mps: f64,
    pub duration_s: f64,
}

impl Default for TrajectoryParams {
    fn default() -> Self {
        Self {
            count: 200,
            seed: 1,
            altitude_agl_m: 40.0,
            speed_mps: 14.0,
            duration_s: 120.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySet {
    pub trajectories: Vec<Trajectory>,
    /// The area was too small to keep every path inside it; some paths will
    /// be cut short at the boundary.
    pub boundary_clipped: bool,
}

/// Draws `count` trajectories. Each path's midpoint is uniform over the
/// part of `area` at least half a path length from every edge, so the whole
/// path stays inside; headings are uniform. The horizontal layout depends
/// only on the seed, count, speed and duration.
pub fn generate_trajectories(params: &TrajectoryParams, area: &Area, terrain: &TerrainGrid) -> Result<TrajectorySet> {
    if params.count == 0 {
        return Err(Error::config("trajectories.count", "must be >= 1"));
    }
    if !(params.speed_mps > 0.0) {
        return Err(Error::config("trajectories.speed_mps", "must be > 0"));
    }
    if !(params.duration_s > 0.0) {
        return Err(Error::config("trajectories.duration_s", "must be > 0"));
    }
    if !(params.altitude_agl_m >= 0.0) {
        return Err(Error::config("trajectories.altitude_agl_m", "must be >= 0"));
    }
    let half = 0.5 * params.speed_mps * params.duration_s;
    let feasible = area.width() > 2.0 * half && area.height() > 2.0 * half;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut trajectories = Vec::with_capacity(params.count);
    for id in 0..params.count {
        let heading_deg: f64 = rng.gen_range(0.0..360.0);
        let (ux, uy) = {
            let (s, c) = heading_deg.to_radians().sin_cos();
            (s, c)
        };
        let (sx, sy) = if feasible {
            let mx = rng.gen_range(area.min_x + half..area.max_x - half);
            let my = rng.gen_range(area.min_y + half..area.max_y - half);
            (mx - half * ux, my - half * uy)
        } else {
            (
                rng.gen_range(area.min_x..area.max_x),
                rng.gen_range(area.min_y..area.max_y),
            )
        };
        let ground = terrain.elevation_at(sx, sy)?;
        trajectories.push(Trajectory {
            id: id as u32,
            start: Position::new(sx, sy, ground + params.altitude_agl_m),
            heading_deg,
            speed_mps: params.speed_mps,
            altitude_agl_m: params.altitude_agl_m,
            duration_s: params.duration_s,
            seed: params.seed,
        });
    }
    if !feasible {
        log::warn!(
            "area {:.0} x {:.0} m cannot hold {:.0} m paths; trajectories will be clipped at the boundary",
            area.width(),
            area.height(),
            2.0 * half
        );
    }
    Ok(TrajectorySet {
        trajectories,
        boundary_clipped: !feasible,
    })
}

/// Row layout of a trajectory CSV file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub id: u32,
    pub start_x: f64,
    pub start_y: f64,
    pub heading_deg: f64,
    pub speed: f64,
    pub altitude_agl: f64,
    pub duration: f64,
}

impl From<&Trajectory> for TrajectoryRecord {
    fn from(t: &Trajectory) -> Self {
        Self {
            id: t.id,
            start_x: t.start.x,
            start_y: t.start.y,
            heading_deg: t.heading_deg,
            speed: t.speed_mps,
            altitude_agl: t.altitude_agl_m,
            duration: t.duration_s,
        }
    }
}

pub fn write_trajectories_csv<W: io::Write>(writer: W, trajectories: &[Trajectory]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for t in trajectories {
        w.serialize(TrajectoryRecord::from(t))?;
    }
    w.flush().map_err(|e| Error::io("<trajectory csv>", e))?;
    Ok(())
}

pub fn save_trajectories(path: impl AsRef<Path>, trajectories: &[Trajectory]) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trajectories_csv(io::BufWriter::new(f), trajectories)
}

/// Reads a trajectory CSV, placing each start at its ground height plus the
/// recorded AGL altitude.
pub fn read_trajectories_csv<R: io::Read>(reader: R, terrain: &TerrainGrid) -> Result<Vec<Trajectory>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        let rec: TrajectoryRecord = rec?;
        if !(rec.speed > 0.0) || !(rec.duration > 0.0) {
            return Err(Error::config(
                "trajectories",
                format!("trajectory {} needs positive speed and duration", rec.id),
            ));
        }
        let ground = terrain.elevation_at(rec.start_x, rec.start_y)?;
        out.push(Trajectory {
            id: rec.id,
            start: Position::new(rec.start_x, rec.start_y, ground + rec.altitude_agl),
            heading_deg: rec.heading_deg,
            speed_mps: rec.speed,
            altitude_agl_m: rec.altitude_agl,
            duration_s: rec.duration,
            seed: 0,
        });
    }
    if out.is_empty() {
        return Err(Error::Empty("trajectory file has no rows"));
    }
    Ok(out)
}

pub fn load_trajectories(path: impl AsRef<Path>, terrain: &TerrainGrid) -> Result<Vec<Trajectory>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_trajectories_csv(io::BufReader::new(f), terrain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn terrain() -> TerrainGrid {
        TerrainGrid::flat(30.0, 4000.0).unwrap()
    }

    #[test]
    fn same_seed_same_set() {
        let t = terrain();
        let p = TrajectoryParams::default();
        let a = generate_trajectories(&p, &t.area(), &t).unwrap();
        let b = generate_trajectories(&p, &t.area(), &t).unwrap();
        assert_eq!(a, b);
        let other = generate_trajectories(&TrajectoryParams { seed: 2, ..p }, &t.area(), &t).unwrap();
        assert_ne!(a.trajectories, other.trajectories);
    }

    #[test]
    fn default_set_has_200_paths_of_1680_m_inside_the_map() {
        let t = terrain();
        let set = generate_trajectories(&TrajectoryParams::default(), &t.area(), &t).unwrap();
        assert_eq!(set.trajectories.len(), 200);
        assert!(!set.boundary_clipped);
        for tr in &set.trajectories {
            assert!((tr.path_length_m() - 1680.0).abs() < 1e-9);
            assert_eq!(tr.realized_duration(&t.area()), tr.duration_s);
        }
    }

    #[test]
    fn level_flight_altitude() {
        let t = terrain();
        let set = generate_trajectories(&TrajectoryParams::default(), &t.area(), &t).unwrap();
        for tr in set.trajectories.iter().take(10) {
            for k in 0..=12 {
                let s = tr.step(k as f64 * 10.0, &t, AltitudeMode::Constant).unwrap();
                assert_eq!(s.position.z, 70.0);
            }
        }
    }

    fn north_bound() -> Trajectory {
        Trajectory {
            id: 0,
            start: Position::new(0.0, 0.0, 70.0),
            heading_deg: 0.0,
            speed_mps: 14.0,
            altitude_agl_m: 40.0,
            duration_s: 120.0,
            seed: 0,
        }
    }

    #[test]
    fn step_examples() {
        let t = terrain();
        let tr = north_bound();
        assert_eq!(tr.step(0.0, &t, AltitudeMode::Constant).unwrap().position, tr.start);
        let p = tr.step(10.0, &t, AltitudeMode::Constant).unwrap().position;
        assert!(p.x.abs() < 1e-12 && (p.y - 140.0).abs() < 1e-12);
        let tilted = Trajectory {
            heading_deg: 37.0,
            ..north_bound()
        };
        let a = tilted.step(5.3, &t, AltitudeMode::Constant).unwrap().position;
        let b = tilted.step(5.4, &t, AltitudeMode::Constant).unwrap().position;
        assert!((a.horizontal_distance(&b) - 1.4).abs() < 1e-9);
    }

    #[test]
    fn out_of_range_time() {
        let t = terrain();
        assert!(matches!(
            north_bound().step(120.5, &t, AltitudeMode::Constant),
            Err(Error::TimeOutOfRange { .. })
        ));
        assert!(north_bound().step(-0.1, &t, AltitudeMode::Constant).is_err());
    }

    #[test]
    fn truncation_at_boundary() {
        let t = terrain();
        let tr = Trajectory {
            start: Position::new(0.0, 1500.0, 70.0),
            ..north_bound()
        };
        // 500 m to the northern edge at 14 m/s
        assert!((tr.realized_duration(&t.area()) - 500.0 / 14.0).abs() < 1e-9);
    }

    #[test]
    fn small_area_falls_back_to_clipping() {
        let t = TerrainGrid::flat(0.0, 1000.0).unwrap();
        let set = generate_trajectories(&TrajectoryParams::default(), &t.area(), &t).unwrap();
        assert!(set.boundary_clipped);
        assert!(set
            .trajectories
            .iter()
            .all(|tr| t.area().contains(tr.start.x, tr.start.y)));
    }

    #[test]
    fn terrain_following_tracks_ground() {
        let g = TerrainGrid::new((0.0, 0.0), 100.0, 2, 1, vec![0.0, 100.0]).unwrap();
        let tr = Trajectory {
            start: Position::new(50.0, 50.0, 40.0),
            speed_mps: 10.0,
            duration_s: 10.0,
            ..north_bound()
        };
        let s = tr.step(5.0, &g, AltitudeMode::TerrainFollowing).unwrap();
        assert!((s.position.z - 90.0).abs() < 1e-9);
        assert!((s.velocity[2] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn zero_count_rejected() {
        let t = terrain();
        let p = TrajectoryParams {
            count: 0,
            ..Default::default()
        };
        assert!(generate_trajectories(&p, &t.area(), &t).is_err());
    }
}
