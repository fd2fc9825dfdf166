//! Base-station deployment: sites, sector panels, their beams, and
//! received-power measurement towards a UAV.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::antenna::{array_gain_db, ArraySpec, ElementPattern, SectorOrientation, SteeringAngles, SteeringLimits};
use crate::channel::{rx_power_dbm, RadioConfig};
use crate::error::{Error, Result};
use crate::terrain::{angles_to, Position, TerrainGrid};

pub const DEFAULT_SITE_HEIGHT_M: f64 = 25.0;
pub const DEFAULT_DOWNTILT_DEG: f64 = 7.0;
pub const SECTOR_AZIMUTHS_DEG: [f64; 3] = [0.0, 120.0, 240.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeamMode {
    Tracking,
    Static,
}

impl std::fmt::Display for BeamMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BeamMode::Tracking => "tracking",
            BeamMode::Static => "static",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamState {
    /// Steering in the sector's array frame.
    pub steer: SteeringAngles,
    pub last_update_t: f64,
    pub mode: BeamMode,
}

impl BeamState {
    pub fn boresight(mode: BeamMode) -> Self {
        Self {
            steer: SteeringAngles::BORESIGHT,
            last_update_t: 0.0,
            mode,
        }
    }
}

/// Which beam a sector is assumed to use when measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementAssumption {
    /// Freshly steered at the UAV, within the steering limits.
    Aligned,
    /// Whatever the sector's beam currently points at.
    Current,
    /// Unsteered panel at boresight.
    Static,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub id: u32,
    /// Antenna phase centre; `z` is above sea level.
    pub position: Position,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub id: u32,
    pub site_id: u32,
    pub position: Position,
    pub orientation: SectorOrientation,
    pub array: ArraySpec,
    pub beam: BeamState,
}

impl Sector {
    /// Steering that points at `target` as closely as `limits` allow.
    pub fn aligned_steer(&self, target: &Position, limits: &SteeringLimits) -> Result<SteeringAngles> {
        let local = self.orientation.to_local(angles_to(&self.position, target)?);
        Ok(limits.clamp(local))
    }

    /// Angle between the current beam and the beam a fresh update would
    /// pick, in degrees.
    pub fn misalignment_deg(&self, target: &Position, limits: &SteeringLimits) -> Result<f64> {
        let fresh = self.aligned_steer(target, limits)?;
        Ok(self.beam.steer.direction().separation_deg(&fresh.direction()))
    }

    fn steer_for(
        &self,
        target: &Position,
        assumption: MeasurementAssumption,
        limits: &SteeringLimits,
    ) -> Result<SteeringAngles> {
        Ok(match assumption {
            MeasurementAssumption::Aligned => self.aligned_steer(target, limits)?,
            MeasurementAssumption::Current => self.beam.steer,
            MeasurementAssumption::Static => SteeringAngles::BORESIGHT,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub sites: Vec<Site>,
    /// Sorted by ascending id.
    pub sectors: Vec<Sector>,
}

/// Values applied to sectors whose file entry leaves them out, and to every
/// sector of a synthetic layout.
#[derive(Clone, Debug, PartialEq)]
pub struct DeploymentDefaults {
    pub site_height_m: f64,
    pub downtilt_deg: f64,
    pub array: ArraySpec,
}

impl Default for DeploymentDefaults {
    fn default() -> Self {
        Self {
            site_height_m: DEFAULT_SITE_HEIGHT_M,
            downtilt_deg: DEFAULT_DOWNTILT_DEG,
            array: ArraySpec::uniform(8, 8),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeploymentFile {
    sites: Vec<SiteRecord>,
    sectors: Vec<SectorRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteRecord {
    id: u32,
    x: f64,
    y: f64,
    /// Ground elevation to use instead of the terrain value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ground_override: Option<f64>,
    /// Antenna height above ground.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    height_agl: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SectorRecord {
    id: u32,
    site: u32,
    azimuth_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    downtilt_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    array: Option<ArrayRecord>,
}

/// Compact array description used in deployment and scenario files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayRecord {
    pub m: usize,
    pub n: usize,
    #[serde(default = "half")]
    pub dz: f64,
    #[serde(default = "half")]
    pub dy: f64,
}

fn half() -> f64 {
    0.5
}

impl ArrayRecord {
    pub fn new(m: usize, n: usize) -> Self {
        Self { m, n, dz: 0.5, dy: 0.5 }
    }

    pub fn to_spec(&self, element: ElementPattern) -> ArraySpec {
        ArraySpec::with_element(self.m, self.n, element).with_spacing(self.dz, self.dy)
    }
}

/// Parses `MxN` (also accepts `M*N` or `MbyN`).
impl std::str::FromStr for ArrayRecord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("array", format!("`{s}` is not of the form MxN"));
        let lower = s.trim().to_ascii_lowercase();
        let (m, n) = lower
            .split_once('x')
            .or_else(|| lower.split_once('*'))
            .or_else(|| lower.split_once("by"))
            .ok_or_else(bad)?;
        let m: usize = m.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        if m == 0 || n == 0 {
            return Err(Error::config("array", format!("`{s}`: element counts must be >= 1")));
        }
        Ok(Self::new(m, n))
    }
}

impl std::fmt::Display for ArrayRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.m, self.n)
    }
}

impl Deployment {
    /// Serialises into the deployment file format, with antenna heights
    /// given above the local terrain.
    pub fn to_json(&self, terrain: &TerrainGrid) -> Result<String> {
        let mut sites = Vec::with_capacity(self.sites.len());
        for s in &self.sites {
            let ground = terrain.elevation_at(s.position.x, s.position.y)?;
            sites.push(SiteRecord {
                id: s.id,
                x: s.position.x,
                y: s.position.y,
                ground_override: None,
                height_agl: Some(s.position.z - ground),
            });
        }
        let sectors = self
            .sectors
            .iter()
            .map(|s| SectorRecord {
                id: s.id,
                site: s.site_id,
                azimuth_deg: s.orientation.boresight_azimuth_deg,
                downtilt_deg: Some(s.orientation.downtilt_deg),
                array: Some(ArrayRecord {
                    m: s.array.m_vertical,
                    n: s.array.n_horizontal,
                    dz: s.array.dz_wavelengths,
                    dy: s.array.dy_wavelengths,
                }),
            })
            .collect();
        Ok(serde_json::to_string_pretty(&DeploymentFile { sites, sectors })?)
    }

    pub fn sector(&self, id: u32) -> Option<&Sector> {
        self.sector_index(id).map(|i| &self.sectors[i])
    }

    pub fn sector_index(&self, id: u32) -> Option<usize> {
        self.sectors.binary_search_by_key(&id, |s| s.id).ok()
    }

    /// Replaces every sector's array.
    pub fn set_array(&mut self, array: &ArraySpec) {
        for s in &mut self.sectors {
            s.array = array.clone();
        }
    }

    pub fn set_beam_mode(&mut self, mode: BeamMode) {
        for s in &mut self.sectors {
            s.beam = BeamState::boresight(mode);
        }
    }

    /// Resolves a deployment source: `hex:<rings>:<isd_m>`,
    /// `grid:<nx>x<ny>:<spacing_m>`, or the path of a JSON file.
    pub fn from_source(source: &str, terrain: &TerrainGrid, defaults: &DeploymentDefaults) -> Result<Self> {
        let bad = |what: &str| Error::config("deployment", format!("{what} in `{source}`"));
        if let Some(rest) = source.strip_prefix("hex:") {
            let (rings, isd) = rest
                .split_once(':')
                .ok_or_else(|| bad("expected hex:<rings>:<isd_m>"))?;
            let rings: u32 = rings.parse().map_err(|_| bad("bad ring count"))?;
            let isd: f64 = isd.parse().map_err(|_| bad("bad inter-site distance"))?;
            return Self::hex(rings, isd, terrain, defaults);
        }
        if let Some(rest) = source.strip_prefix("grid:") {
            let (dims, spacing) = rest
                .split_once(':')
                .ok_or_else(|| bad("expected grid:<nx>x<ny>:<spacing_m>"))?;
            let (nx, ny) = dims.split_once('x').ok_or_else(|| bad("expected <nx>x<ny>"))?;
            let nx: u32 = nx.parse().map_err(|_| bad("bad nx"))?;
            let ny: u32 = ny.parse().map_err(|_| bad("bad ny"))?;
            let spacing: f64 = spacing.parse().map_err(|_| bad("bad spacing"))?;
            return Self::grid(nx, ny, spacing, terrain, defaults);
        }
        load_deployment(source, terrain, defaults)
    }

    /// Hexagonal layout with `rings` rings around a central site, three
    /// sectors per site, centred on the terrain area.
    pub fn hex(rings: u32, isd_m: f64, terrain: &TerrainGrid, defaults: &DeploymentDefaults) -> Result<Self> {
        if !(isd_m > 0.0) {
            return Err(Error::config("deployment", "inter-site distance must be > 0"));
        }
        let r = rings as i64;
        let mut cells = Vec::new();
        for ring in 0..=r {
            for q in -ring..=ring {
                for s in -ring..=ring {
                    let t = -q - s;
                    if q.abs().max(s.abs()).max(t.abs()) == ring {
                        cells.push((q, s));
                    }
                }
            }
        }
        let (cx, cy) = terrain.area().center();
        let h = 3f64.sqrt() / 2.0;
        let xy = cells
            .into_iter()
            .map(|(q, s)| (cx + isd_m * (q as f64 + 0.5 * s as f64), cy + isd_m * h * s as f64))
            .collect::<Vec<_>>();
        Self::synthetic(&xy, terrain, defaults)
    }

    /// Rectangular `nx` by `ny` layout, three sectors per site, centred on
    /// the terrain area.
    pub fn grid(
        nx: u32,
        ny: u32,
        spacing_m: f64,
        terrain: &TerrainGrid,
        defaults: &DeploymentDefaults,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::config("deployment", "grid needs at least one site"));
        }
        if !(spacing_m > 0.0) {
            return Err(Error::config("deployment", "grid spacing must be > 0"));
        }
        let (cx, cy) = terrain.area().center();
        let x0 = cx - 0.5 * spacing_m * (nx - 1) as f64;
        let y0 = cy - 0.5 * spacing_m * (ny - 1) as f64;
        let xy = (0..ny)
            .flat_map(|j| (0..nx).map(move |i| (x0 + spacing_m * i as f64, y0 + spacing_m * j as f64)))
            .collect::<Vec<_>>();
        Self::synthetic(&xy, terrain, defaults)
    }

    fn synthetic(xy: &[(f64, f64)], terrain: &TerrainGrid, defaults: &DeploymentDefaults) -> Result<Self> {
        let mut sites = Vec::with_capacity(xy.len());
        let mut sectors = Vec::with_capacity(3 * xy.len());
        for (i, &(x, y)) in xy.iter().enumerate() {
            let ground = terrain.elevation_at(x, y)?;
            let site = Site {
                id: i as u32,
                position: Position::new(x, y, ground + defaults.site_height_m),
            };
            for (k, az) in SECTOR_AZIMUTHS_DEG.iter().enumerate() {
                sectors.push(Sector {
                    id: (3 * i + k) as u32,
                    site_id: site.id,
                    position: site.position,
                    orientation: SectorOrientation::new(*az, defaults.downtilt_deg),
                    array: defaults.array.clone(),
                    beam: BeamState::boresight(BeamMode::Tracking),
                });
            }
            sites.push(site);
        }
        let d = Deployment { sites, sectors };
        d.validate(terrain)?;
        Ok(d)
    }

    pub fn validate(&self, terrain: &TerrainGrid) -> Result<()> {
        if self.sectors.is_empty() {
            return Err(Error::config("sectors", "deployment has no sectors"));
        }
        let mut site_ids = HashSet::new();
        for s in &self.sites {
            if !site_ids.insert(s.id) {
                return Err(Error::config("sites.id", format!("duplicate site id {}", s.id)));
            }
            if !s.position.is_finite() {
                return Err(Error::config(
                    "sites",
                    format!("site {} has a non-finite position", s.id),
                ));
            }
            let ground = terrain
                .elevation_at(s.position.x, s.position.y)
                .map_err(|_| Error::config("sites", format!("site {} lies outside the terrain grid", s.id)))?;
            if s.position.z <= ground {
                return Err(Error::config(
                    "sites",
                    format!(
                        "site {} antenna at {:.2} m is not above the ground at {:.2} m",
                        s.id, s.position.z, ground
                    ),
                ));
            }
        }
        let mut prev = None;
        for s in &self.sectors {
            if prev.is_some_and(|p| p >= s.id) {
                return Err(Error::config(
                    "sectors.id",
                    format!("sector ids must be unique and sorted (at {})", s.id),
                ));
            }
            prev = Some(s.id);
            if !site_ids.contains(&s.site_id) {
                return Err(Error::config(
                    "sectors.site",
                    format!("sector {} references unknown site {}", s.id, s.site_id),
                ));
            }
            s.array.validate()?;
            s.orientation.validate()?;
        }
        Ok(())
    }
}

/// Reads a JSON deployment file.
pub fn load_deployment(
    path: impl AsRef<Path>,
    terrain: &TerrainGrid,
    defaults: &DeploymentDefaults,
) -> Result<Deployment> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_deployment(&text, &path.display().to_string(), terrain, defaults)
}

pub fn parse_deployment(
    text: &str,
    name: &str,
    terrain: &TerrainGrid,
    defaults: &DeploymentDefaults,
) -> Result<Deployment> {
    let file: DeploymentFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: name.to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;

    let mut seen = HashSet::new();
    for s in &file.sectors {
        if !seen.insert(s.id) {
            return Err(Error::Parse {
                path: name.to_string(),
                line: line_of_id(text, "sectors", s.id),
                message: format!("duplicate sector id {}", s.id),
            });
        }
    }

    let mut sites = Vec::with_capacity(file.sites.len());
    for r in &file.sites {
        let ground = match r.ground_override {
            Some(g) => g,
            None => terrain.elevation_at(r.x, r.y).map_err(|_| {
                Error::config(
                    "sites",
                    format!("site {} at ({}, {}) lies outside the terrain grid", r.id, r.x, r.y),
                )
            })?,
        };
        let height = r.height_agl.unwrap_or(defaults.site_height_m);
        sites.push(Site {
            id: r.id,
            position: Position::new(r.x, r.y, ground + height),
        });
    }

    let mut sectors = Vec::with_capacity(file.sectors.len());
    for r in &file.sectors {
        let site = sites.iter().find(|s| s.id == r.site).ok_or_else(|| {
            Error::config(
                "sectors.site",
                format!("sector {} references unknown site {}", r.id, r.site),
            )
        })?;
        let array = match r.array {
            Some(a) => a.to_spec(defaults.array.element),
            None => defaults.array.clone(),
        };
        sectors.push(Sector {
            id: r.id,
            site_id: r.site,
            position: site.position,
            orientation: SectorOrientation::new(r.azimuth_deg, r.downtilt_deg.unwrap_or(defaults.downtilt_deg)),
            array,
            beam: BeamState::boresight(BeamMode::Tracking),
        });
    }
    sectors.sort_by_key(|s| s.id);

    let d = Deployment { sites, sectors };
    d.validate(terrain)?;
    Ok(d)
}

/// Best-effort line number of the second `"id": <id>` entry in a section,
/// for duplicate-id messages. Returns 0 when it cannot be located.
fn line_of_id(text: &str, section: &str, id: u32) -> usize {
    let Some(start) = text.find(&format!("\"{section}\"")) else {
        return 0;
    };
    let first_line = text[..start].matches('\n').count() + 1;
    let mut hits = 0;
    for (i, line) in text[start..].lines().enumerate() {
        for (pos, key) in line.match_indices("\"id\"") {
            let rest = line[pos + key.len()..].trim_start();
            let Some(rest) = rest.strip_prefix(':') else { continue };
            let digits: String = rest.trim_start().chars().take_while(char::is_ascii_digit).collect();
            if digits.parse() == Ok(id) {
                hits += 1;
                if hits == 2 {
                    return first_line + i;
                }
            }
        }
    }
    0
}

/// Everything needed to turn geometry into received power.
#[derive(Clone, Copy, Debug)]
pub struct LinkModel<'a> {
    pub radio: &'a RadioConfig,
    pub terrain: &'a TerrainGrid,
    pub los_step_m: f64,
    pub limits: SteeringLimits,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    pub rx_power_dbm: f64,
    pub gain_db: f64,
    pub distance_m: f64,
    pub los: bool,
}

pub fn measure_cell(
    link: &LinkModel<'_>,
    sector: &Sector,
    uav: &Position,
    assumption: MeasurementAssumption,
) -> Result<Measurement> {
    let global = angles_to(&sector.position, uav)?;
    let local = sector.orientation.to_local(global);
    let steer = sector.steer_for(uav, assumption, &link.limits)?;
    let gain_db = array_gain_db(&sector.array, local, steer);
    let los = link.terrain.line_of_sight(&sector.position, uav, link.los_step_m)?;
    let distance_m = sector.position.distance(uav);
    Ok(Measurement {
        rx_power_dbm: rx_power_dbm(link.radio, gain_db, distance_m, los),
        gain_db,
        distance_m,
        los,
    })
}

/// Sector with the strongest measurement; ties go to the lowest id.
pub fn best_server(
    link: &LinkModel<'_>,
    deployment: &Deployment,
    uav: &Position,
    assumption: MeasurementAssumption,
) -> Result<u32> {
    let mut best: Option<(u32, f64)> = None;
    for s in &deployment.sectors {
        let rx = measure_cell(link, s, uav, assumption)?.rx_power_dbm;
        // sectors are id-sorted, so strict > keeps the lowest id on ties
        if best.is_none_or(|(_, b)| rx > b) {
            best = Some((s.id, rx));
        }
    }
    best.map(|(id, _)| id).ok_or(Error::Empty("deployment has no sectors"))
}
