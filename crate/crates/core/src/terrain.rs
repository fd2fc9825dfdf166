//! Local ENU coordinate frame, terrain elevation raster, pointing angles and
//! terrain line-of-sight.
//!
//! Coordinates are flat-earth metres: `x` grows east, `y` grows north and `z`
//! is height above sea level. Each raster cell stores the ground height at its
//! centre; between centres the surface is bilinear, and within half a cell of
//! the outer edge it is held at the edge value.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default spacing of terrain samples along a line-of-sight ray, in metres.
pub const DEFAULT_LOS_STEP_M: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(&self, other: &Position) -> f64 {
        let (dx, dy, dz) = (other.x - self.x, other.y - self.y, other.z - self.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn horizontal_distance(&self, other: &Position) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    /// Point a fraction `s` of the way from `self` to `other`.
    pub fn lerp(&self, other: &Position, s: f64) -> Position {
        Position {
            x: self.x + s * (other.x - self.x),
            y: self.y + s * (other.y - self.y),
            z: self.z + s * (other.z - self.z),
        }
    }
}

/// Pointing direction: `theta` is measured down from the zenith, `phi` is
/// the azimuth clockwise from north. Both in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionAngles {
    pub theta: f64,
    pub phi: f64,
}

impl DirectionAngles {
    /// Builds a direction, wrapping `phi` into `[0, 360)`.
    pub fn new(theta: f64, phi: f64) -> Self {
        Self {
            theta,
            phi: wrap_360(phi),
        }
    }

    pub fn is_valid(&self) -> bool {
        (0.0..=180.0).contains(&self.theta) && (0.0..360.0).contains(&self.phi)
    }

    /// Unit vector in (east, north, up) components.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.to_radians().sin_cos();
        let (sp, cp) = self.phi.to_radians().sin_cos();
        [st * sp, st * cp, ct]
    }

    pub fn from_vector(v: [f64; 3]) -> Self {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let c = (v[2] / norm).clamp(-1.0, 1.0);
        Self::new(c.acos().to_degrees(), v[0].atan2(v[1]).to_degrees())
    }

    /// Great-circle angle to another direction, in degrees.
    pub fn separation_deg(&self, other: &DirectionAngles) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let cross = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        let cross_norm = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
        cross_norm.atan2(dot).to_degrees()
    }
}

/// Wraps an angle in degrees into `[0, 360)`.
pub fn wrap_360(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Wraps an angle in degrees into `(-180, 180]`.
pub fn wrap_180(deg: f64) -> f64 {
    let w = wrap_360(deg);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Pointing angles from `from` towards `to`.
pub fn angles_to(from: &Position, to: &Position) -> Result<DirectionAngles> {
    let (dx, dy, dz) = (to.x - from.x, to.y - from.y, to.z - from.z);
    let r = (dx * dx + dy * dy + dz * dz).sqrt();
    if !(r > 0.0) {
        return Err(Error::DegenerateGeometry(format!(
            "coincident points ({}, {}, {})",
            from.x, from.y, from.z
        )));
    }
    let theta = (dz / r).clamp(-1.0, 1.0).acos().to_degrees();
    let phi = dx.atan2(dy).to_degrees();
    Ok(DirectionAngles::new(theta, phi))
}

/// Axis-aligned rectangle in the horizontal plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Area {
    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.min_x + self.max_x), 0.5 * (self.min_y + self.max_y))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }
}

/// Ground elevation raster, row-major with row 0 at `origin.y` (southern
/// edge) and column 0 at `origin.x` (western edge).
#[derive(Clone, Debug, PartialEq)]
pub struct TerrainGrid {
    origin: (f64, f64),
    cell_size: f64,
    n_rows: usize,
    n_cols: usize,
    heights: Vec<f64>,
    min_height: f64,
    max_height: f64,
}

impl TerrainGrid {
    pub fn new(origin: (f64, f64), cell_size: f64, n_rows: usize, n_cols: usize, heights: Vec<f64>) -> Result<Self> {
        if !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(Error::config("cell_size", format!("must be > 0, got {cell_size}")));
        }
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::config("n_rows/n_cols", "grid must have at least one cell"));
        }
        if !origin.0.is_finite() || !origin.1.is_finite() {
            return Err(Error::config("origin", "must be finite"));
        }
        if heights.len() != n_rows * n_cols {
            return Err(Error::config(
                "heights",
                format!(
                    "expected {}x{} = {} values, got {}",
                    n_rows,
                    n_cols,
                    n_rows * n_cols,
                    heights.len()
                ),
            ));
        }
        if let Some(i) = heights.iter().position(|h| !h.is_finite()) {
            return Err(Error::config("heights", format!("non-finite height at index {i}")));
        }
        let min_height = heights.iter().copied().fold(f64::INFINITY, f64::min);
        let max_height = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            origin,
            cell_size,
            n_rows,
            n_cols,
            heights,
            min_height,
            max_height,
        })
    }

    /// Square single-cell grid of constant height centred on the origin.
    pub fn flat(height: f64, side_m: f64) -> Result<Self> {
        Self::new((-0.5 * side_m, -0.5 * side_m), side_m, 1, 1, vec![height])
    }

    /// Parses a terrain source: `flat:<height>` or the path of a CSV grid.
    /// `flat_side_m` is the extent used for the synthetic flat grid.
    pub fn from_source(source: &str, flat_side_m: f64) -> Result<Self> {
        if let Some(h) = source.strip_prefix("flat:") {
            let height: f64 = h
                .trim()
                .parse()
                .map_err(|_| Error::config("terrain", format!("bad flat height `{h}` in `{source}`")))?;
            return Self::flat(height, flat_side_m);
        }
        Self::load_csv(source)
    }

    /// Loads a grid file. The first data line holds
    /// `origin_x,origin_y,cell_size,n_rows,n_cols`, optionally preceded by a
    /// line of exactly those column names; `n_rows` lines of `n_cols` heights
    /// follow.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, &path.display().to_string())
    }

    pub fn parse_csv(text: &str, name: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: name.to_string(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let (mut ln, mut header) = lines.next().ok_or_else(|| parse_err(1, "empty terrain file".into()))?;
        if header.replace(' ', "") == "origin_x,origin_y,cell_size,n_rows,n_cols" {
            (ln, header) = lines
                .next()
                .ok_or_else(|| parse_err(ln + 1, "missing grid header values".into()))?;
        }
        let fields: Vec<&str> = header.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(parse_err(
                ln,
                format!(
                    "header needs 5 fields (origin_x,origin_y,cell_size,n_rows,n_cols), got {}",
                    fields.len()
                ),
            ));
        }
        let num = |i: usize, what: &str| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|_| parse_err(ln, format!("`{what}` is not a number: `{}`", fields[i])))
        };
        let count = |i: usize, what: &str| -> Result<usize> {
            fields[i]
                .parse::<usize>()
                .map_err(|_| parse_err(ln, format!("`{what}` is not a count: `{}`", fields[i])))
        };
        let origin = (num(0, "origin_x")?, num(1, "origin_y")?);
        let cell_size = num(2, "cell_size")?;
        let n_rows = count(3, "n_rows")?;
        let n_cols = count(4, "n_cols")?;

        let mut heights = Vec::with_capacity(n_rows * n_cols);
        let mut rows = 0;
        for (ln, line) in lines {
            let before = heights.len();
            for cell in line.split(',') {
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(ln, format!("bad height `{}`", cell.trim())))?;
                heights.push(v);
            }
            if heights.len() - before != n_cols {
                return Err(parse_err(
                    ln,
                    format!("expected {n_cols} heights, got {}", heights.len() - before),
                ));
            }
            rows += 1;
        }
        if rows != n_rows {
            return Err(parse_err(ln, format!("expected {n_rows} rows, got {rows}")));
        }
        Self::new(origin, cell_size, n_rows, n_cols, heights)
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn height_at_cell(&self, row: usize, col: usize) -> f64 {
        self.heights[row * self.n_cols + col]
    }

    /// Horizontal position of the centre of cell `(row, col)`.
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.origin.0 + (col as f64 + 0.5) * self.cell_size,
            self.origin.1 + (row as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn area(&self) -> Area {
        Area {
            min_x: self.origin.0,
            min_y: self.origin.1,
            max_x: self.origin.0 + self.n_cols as f64 * self.cell_size,
            max_y: self.origin.1 + self.n_rows as f64 * self.cell_size,
        }
    }

    pub fn max_height(&self) -> f64 {
        self.max_height
    }

    pub fn min_height(&self) -> f64 {
        self.min_height
    }

    /// Bilinearly interpolated ground height at `(x, y)`.
    pub fn elevation_at(&self, x: f64, y: f64) -> Result<f64> {
        if !self.area().contains(x, y) {
            return Err(Error::OutOfBounds { x, y });
        }
        Ok(self.elevation_unchecked(x, y))
    }

    fn elevation_unchecked(&self, x: f64, y: f64) -> f64 {
        if self.min_height == self.max_height {
            return self.min_height;
        }
        let fx = ((x - self.origin.0) / self.cell_size - 0.5).clamp(0.0, (self.n_cols - 1) as f64);
        let fy = ((y - self.origin.1) / self.cell_size - 0.5).clamp(0.0, (self.n_rows - 1) as f64);
        let c0 = (fx.floor() as usize).min(self.n_cols.saturating_sub(2));
        let r0 = (fy.floor() as usize).min(self.n_rows.saturating_sub(2));
        let c1 = (c0 + 1).min(self.n_cols - 1);
        let r1 = (r0 + 1).min(self.n_rows - 1);
        let tx = fx - c0 as f64;
        let ty = fy - r0 as f64;
        let h00 = self.height_at_cell(r0, c0);
        let h01 = self.height_at_cell(r0, c1);
        let h10 = self.height_at_cell(r1, c0);
        let h11 = self.height_at_cell(r1, c1);
        let south = h00 + tx * (h01 - h00);
        let north = h10 + tx * (h11 - h10);
        south + ty * (north - south)
    }

    /// True when the straight segment `a -> b` clears the terrain at every
    /// interior sample. Samples are spaced at most `step` metres apart and
    /// placed symmetrically, so the result does not depend on direction.
    pub fn line_of_sight(&self, a: &Position, b: &Position, step: f64) -> Result<bool> {
        if !(step > 0.0) {
            return Err(Error::config("los_step_m", format!("must be > 0, got {step}")));
        }
        for p in [a, b] {
            let ground = self.elevation_at(p.x, p.y)?;
            if p.z < ground {
                return Err(Error::InvalidPosition(format!(
                    "({:.2}, {:.2}, {:.2}) is below the ground at {:.2} m",
                    p.x, p.y, p.z, ground
                )));
            }
        }
        // Nothing can block a segment that stays above the highest cell.
        if a.z.min(b.z) >= self.max_height {
            return Ok(true);
        }
        let length = a.distance(b);
        let segments = (length / step).ceil() as usize;
        for i in 1..segments {
            let p = a.lerp(b, i as f64 / segments as f64);
            if p.z < self.elevation_unchecked(p.x, p.y) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ridge() -> TerrainGrid {
        // three cells west to east, 100 m each; 80 m ridge in the middle
        TerrainGrid::new((0.0, 0.0), 100.0, 1, 3, vec![0.0, 80.0, 0.0]).unwrap()
    }

    #[test]
    fn flat_grid_is_constant() {
        let g = TerrainGrid::flat(30.0, 4000.0).unwrap();
        for (x, y) in [(0.0, 0.0), (-1999.0, 1500.0), (2000.0, -2000.0)] {
            assert_eq!(g.elevation_at(x, y).unwrap(), 30.0);
        }
    }

    #[test]
    fn cell_centres_return_stored_height() {
        let g = TerrainGrid::new((10.0, 20.0), 5.0, 2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        for r in 0..2 {
            for c in 0..3 {
                let (x, y) = g.cell_center(r, c);
                assert_eq!(g.elevation_at(x, y).unwrap(), g.height_at_cell(r, c));
            }
        }
    }

    #[test]
    fn midpoint_between_cells() {
        let g = TerrainGrid::new((0.0, 0.0), 10.0, 1, 2, vec![10.0, 20.0]).unwrap();
        // centres at x = 5 and x = 15
        assert!((g.elevation_at(10.0, 5.0).unwrap() - 15.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_bounds_query() {
        let g = TerrainGrid::flat(0.0, 100.0).unwrap();
        assert!(matches!(g.elevation_at(51.0, 0.0), Err(Error::OutOfBounds { .. })));
    }

    #[test]
    fn angle_examples() {
        let o = Position::new(0.0, 0.0, 0.0);
        let up = angles_to(&o, &Position::new(0.0, 0.0, 50.0)).unwrap();
        assert_eq!(up.theta, 0.0);
        let north = angles_to(&o, &Position::new(0.0, 100.0, 0.0)).unwrap();
        assert_eq!((north.theta, north.phi), (90.0, 0.0));
        let diag = angles_to(&o, &Position::new(100.0, 0.0, 100.0)).unwrap();
        assert!((diag.theta - 45.0).abs() < 1e-12);
        assert!((diag.phi - 90.0).abs() < 1e-12);
        let west = angles_to(&o, &Position::new(-5.0, 0.0, 0.0)).unwrap();
        assert!((west.phi - 270.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_points_rejected() {
        let p = Position::new(1.0, 2.0, 3.0);
        assert!(matches!(angles_to(&p, &p), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn los_over_flat_ground() {
        let g = TerrainGrid::flat(30.0, 4000.0).unwrap();
        let a = Position::new(-1000.0, 0.0, 55.0);
        let b = Position::new(1200.0, 300.0, 70.0);
        assert!(g.line_of_sight(&a, &b, 5.0).unwrap());
    }

    #[test]
    fn ridge_blocks_sightline() {
        let g = ridge();
        // sightline at 50 m passes over the 80 m ridge centre at x = 150
        let a = Position::new(10.0, 50.0, 50.0);
        let b = Position::new(290.0, 50.0, 50.0);
        assert!(!g.line_of_sight(&a, &b, 5.0).unwrap());
        // raising both ends above the ridge clears it
        let a2 = Position::new(10.0, 50.0, 90.0);
        let b2 = Position::new(290.0, 50.0, 90.0);
        assert!(g.line_of_sight(&a2, &b2, 5.0).unwrap());
    }

    #[test]
    fn adjacent_endpoints_have_no_interior_samples() {
        let g = ridge();
        // right on the ridge flank, barely above ground at both ends
        let a = Position::new(100.0, 50.0, 40.0);
        let b = Position::new(103.0, 50.0, 42.5);
        assert!(g.line_of_sight(&a, &b, 5.0).unwrap());
    }

    #[test]
    fn endpoint_below_ground_is_rejected() {
        let g = TerrainGrid::flat(30.0, 100.0).unwrap();
        let a = Position::new(0.0, 0.0, 10.0);
        let b = Position::new(10.0, 0.0, 40.0);
        assert!(matches!(g.line_of_sight(&a, &b, 5.0), Err(Error::InvalidPosition(_))));
    }

    #[test]
    fn csv_with_and_without_names() {
        let with = "origin_x,origin_y,cell_size,n_rows,n_cols\n0,0,10,2,2\n1,2\n3,4\n";
        let without = "0,0,10,2,2\n1,2\n3,4\n";
        let a = TerrainGrid::parse_csv(with, "a").unwrap();
        let b = TerrainGrid::parse_csv(without, "b").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.height_at_cell(1, 0), 3.0);
    }

    #[test]
    fn csv_row_length_error_names_line() {
        let bad = "0,0,10,2,2\n1,2\n3\n";
        match TerrainGrid::parse_csv(bad, "t.csv") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn flat_source_string() {
        let g = TerrainGrid::from_source("flat:12.5", 1000.0).unwrap();
        assert_eq!(g.elevation_at(0.0, 0.0).unwrap(), 12.5);
        assert_eq!(g.area().width(), 1000.0);
        assert!(TerrainGrid::from_source("flat:abc", 1000.0).is_err());
    }
}
