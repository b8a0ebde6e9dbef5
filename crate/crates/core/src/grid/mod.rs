//! Probabilistic occupancy grids on regular lattices.
//!
//! World convention shared by every module and the grid file format:
//! `origin` is the minimum corner of cell `(0, 0[, 0])`, the center of cell
//! `(i, j)` sits at `origin + (i + 0.5, j + 0.5) * resolution`, and the value
//! array is flat and x-fastest (`index = i + nx * (j + ny * k)`).

mod gen;
mod inflate;
mod interp;
mod io;

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gen::{gen_city_block, gen_city_block_with, gen_random, CityBlockParams};
pub use inflate::inflate;
pub use interp::{occupancy_at, occupancy_gradient};
pub use io::{grid_from_json, grid_to_json, load_grid, save_grid, Grid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    Invalid(String),
    #[error("point ({x}, {y}) lies outside the grid world extent")]
    OutOfBounds { x: f64, y: f64 },
    #[error("could not place {requested} blocks with free corridors (placed {placed})")]
    PlacementFailed { requested: usize, placed: usize },
    #[error("malformed grid file: {0}")]
    MalformedFile(String),
    #[error("grid file i/o: {0}")]
    Io(String),
}

/// A point in the horizontal plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for PlanarPoint {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for PlanarPoint {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for PlanarPoint {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl fmt::Display for PlanarPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Axis-aligned rectangle in world meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl WorldBox {
    pub fn contains(&self, p: PlanarPoint) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// Containment with the boundary excluded.
    pub fn contains_strictly(&self, p: PlanarPoint) -> bool {
        p.x > self.x_min && p.x < self.x_max && p.y > self.y_min && p.y < self.y_max
    }

    pub fn clamp(&self, p: PlanarPoint) -> PlanarPoint {
        PlanarPoint::new(p.x.clamp(self.x_min, self.x_max), p.y.clamp(self.y_min, self.y_max))
    }
}

/// Cell index into a grid; `k` is ignored for planar grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridIndex {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl GridIndex {
    pub const fn planar(i: usize, j: usize) -> Self {
        Self { i, j, k: 0 }
    }
}

fn check_values(values: &[f64], expected: usize, resolution: f64) -> Result<(), GridError> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(GridError::Invalid(format!("resolution must be finite and > 0, got {resolution}")));
    }
    if expected == 0 {
        return Err(GridError::Invalid("every size component must be positive".into()));
    }
    if values.len() != expected {
        return Err(GridError::Invalid(format!(
            "expected {expected} values, got {}",
            values.len()
        )));
    }
    if let Some((idx, v)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(GridError::Invalid(format!("value {v} at flat index {idx} is outside [0, 1]")));
    }
    Ok(())
}

/// Planar occupancy field. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid2D {
    nx: usize,
    ny: usize,
    resolution: f64,
    origin: PlanarPoint,
    values: Vec<f64>,
}

impl OccupancyGrid2D {
    pub fn new(
        size: (usize, usize),
        resolution: f64,
        origin: PlanarPoint,
        values: Vec<f64>,
    ) -> Result<Self, GridError> {
        let (nx, ny) = size;
        check_values(&values, nx * ny, resolution)?;
        if !origin.is_finite() {
            return Err(GridError::Invalid("origin must be finite".into()));
        }
        Ok(Self { nx, ny, resolution, origin, values })
    }

    /// All-free grid with its origin at the world origin.
    pub fn empty(size: (usize, usize), resolution: f64) -> Result<Self, GridError> {
        Self::new(size, resolution, PlanarPoint::default(), vec![0.0; size.0 * size.1])
    }

    pub fn size(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> PlanarPoint {
        self.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn flat_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        i + self.nx * j
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.flat_index(i, j)]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> PlanarPoint {
        PlanarPoint::new(
            self.origin.x + (i as f64 + 0.5) * self.resolution,
            self.origin.y + (j as f64 + 0.5) * self.resolution,
        )
    }

    pub fn world_box(&self) -> WorldBox {
        WorldBox {
            x_min: self.origin.x,
            x_max: self.origin.x + self.nx as f64 * self.resolution,
            y_min: self.origin.y,
            y_max: self.origin.y + self.ny as f64 * self.resolution,
        }
    }

    /// Cell containing `p`; points on the far edge map to the last cell.
    pub fn cell_of(&self, p: PlanarPoint) -> Option<GridIndex> {
        if !self.world_box().contains(p) {
            return None;
        }
        let i = ((p.x - self.origin.x) / self.resolution).floor() as usize;
        let j = ((p.y - self.origin.y) / self.resolution).floor() as usize;
        Some(GridIndex::planar(i.min(self.nx - 1), j.min(self.ny - 1)))
    }

    /// Builds a grid of the same geometry with new values.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self { nx: self.nx, ny: self.ny, resolution: self.resolution, origin: self.origin, values }
    }
}

/// Volumetric occupancy field. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid3D {
    nx: usize,
    ny: usize,
    nz: usize,
    resolution: f64,
    origin: [f64; 3],
    values: Vec<f64>,
}

impl OccupancyGrid3D {
    pub fn new(
        size: (usize, usize, usize),
        resolution: f64,
        origin: [f64; 3],
        values: Vec<f64>,
    ) -> Result<Self, GridError> {
        let (nx, ny, nz) = size;
        check_values(&values, nx * ny * nz, resolution)?;
        if origin.iter().any(|c| !c.is_finite()) {
            return Err(GridError::Invalid("origin must be finite".into()));
        }
        Ok(Self { nx, ny, nz, resolution, origin, values })
    }

    pub fn size(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn flat_index(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny && k < self.nz);
        i + self.nx * (j + self.ny * k)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.flat_index(i, j, k)]
    }

    /// Vertical extent `(z_min, z_max)` in meters.
    pub fn z_range(&self) -> (f64, f64) {
        (self.origin[2], self.origin[2] + self.nz as f64 * self.resolution)
    }

    pub fn world_box(&self) -> WorldBox {
        WorldBox {
            x_min: self.origin[0],
            x_max: self.origin[0] + self.nx as f64 * self.resolution,
            y_min: self.origin[1],
            y_max: self.origin[1] + self.ny as f64 * self.resolution,
        }
    }
}

/// Collapses columns onto the ground plane by their maximum value, which
/// treats every obstacle as a prism of its widest cross section.
pub fn project_to_plane(grid: &OccupancyGrid3D) -> OccupancyGrid2D {
    let (nx, ny, nz) = grid.size();
    let mut values = vec![0.0f64; nx * ny];
    for k in 0..nz {
        let layer = &grid.values[k * nx * ny..(k + 1) * nx * ny];
        for (acc, &v) in values.iter_mut().zip(layer) {
            *acc = acc.max(v);
        }
    }
    OccupancyGrid2D {
        nx,
        ny,
        resolution: grid.resolution,
        origin: PlanarPoint::new(grid.origin[0], grid.origin[1]),
        values,
    }
}
