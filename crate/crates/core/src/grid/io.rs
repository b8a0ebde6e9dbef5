//! Grid files: one JSON document per grid.
//!
//! ```json
//! {"kind": "grid2", "size": [nx, ny], "resolution": 1.0, "origin": [x0, y0],
//!  "order": "x-fastest", "values": [...]}
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{project_to_plane, GridError, OccupancyGrid2D, OccupancyGrid3D, PlanarPoint};

const ORDER: &str = "x-fastest";

/// Either grid dimensionality, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Planar(OccupancyGrid2D),
    Volumetric(OccupancyGrid3D),
}

impl Grid {
    /// The planar view: planar grids as-is, volumetric grids projected.
    pub fn to_planar(&self) -> OccupancyGrid2D {
        match self {
            Grid::Planar(g) => g.clone(),
            Grid::Volumetric(g) => project_to_plane(g),
        }
    }
}

impl From<OccupancyGrid2D> for Grid {
    fn from(g: OccupancyGrid2D) -> Self {
        Grid::Planar(g)
    }
}

impl From<OccupancyGrid3D> for Grid {
    fn from(g: OccupancyGrid3D) -> Self {
        Grid::Volumetric(g)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    kind: String,
    size: Vec<usize>,
    resolution: f64,
    origin: Vec<f64>,
    order: String,
    values: Vec<f64>,
}

impl From<&Grid> for GridFile {
    fn from(grid: &Grid) -> Self {
        match grid {
            Grid::Planar(g) => {
                let (nx, ny) = g.size();
                GridFile {
                    kind: "grid2".into(),
                    size: vec![nx, ny],
                    resolution: g.resolution(),
                    origin: vec![g.origin().x, g.origin().y],
                    order: ORDER.into(),
                    values: g.values().to_vec(),
                }
            }
            Grid::Volumetric(g) => {
                let (nx, ny, nz) = g.size();
                GridFile {
                    kind: "grid3".into(),
                    size: vec![nx, ny, nz],
                    resolution: g.resolution(),
                    origin: g.origin().to_vec(),
                    order: ORDER.into(),
                    values: g.values().to_vec(),
                }
            }
        }
    }
}

impl TryFrom<GridFile> for Grid {
    type Error = GridError;

    fn try_from(f: GridFile) -> Result<Self, GridError> {
        let malformed = |e: GridError| match e {
            GridError::Invalid(msg) => GridError::MalformedFile(msg),
            other => other,
        };
        if f.order != ORDER {
            return Err(GridError::MalformedFile(format!("unsupported value order {:?}", f.order)));
        }
        match f.kind.as_str() {
            "grid2" => {
                let ([nx, ny], [x0, y0]) = (dims(&f.size)?, dims(&f.origin)?);
                OccupancyGrid2D::new((nx, ny), f.resolution, PlanarPoint::new(x0, y0), f.values)
                    .map(Grid::Planar)
                    .map_err(malformed)
            }
            "grid3" => {
                let ([nx, ny, nz], origin) = (dims(&f.size)?, dims(&f.origin)?);
                OccupancyGrid3D::new((nx, ny, nz), f.resolution, origin, f.values)
                    .map(Grid::Volumetric)
                    .map_err(malformed)
            }
            other => Err(GridError::MalformedFile(format!("unknown grid kind {other:?}"))),
        }
    }
}

fn dims<T: Copy, const N: usize>(v: &[T]) -> Result<[T; N], GridError> {
    v.try_into()
        .map_err(|_| GridError::MalformedFile(format!("expected {N} components, found {}", v.len())))
}

pub fn grid_to_json(grid: &Grid) -> String {
    serde_json::to_string(&GridFile::from(grid)).expect("grid serializes")
}

pub fn grid_from_json(text: &str) -> Result<Grid, GridError> {
    let file: GridFile =
        serde_json::from_str(text).map_err(|e| GridError::MalformedFile(e.to_string()))?;
    Grid::try_from(file)
}

pub fn save_grid(grid: &Grid, path: impl AsRef<Path>) -> Result<(), GridError> {
    let path = path.as_ref();
    fs::write(path, grid_to_json(grid)).map_err(|e| GridError::Io(format!("{}: {e}", path.display())))
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<Grid, GridError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| GridError::Io(format!("{}: {e}", path.display())))?;
    grid_from_json(&text)
}
