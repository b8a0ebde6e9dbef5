//! Continuous extension of a planar grid by bilinear interpolation over cell
//! centers.
//!
//! Between the grid edge and the outermost cell centers the lattice
//! coordinate is clamped, so the field is constant along the clamped axis
//! there and its derivative along that axis is zero.

use super::{GridError, OccupancyGrid2D, PlanarPoint};

/// Patch lookup along one axis: lower node, upper node, fractional offset,
/// and whether the coordinate was clamped onto the lattice hull.
fn axis(coord: f64, origin: f64, resolution: f64, n: usize) -> (usize, usize, f64, bool) {
    let u = (coord - origin) / resolution - 0.5;
    let hi = (n - 1) as f64;
    if n == 1 {
        return (0, 0, 0.0, true);
    }
    let (u, clamped) = if u <= 0.0 {
        (0.0, u < 0.0)
    } else if u >= hi {
        (hi, u > hi)
    } else {
        (u, false)
    };
    let i0 = (u.floor() as usize).min(n - 2);
    (i0, i0 + 1, u - i0 as f64, clamped)
}

struct Patch {
    v00: f64,
    v10: f64,
    v01: f64,
    v11: f64,
    fx: f64,
    fy: f64,
    clamped_x: bool,
    clamped_y: bool,
}

fn patch(grid: &OccupancyGrid2D, p: PlanarPoint) -> Result<Patch, GridError> {
    if !p.is_finite() || !grid.world_box().contains(p) {
        return Err(GridError::OutOfBounds { x: p.x, y: p.y });
    }
    let (nx, ny) = grid.size();
    let o = grid.origin();
    let res = grid.resolution();
    let (i0, i1, fx, clamped_x) = axis(p.x, o.x, res, nx);
    let (j0, j1, fy, clamped_y) = axis(p.y, o.y, res, ny);
    Ok(Patch {
        v00: grid.get(i0, j0),
        v10: grid.get(i1, j0),
        v01: grid.get(i0, j1),
        v11: grid.get(i1, j1),
        fx,
        fy,
        clamped_x,
        clamped_y,
    })
}

/// Occupancy probability at a continuous point.
pub fn occupancy_at(grid: &OccupancyGrid2D, p: PlanarPoint) -> Result<f64, GridError> {
    let c = patch(grid, p)?;
    let bottom = c.v00 + (c.v10 - c.v00) * c.fx;
    let top = c.v01 + (c.v11 - c.v01) * c.fx;
    Ok((bottom + (top - bottom) * c.fy).clamp(0.0, 1.0))
}

/// Gradient of [`occupancy_at`] in probability per meter. At patch seams the
/// patch on the upper side of the seam supplies the one-sided derivative.
pub fn occupancy_gradient(grid: &OccupancyGrid2D, p: PlanarPoint) -> Result<PlanarPoint, GridError> {
    let c = patch(grid, p)?;
    let inv = 1.0 / grid.resolution();
    let dx = if c.clamped_x {
        0.0
    } else {
        ((c.v10 - c.v00) * (1.0 - c.fy) + (c.v11 - c.v01) * c.fy) * inv
    };
    let dy = if c.clamped_y {
        0.0
    } else {
        ((c.v01 - c.v00) * (1.0 - c.fx) + (c.v11 - c.v10) * c.fx) * inv
    };
    Ok(PlanarPoint::new(dx, dy))
}
