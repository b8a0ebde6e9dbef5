use super::OccupancyGrid2D;

/// Disk offsets `(di, dj)` whose center distance is within `radius_cells`.
fn disk_offsets(radius_cells: f64) -> Vec<(isize, isize)> {
    // Radii that are whole multiples of the resolution must include the
    // lattice points lying exactly on the circle.
    let r2 = radius_cells * radius_cells * (1.0 + 1e-12) + 1e-12;
    let reach = radius_cells.floor() as isize;
    let mut out = Vec::new();
    for dj in -reach..=reach {
        for di in -reach..=reach {
            if ((di * di + dj * dj) as f64) <= r2 {
                out.push((di, dj));
            }
        }
    }
    out
}

/// Dilates obstacles by a Euclidean disk.
///
/// Cells at or above `threshold` act as sources. Every cell whose center lies
/// within `radius` meters of a source center becomes exactly 1.0; all other
/// cells keep their value, so sub-threshold probabilities survive outside the
/// safety margin.
pub fn inflate(grid: &OccupancyGrid2D, radius: f64, threshold: f64) -> OccupancyGrid2D {
    assert!(radius >= 0.0 && radius.is_finite(), "inflation radius must be finite and >= 0");
    assert!(threshold > 0.0 && threshold < 1.0, "inflation threshold must lie in (0, 1)");

    let (nx, ny) = grid.size();
    let offsets = disk_offsets(radius / grid.resolution());
    let mut values = grid.values().to_vec();
    for j in 0..ny {
        for i in 0..nx {
            if grid.get(i, j) < threshold {
                continue;
            }
            for &(di, dj) in &offsets {
                let (ti, tj) = (i as isize + di, j as isize + dj);
                if ti < 0 || tj < 0 || ti >= nx as isize || tj >= ny as isize {
                    continue;
                }
                values[ti as usize + nx * tj as usize] = 1.0;
            }
        }
    }
    grid.with_values(values)
}
