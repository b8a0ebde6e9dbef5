//! Deterministic SVG output: map cells in grayscale, an optional inflation
//! overlay, the planned path with start and target markers, and an optional
//! altitude-versus-waypoint strip chart under the map.

use std::fmt::Write;

use crate::grid::OccupancyGrid2D;
use crate::mission::Point3;

const MAX_MAP_PX: usize = 800;
const STRIP_HEIGHT: f64 = 160.0;
const STRIP_GAP: f64 = 20.0;

pub struct Scene<'a> {
    pub grid: &'a OccupancyGrid2D,
    /// Inflated grid and occupancy threshold: cells that only the inflation
    /// made occupied are tinted.
    pub inflated: Option<(&'a OccupancyGrid2D, f64)>,
    pub trajectory: Option<&'a [Point3]>,
    pub altitude_strip: bool,
}

fn gray(v: f64) -> String {
    let g = (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8;
    format!("#{g:02x}{g:02x}{g:02x}")
}

pub fn render(scene: &Scene<'_>) -> String {
    let grid = scene.grid;
    let (nx, ny) = grid.size();
    let cell = (MAX_MAP_PX / nx.max(ny)).clamp(2, 24) as f64;
    let map_w = nx as f64 * cell;
    let map_h = ny as f64 * cell;
    let strip = scene.altitude_strip && scene.trajectory.is_some();
    let height = if strip { map_h + STRIP_GAP + STRIP_HEIGHT } else { map_h };

    let origin = grid.origin();
    let res = grid.resolution();
    let px = |x: f64| (x - origin.x) / res * cell;
    let py = |y: f64| map_h - (y - origin.y) / res * cell;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{map_w}" height="{height}" viewBox="0 0 {map_w} {height}">"#
    );
    let _ = writeln!(s, r#"<g class="grid">"#);
    for j in 0..ny {
        for i in 0..nx {
            let _ = writeln!(
                s,
                r#"<rect class="cell" x="{}" y="{}" width="{cell}" height="{cell}" fill="{}"/>"#,
                i as f64 * cell,
                (ny - 1 - j) as f64 * cell,
                gray(grid.get(i, j))
            );
        }
    }
    let _ = writeln!(s, "</g>");

    if let Some((inflated, threshold)) = scene.inflated {
        let _ = writeln!(s, r##"<g class="inflated" fill="#e8a040" fill-opacity="0.5">"##);
        for j in 0..ny {
            for i in 0..nx {
                if inflated.get(i, j) >= threshold && grid.get(i, j) < threshold {
                    let _ = writeln!(
                        s,
                        r#"<rect x="{}" y="{}" width="{cell}" height="{cell}"/>"#,
                        i as f64 * cell,
                        (ny - 1 - j) as f64 * cell
                    );
                }
            }
        }
        let _ = writeln!(s, "</g>");
    }

    if let Some(points) = scene.trajectory {
        let coords: Vec<String> = points.iter().map(|p| format!("{:.3},{:.3}", px(p.x), py(p.y))).collect();
        let _ = writeln!(
            s,
            r##"<polyline class="path" fill="none" stroke="#1f5fd0" stroke-width="2" points="{}"/>"##,
            coords.join(" ")
        );
        let r = (cell * 0.6).max(3.0);
        if let (Some(a), Some(b)) = (points.first(), points.last()) {
            let _ = writeln!(s, r#"<circle class="start" cx="{:.3}" cy="{:.3}" r="{r}" fill="red"/>"#, px(a.x), py(a.y));
            let _ = writeln!(s, r#"<circle class="target" cx="{:.3}" cy="{:.3}" r="{r}" fill="magenta"/>"#, px(b.x), py(b.y));
        }
        if strip {
            strip_chart(&mut s, points, map_w, map_h + STRIP_GAP);
        }
    }
    s.push_str("</svg>\n");
    s
}

fn strip_chart(s: &mut String, points: &[Point3], width: f64, top: f64) {
    let z_top = points.iter().map(|p| p.z).fold(1.0, f64::max) * 1.1;
    let last = (points.len().max(2) - 1) as f64;
    let x = |t: usize| t as f64 / last * width;
    let y = |z: f64| top + STRIP_HEIGHT * (1.0 - z / z_top);
    let _ = writeln!(
        s,
        r##"<rect class="strip" x="0" y="{top}" width="{width}" height="{STRIP_HEIGHT}" fill="#f8f8f8" stroke="#888888"/>"##
    );
    let coords: Vec<String> = points.iter().enumerate().map(|(t, p)| format!("{:.3},{:.3}", x(t), y(p.z))).collect();
    let _ = writeln!(
        s,
        r##"<polyline class="altitude" fill="none" stroke="#208040" stroke-width="1.5" points="{}"/>"##,
        coords.join(" ")
    );
    let _ = writeln!(
        s,
        r#"<text x="4" y="{:.3}" font-size="11" font-family="monospace">height, 0 to {:.2} m, by waypoint</text>"#,
        top + 12.0,
        z_top
    );
}
