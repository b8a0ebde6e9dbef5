//! Replays trajectory invariants against a map and configuration.

use crate::altitude::AltitudeConfig;
use crate::grid::{inflate, Grid};
use crate::mission::{compute_metrics, SavedTrajectory, TrajectoryMetrics};
use crate::planner::PlannerConfig;

const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn row(name: &'static str, pass: bool, detail: String) -> CheckRow {
    CheckRow { name, pass, detail }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= SLACK * a.abs().max(b.abs()).max(1.0)
}

fn metrics_agree(a: &TrajectoryMetrics, b: &TrajectoryMetrics) -> bool {
    a.waypoint_count == b.waypoint_count
        && close(a.length_2d, b.length_2d)
        && close(a.length_3d, b.length_3d)
        && close(a.max_step_2d, b.max_step_2d)
        && close(a.max_slope, b.max_slope)
        && close(a.min_clearance_value, b.min_clearance_value)
}

/// Every row, in a fixed order. `altitude` supplies `c_z` and `z_max`;
/// endpoint heights come from the trajectory's own start and target.
pub fn check_trajectory(
    saved: &SavedTrajectory,
    map: &Grid,
    planner: &PlannerConfig,
    altitude: &AltitudeConfig,
) -> Vec<CheckRow> {
    let traj = &saved.trajectory;
    let pts = &traj.points;
    let spec = &saved.spec;
    let mut rows = Vec::new();

    let max_step = pts.windows(2).map(|w| w[0].planar().distance(w[1].planar())).fold(0.0, f64::max);
    rows.push(row(
        "step_cap",
        max_step <= planner.c_s + SLACK,
        format!("max planar step {max_step} vs c_s {}", planner.c_s),
    ));

    let (first, last) = (pts[0], pts[pts.len() - 1]);
    rows.push(row(
        "endpoints",
        first == spec.start && last == spec.target,
        format!("first {first} last {last}, mission {} to {}", spec.start, spec.target),
    ));

    let max_slope = pts.windows(2).map(|w| (w[1].z - w[0].z).abs()).fold(0.0, f64::max);
    rows.push(row(
        "slope_cap",
        max_slope <= altitude.c_z + SLACK,
        format!("max height change {max_slope} vs c_z {}", altitude.c_z),
    ));

    let (z_lo, z_hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.z), hi.max(p.z)));
    rows.push(row(
        "height_box",
        z_lo >= 0.0 && z_hi <= altitude.z_max,
        format!("heights in [{z_lo}, {z_hi}] vs [0, {}]", altitude.z_max),
    ));

    let plane = map.to_planar();
    let bounds = plane.world_box();
    let outside = pts.iter().filter(|p| !bounds.contains(p.planar())).count();
    rows.push(row("map_bounds", outside == 0, format!("{outside} points outside the map")));

    rows.push(row(
        "fusion_alignment",
        traj.is_aligned(),
        format!("{} points, {} waypoints, {} heights", pts.len(), traj.path.waypoints.len(), traj.profile.heights.len()),
    ));

    let inflated = inflate(&plane, planner.inflation_radius, planner.occupancy_threshold);
    let metrics = compute_metrics(traj, &inflated);
    rows.push(row(
        "clearance",
        metrics.min_clearance_value < planner.occupancy_threshold,
        format!(
            "max occupancy along path {} vs threshold {}",
            metrics.min_clearance_value, planner.occupancy_threshold
        ),
    ));

    rows.push(row(
        "metrics_consistency",
        metrics_agree(&metrics, &saved.metrics),
        format!("recomputed {metrics:?}"),
    ));
    rows
}

pub fn format_table(rows: &[CheckRow]) -> String {
    let mut out = format!("{:<20} {:<6} {}\n", "invariant", "result", "detail");
    for r in rows {
        out.push_str(&format!("{:<20} {:<6} {}\n", r.name, if r.pass { "pass" } else { "FAIL" }, r.detail));
    }
    out
}
