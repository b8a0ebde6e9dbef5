use scout_core::altitude::AltitudeConfig;
use scout_core::grid::{gen_city_block, inflate, project_to_plane, Grid, PlanarPoint};
use scout_core::mission::{plan_mission, MissionSpec, Point3};
use scout_core::planner::{feasibility_oracle, plan_leg, plan_path, PlanError, PlannerConfig};

const START: PlanarPoint = PlanarPoint::new(2.5, 2.5);
const TARGET: PlanarPoint = PlanarPoint::new(97.5, 97.5);
const VIA: PlanarPoint = PlanarPoint::new(60.5, 40.5);

#[test]
fn intermediate_waypoint_rescues_a_stalled_leg() {
    let plane = project_to_plane(&gen_city_block((100, 100, 50), 12, 8).unwrap());
    let mut cfg = PlannerConfig::for_grid(&plane);
    let grid = inflate(&plane, cfg.inflation_radius, cfg.occupancy_threshold);
    assert!(feasibility_oracle(&grid, START, TARGET, cfg.occupancy_threshold));

    let direct = plan_leg(&grid, START, TARGET, &cfg).unwrap_err();
    assert!(matches!(direct, PlanError::StallDetected { .. }), "{direct}");

    cfg.intermediate_waypoints = vec![VIA];
    let path = plan_path(&grid, START, TARGET, &cfg).unwrap();
    assert_eq!(path.waypoints.first(), Some(&START));
    assert_eq!(path.waypoints.last(), Some(&TARGET));
    assert_eq!(path.waypoints.iter().filter(|&&p| p == VIA).count(), 1);
    assert!(path.max_step() <= cfg.c_s + 1e-9);
}

#[test]
fn city_mission_invariants() {
    let volume = gen_city_block((100, 100, 50), 12, 8).unwrap();
    let mut planner = PlannerConfig::for_grid(&project_to_plane(&volume));
    planner.intermediate_waypoints = vec![VIA];
    let altitude = AltitudeConfig { h: 35.0, c_z: 1.0, z_start: 0.0, z_end: 0.0, z_max: 100.0 };
    let spec = MissionSpec::new(Point3::new(START.x, START.y, 5.0), Point3::new(TARGET.x, TARGET.y, 5.0), planner, altitude);
    let out = plan_mission(&Grid::Volumetric(volume), &spec).unwrap();
    let t = &out.trajectory;
    assert!(t.is_aligned());
    assert_eq!(t.points.first(), Some(&spec.start));
    assert_eq!(t.points.last(), Some(&spec.target));
    assert!(t.points.windows(2).all(|w| (w[1].z - w[0].z).abs() <= 1.0 + 1e-9));
    assert!(out.metrics.min_clearance_value < 0.5);
    assert!(out.metrics.length_3d >= out.metrics.length_2d);
    assert_eq!(out.metrics.max_slope, 1.0);
}
