//! Full mission: project the volume, inflate, plan the planar path, fit the
//! height profile over its waypoints and fuse both into a 3D trajectory.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::altitude::{solve_heights, AltitudeConfig, AltitudeError, AltitudeProfile};
use crate::grid::{inflate, occupancy_at, Grid, GridError, OccupancyGrid2D, PlanarPoint};
use crate::planner::{plan_path, Path2D, PlanError, PlannerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn planar(self) -> PlanarPoint {
        PlanarPoint::new(self.x, self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

impl From<[f64; 3]> for Point3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Self { x, y, z }
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Everything a mission run depends on besides the map. Serialized verbatim
/// as the trajectory file's `config_echo`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionSpec {
    pub start: Point3,
    pub target: Point3,
    pub planner: PlannerConfig,
    /// `z_start` and `z_end` are overwritten from `start` and `target`.
    pub altitude: AltitudeConfig,
}

impl MissionSpec {
    pub fn new(start: Point3, target: Point3, planner: PlannerConfig, mut altitude: AltitudeConfig) -> Self {
        altitude.z_start = start.z;
        altitude.z_end = target.z;
        Self { start, target, planner, altitude }
    }

    /// The altitude problem with endpoint heights taken from the mission.
    pub fn altitude_config(&self) -> AltitudeConfig {
        AltitudeConfig { z_start: self.start.z, z_end: self.target.z, ..self.altitude }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Spec,
    Project,
    Inflate,
    Plan2d,
    Altitude,
    Fuse,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Spec => "spec",
            Stage::Project => "project",
            Stage::Inflate => "inflate",
            Stage::Plan2d => "plan2d",
            Stage::Altitude => "altitude",
            Stage::Fuse => "fuse",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Failure {
    #[error("{0}")]
    Spec(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Altitude(#[from] AltitudeError),
    #[error("path has {waypoints} waypoints but profile has {heights} heights")]
    Misaligned { waypoints: usize, heights: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{stage}: {failure}")]
pub struct MissionError {
    pub stage: Stage,
    pub failure: Failure,
}

impl MissionError {
    fn at(stage: Stage) -> impl Fn(Failure) -> MissionError {
        move |failure| MissionError { stage, failure }
    }

    pub fn code(&self) -> &'static str {
        match &self.failure {
            Failure::Spec(_) => "InvalidSpec",
            Failure::Grid(GridError::OutOfBounds { .. }) => "OutOfBounds",
            Failure::Grid(_) => "GridError",
            Failure::Plan(e) => e.code(),
            Failure::Altitude(e) => e.code(),
            Failure::Misaligned { .. } => "Misaligned",
        }
    }

    pub fn partial_path(&self) -> Option<&Path2D> {
        match &self.failure {
            Failure::Plan(e) => e.partial_path(),
            _ => None,
        }
    }
}

/// One completed pipeline stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory3D {
    pub points: Vec<Point3>,
    pub path: Path2D,
    pub profile: AltitudeProfile,
}

impl Trajectory3D {
    /// Pairs each waypoint with its height.
    pub fn fuse(path: Path2D, profile: AltitudeProfile) -> Result<Self, Failure> {
        if path.waypoints.len() != profile.heights.len() {
            return Err(Failure::Misaligned { waypoints: path.waypoints.len(), heights: profile.heights.len() });
        }
        let points = path
            .waypoints
            .iter()
            .zip(&profile.heights)
            .map(|(p, &z)| Point3::new(p.x, p.y, z))
            .collect();
        Ok(Self { points, path, profile })
    }

    /// Whether every point is exactly its waypoint lifted to its height.
    pub fn is_aligned(&self) -> bool {
        self.points.len() == self.path.waypoints.len()
            && self.points.len() == self.profile.heights.len()
            && self
                .points
                .iter()
                .zip(&self.path.waypoints)
                .zip(&self.profile.heights)
                .all(|((p, w), &z)| p.x == w.x && p.y == w.y && p.z == z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetrics {
    pub length_2d: f64,
    pub length_3d: f64,
    pub max_step_2d: f64,
    pub max_slope: f64,
    /// Highest inflated-grid occupancy seen along the path.
    pub min_clearance_value: f64,
    pub waypoint_count: usize,
}

#[derive(Debug, Clone)]
pub struct MissionOutcome {
    pub trajectory: Trajectory3D,
    pub metrics: TrajectoryMetrics,
    /// The planar grid the path was planned on.
    pub inflated: OccupancyGrid2D,
    pub log: Vec<StageRecord>,
}

/// Interior samples per segment for the clearance metric.
pub const CLEARANCE_SAMPLES: usize = 10;

pub fn validate_spec(grid: &Grid, spec: &MissionSpec) -> Result<(), Failure> {
    let finite = |p: Point3| p.x.is_finite() && p.y.is_finite() && p.z.is_finite();
    if !finite(spec.start) || !finite(spec.target) {
        return Err(Failure::Spec("start and target must be finite".into()));
    }
    if spec.start == spec.target {
        return Err(Failure::Spec(format!("start and target coincide at {}", spec.start)));
    }
    spec.planner.validate()?;
    spec.altitude_config().validate()?;
    let bounds = match grid {
        Grid::Planar(g) => g.world_box(),
        Grid::Volumetric(g) => g.world_box(),
    };
    for p in [spec.start, spec.target] {
        if !bounds.contains(p.planar()) {
            return Err(GridError::OutOfBounds { x: p.x, y: p.y }.into());
        }
        if let Grid::Volumetric(g) = grid {
            let (z0, z1) = g.z_range();
            if !(z0..=z1).contains(&p.z) {
                return Err(Failure::Spec(format!("{p} lies outside the map's height range [{z0}, {z1}]")));
            }
        }
    }
    Ok(())
}

/// Runs the stages in their fixed order, stopping at the first failure.
pub fn plan_mission(grid: &Grid, spec: &MissionSpec) -> Result<MissionOutcome, MissionError> {
    let mut log = Vec::new();
    let mut record = |stage: Stage, detail: String| log.push(StageRecord { stage, detail });

    validate_spec(grid, spec).map_err(MissionError::at(Stage::Spec))?;
    record(Stage::Spec, format!("start {} target {}", spec.start, spec.target));

    let plane = grid.to_planar();
    let (nx, ny) = plane.size();
    record(Stage::Project, format!("{nx}x{ny} cells"));

    let cfg = &spec.planner;
    let inflated = inflate(&plane, cfg.inflation_radius, cfg.occupancy_threshold);
    let occupied = inflated.values().iter().filter(|&&v| v >= cfg.occupancy_threshold).count();
    record(Stage::Inflate, format!("radius {} -> {occupied} occupied cells", cfg.inflation_radius));

    let path = plan_path(&inflated, spec.start.planar(), spec.target.planar(), cfg)
        .map_err(|e| MissionError { stage: Stage::Plan2d, failure: e.into() })?;
    record(Stage::Plan2d, format!("{} waypoints", path.waypoints.len()));

    let profile = solve_heights(path.waypoints.len(), &spec.altitude_config())
        .map_err(|e| MissionError { stage: Stage::Altitude, failure: e.into() })?;
    record(Stage::Altitude, format!("max slope {}", profile.max_slope()));

    let trajectory = Trajectory3D::fuse(path, profile).map_err(MissionError::at(Stage::Fuse))?;
    let metrics = compute_metrics(&trajectory, &inflated);
    record(Stage::Fuse, format!("{} points", trajectory.points.len()));

    Ok(MissionOutcome { trajectory, metrics, inflated, log })
}

/// Polyline lengths, step extremes and the clearance value, which samples
/// every waypoint plus [`CLEARANCE_SAMPLES`] evenly spaced interior points of
/// each segment: a capped diagonal step can clip a cell corner that both of
/// its endpoints avoid.
pub fn compute_metrics(traj: &Trajectory3D, inflated: &OccupancyGrid2D) -> TrajectoryMetrics {
    let occ = |p: PlanarPoint| occupancy_at(inflated, p).unwrap_or(1.0);
    let mut m = TrajectoryMetrics {
        length_2d: 0.0,
        length_3d: 0.0,
        max_step_2d: 0.0,
        max_slope: 0.0,
        min_clearance_value: traj.points.iter().map(|p| occ(p.planar())).fold(0.0, f64::max),
        waypoint_count: traj.points.len(),
    };
    for w in traj.points.windows(2) {
        let (a, b) = (w[0].planar(), w[1].planar());
        let step = a.distance(b);
        m.length_2d += step;
        m.length_3d += w[0].distance(w[1]);
        m.max_step_2d = m.max_step_2d.max(step);
        m.max_slope = m.max_slope.max((w[1].z - w[0].z).abs());
        for k in 1..=CLEARANCE_SAMPLES {
            let s = k as f64 / (CLEARANCE_SAMPLES + 1) as f64;
            m.min_clearance_value = m.min_clearance_value.max(occ(a + (b - a) * s));
        }
    }
    m
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryFile {
    points: Vec<Point3>,
    path_2d: Vec<PlanarPoint>,
    heights: Vec<f64>,
    metrics: TrajectoryMetrics,
    config_echo: MissionSpec,
}

/// Contents of a trajectory file. The planar path keeps its waypoints only.
/// Points are taken as stored, so a hand-edited file can disagree with its
/// path and profile; [`Trajectory3D::is_aligned`] reports that.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedTrajectory {
    pub trajectory: Trajectory3D,
    pub metrics: TrajectoryMetrics,
    pub spec: MissionSpec,
}

pub fn trajectory_to_json(traj: &Trajectory3D, metrics: &TrajectoryMetrics, spec: &MissionSpec) -> String {
    let file = TrajectoryFile {
        points: traj.points.clone(),
        path_2d: traj.path.waypoints.clone(),
        heights: traj.profile.heights.clone(),
        metrics: *metrics,
        config_echo: spec.clone(),
    };
    serde_json::to_string_pretty(&file).expect("trajectory serializes")
}

pub fn trajectory_from_json(text: &str) -> Result<SavedTrajectory, GridError> {
    let file: TrajectoryFile =
        serde_json::from_str(text).map_err(|e| GridError::MalformedFile(e.to_string()))?;
    let (n, m, k) = (file.points.len(), file.path_2d.len(), file.heights.len());
    if n != m || n != k {
        return Err(GridError::MalformedFile(format!(
            "length mismatch: {n} points, {m} planar waypoints, {k} heights"
        )));
    }
    if n < 2 {
        return Err(GridError::MalformedFile("a trajectory needs at least 2 points".into()));
    }
    let trajectory = Trajectory3D {
        points: file.points,
        path: Path2D { waypoints: file.path_2d, ..Default::default() },
        profile: AltitudeProfile { heights: file.heights },
    };
    Ok(SavedTrajectory { trajectory, metrics: file.metrics, spec: file.config_echo })
}

pub fn save_trajectory(
    traj: &Trajectory3D,
    metrics: &TrajectoryMetrics,
    spec: &MissionSpec,
    path: impl AsRef<Path>,
) -> Result<(), GridError> {
    let path = path.as_ref();
    fs::write(path, trajectory_to_json(traj, metrics, spec))
        .map_err(|e| GridError::Io(format!("{}: {e}", path.display())))
}

pub fn load_trajectory(path: impl AsRef<Path>) -> Result<SavedTrajectory, GridError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| GridError::Io(format!("{}: {e}", path.display())))?;
    trajectory_from_json(&text)
}
