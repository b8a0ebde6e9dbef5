//! Greedy planar waypoint planning.
//!
//! Each step minimizes
//!
//! ```text
//! Z(p) = w1 * |p - target|^2 / d0^2 + w2 * occupancy(p)
//! ```
//!
//! over the disk of radius `c_s` around the previous waypoint, clipped to the
//! map. `d0` is the leg's initial start-to-target distance; dividing by its
//! square puts the attraction term on the same O(1) scale as the occupancy
//! term. `w1` grows as the vehicle closes in on the target.
//!
//! Planning always runs on an already-inflated grid.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{occupancy_at, occupancy_gradient, GridError, OccupancyGrid2D, PlanarPoint};
use crate::kernel::{minimize, DiskBoxRegion, KernelError, KernelSettings, ObjectiveField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    /// Goal attraction.
    pub w1: f64,
    /// Obstacle avoidance.
    pub w2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Maximum planar displacement per step, meters.
    pub c_s: f64,
    pub w1_base: f64,
    pub w2: f64,
    pub weight_gain: f64,
    pub inflation_radius: f64,
    pub occupancy_threshold: f64,
    pub goal_tolerance: f64,
    pub max_steps: usize,
    pub stall_window: usize,
    pub stall_eps: f64,
    pub intermediate_waypoints: Vec<PlanarPoint>,
    pub kernel: KernelSettings,
}

impl PlannerConfig {
    /// Defaults for a map: a diagonal cell step, one cell of inflation and a
    /// step budget proportional to the map perimeter.
    pub fn for_grid(grid: &OccupancyGrid2D) -> Self {
        let res = grid.resolution();
        let (nx, ny) = grid.size();
        let c_s = std::f64::consts::SQRT_2 * res;
        Self {
            c_s,
            w1_base: 1.0,
            w2: 5.0,
            weight_gain: 4.0,
            inflation_radius: res,
            occupancy_threshold: 0.5,
            goal_tolerance: c_s,
            max_steps: 10 * (nx + ny),
            stall_window: 15,
            stall_eps: 0.1 * c_s,
            intermediate_waypoints: Vec::new(),
            kernel: KernelSettings::for_radius(c_s),
        }
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |msg: String| Err(PlanError::InvalidConfig(msg));
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !finite_pos(self.c_s) {
            return bad(format!("c_s must be finite and > 0, got {}", self.c_s));
        }
        if !(finite_nonneg(self.w1_base) && finite_nonneg(self.w2) && finite_nonneg(self.weight_gain)) {
            return bad("w1_base, w2 and weight_gain must be finite and >= 0".into());
        }
        if self.w1_base + self.w2 <= 0.0 {
            return bad("w1_base + w2 must be > 0".into());
        }
        if !finite_nonneg(self.inflation_radius) {
            return bad(format!("inflation_radius must be finite and >= 0, got {}", self.inflation_radius));
        }
        if !(self.occupancy_threshold > 0.0 && self.occupancy_threshold < 1.0) {
            return bad(format!("occupancy_threshold must lie in (0, 1), got {}", self.occupancy_threshold));
        }
        if !(finite_pos(self.goal_tolerance) && self.goal_tolerance <= self.c_s) {
            return bad(format!("goal_tolerance must lie in (0, c_s], got {}", self.goal_tolerance));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be >= 1".into());
        }
        if self.stall_window < 2 {
            return bad("stall_window must be >= 2".into());
        }
        if !finite_pos(self.stall_eps) {
            return bad(format!("stall_eps must be finite and > 0, got {}", self.stall_eps));
        }
        if self.intermediate_waypoints.iter().any(|p| !p.is_finite()) {
            return bad("intermediate waypoints must be finite".into());
        }
        self.kernel.validate().map_err(|e| PlanError::InvalidConfig(e.to_string()))
    }
}

/// One accepted planning step, kept so the chaining and descent properties
/// can be replayed after the fact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub index: usize,
    pub weights: Weights,
    /// Center of the step region, i.e. the previous waypoint.
    pub from: PlanarPoint,
    pub to: PlanarPoint,
    pub objective_before: f64,
    pub objective_after: f64,
    pub displacement: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Path2D {
    pub waypoints: Vec<PlanarPoint>,
    /// Objective value reached by each step.
    pub objective_values: Vec<f64>,
    pub steps: Vec<StepRecord>,
}

impl Path2D {
    pub fn max_step(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].distance(w[1])).fold(0.0, f64::max)
    }

    fn append_leg(&mut self, leg: Path2D) {
        let skip = usize::from(
            !self.waypoints.is_empty() && self.waypoints.last() == leg.waypoints.first(),
        );
        let offset = self.steps.len();
        self.waypoints.extend(leg.waypoints.into_iter().skip(skip));
        self.objective_values.extend(leg.objective_values);
        self.steps.extend(leg.steps.into_iter().map(|mut s| {
            s.index += offset;
            s
        }));
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("invalid planner config: {0}")]
    InvalidConfig(String),
    #[error("{which} {point} is not strictly inside the map")]
    OutOfBounds { which: &'static str, point: PlanarPoint },
    #[error("start {point} is occupied (occupancy {value})")]
    StartOccupied { point: PlanarPoint, value: f64 },
    #[error("target {point} is occupied (occupancy {value})")]
    TargetOccupied { point: PlanarPoint, value: f64 },
    #[error("planner stalled: moved {moved} m over the last {window} steps ({} waypoints so far)", partial.waypoints.len())]
    StallDetected { partial: Box<Path2D>, window: usize, moved: f64 },
    #[error("no arrival within {max_steps} steps")]
    MaxStepsExceeded { partial: Box<Path2D>, max_steps: usize },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("leg {leg}: {source}")]
    Leg { leg: usize, source: Box<PlanError> },
}

impl PlanError {
    /// Stable machine-readable name of the innermost failure.
    pub fn code(&self) -> &'static str {
        match self {
            PlanError::InvalidConfig(_) => "InvalidConfig",
            PlanError::OutOfBounds { .. } => "OutOfBounds",
            PlanError::StartOccupied { .. } => "StartOccupied",
            PlanError::TargetOccupied { .. } => "TargetOccupied",
            PlanError::StallDetected { .. } => "StallDetected",
            PlanError::MaxStepsExceeded { .. } => "MaxStepsExceeded",
            PlanError::Kernel(KernelError::NonFiniteObjective { .. }) => "NonFiniteObjective",
            PlanError::Kernel(_) => "KernelError",
            PlanError::Grid(_) => "GridError",
            PlanError::Leg { source, .. } => source.code(),
        }
    }

    /// Waypoints planned before a stall or step-budget failure.
    pub fn partial_path(&self) -> Option<&Path2D> {
        match self {
            PlanError::StallDetected { partial, .. } | PlanError::MaxStepsExceeded { partial, .. } => Some(partial),
            PlanError::Leg { source, .. } => source.partial_path(),
            _ => None,
        }
    }
}

/// The per-step objective on an inflated grid.
#[derive(Debug, Clone, Copy)]
pub struct StepObjective<'a> {
    grid: &'a OccupancyGrid2D,
    target: PlanarPoint,
    weights: Weights,
    inv_d0_sq: f64,
}

impl<'a> StepObjective<'a> {
    pub fn try_eval(&self, p: PlanarPoint) -> Result<f64, GridError> {
        let occ = occupancy_at(self.grid, p)?;
        Ok(self.weights.w1 * (p - self.target).norm_sq() * self.inv_d0_sq + self.weights.w2 * occ)
    }

    pub fn try_grad(&self, p: PlanarPoint) -> Result<PlanarPoint, GridError> {
        let occ = occupancy_gradient(self.grid, p)?;
        Ok((p - self.target) * (2.0 * self.weights.w1 * self.inv_d0_sq) + occ * self.weights.w2)
    }

    pub fn weights(&self) -> Weights {
        self.weights
    }
}

impl ObjectiveField for StepObjective<'_> {
    // Outside the map the field is undefined; NaN makes the solver report it.
    fn eval(&self, p: PlanarPoint) -> f64 {
        self.try_eval(p).unwrap_or(f64::NAN)
    }

    fn grad(&self, p: PlanarPoint) -> PlanarPoint {
        self.try_grad(p).unwrap_or(PlanarPoint::new(f64::NAN, f64::NAN))
    }

    fn quadratic_minimizer(&self) -> Option<PlanarPoint> {
        (self.weights.w1 > 0.0).then_some(self.target)
    }

    // Free pockets of the occupancy term bottom out at cell centers, which
    // the ring starts can miss; offer every center inside the step disk.
    fn candidate_starts(&self, region: &DiskBoxRegion) -> Vec<PlanarPoint> {
        let g = self.grid;
        let (nx, ny) = g.size();
        let (c, r, res) = (region.center(), region.radius(), g.resolution());
        let o = g.origin();
        let lo = |v: f64, o: f64| ((v - r - o) / res - 0.5).ceil().max(0.0) as usize;
        let hi = |v: f64, o: f64, n: usize| (((v + r - o) / res - 0.5).floor().max(-1.0) + 1.0).min(n as f64) as usize;
        let mut out = Vec::new();
        for j in lo(c.y, o.y)..hi(c.y, o.y, ny) {
            for i in lo(c.x, o.x)..hi(c.x, o.x, nx) {
                let p = g.cell_center(i, j);
                if p.distance(c) <= r {
                    out.push(p);
                }
            }
        }
        out
    }
}

pub fn step_objective(
    grid: &OccupancyGrid2D,
    target: PlanarPoint,
    weights: Weights,
    d0: f64,
) -> StepObjective<'_> {
    assert!(d0 > 0.0 && d0.is_finite(), "normalization distance must be finite and > 0");
    StepObjective { grid, target, weights, inv_d0_sq: 1.0 / (d0 * d0) }
}

/// Goal attraction rises affinely with progress: `w1_base` at the start
/// distance, `w1_base * (1 + weight_gain)` at the target. `w2` is constant.
pub fn weight_schedule(d_current: f64, d0: f64, config: &PlannerConfig) -> Weights {
    let progress = (1.0 - d_current / d0).max(0.0);
    Weights { w1: config.w1_base * (1.0 + config.weight_gain * progress), w2: config.w2 }
}

fn check_endpoint(
    grid: &OccupancyGrid2D,
    p: PlanarPoint,
    which: &'static str,
    threshold: f64,
) -> Result<(), PlanError> {
    if !p.is_finite() || !grid.world_box().contains_strictly(p) {
        return Err(PlanError::OutOfBounds { which, point: p });
    }
    let value = occupancy_at(grid, p)?;
    if value >= threshold {
        return Err(match which {
            "start" => PlanError::StartOccupied { point: p, value },
            _ => PlanError::TargetOccupied { point: p, value },
        });
    }
    Ok(())
}

/// Plans a single leg, one constrained minimization per step, until the
/// vehicle is within `goal_tolerance` of the target; the target itself is then
/// appended so the path ends on it exactly.
pub fn plan_leg(
    grid: &OccupancyGrid2D,
    start: PlanarPoint,
    target: PlanarPoint,
    config: &PlannerConfig,
) -> Result<Path2D, PlanError> {
    config.validate()?;
    check_endpoint(grid, start, "start", config.occupancy_threshold)?;
    check_endpoint(grid, target, "target", config.occupancy_threshold)?;

    let mut path = Path2D { waypoints: vec![start], ..Default::default() };
    let d0 = start.distance(target);
    if d0 <= config.goal_tolerance {
        path.waypoints.push(target);
        return Ok(path);
    }

    let bounds = grid.world_box();
    let mut window: VecDeque<f64> = VecDeque::with_capacity(config.stall_window);
    let mut current = start;
    for index in 1..=config.max_steps {
        let weights = weight_schedule(current.distance(target), d0, config);
        let field = step_objective(grid, target, weights, d0);
        let region = DiskBoxRegion::new(current, config.c_s, bounds)?;
        let before = field.try_eval(current)?;
        let report = minimize(&field, &region, &config.kernel)?;
        let next = report.argmin;
        let displacement = current.distance(next);

        path.steps.push(StepRecord {
            index,
            weights,
            from: current,
            to: next,
            objective_before: before,
            objective_after: report.value,
            displacement,
        });
        path.objective_values.push(report.value);
        path.waypoints.push(next);

        if next.distance(target) <= config.goal_tolerance {
            if next != target {
                path.waypoints.push(target);
            }
            return Ok(path);
        }

        if window.len() == config.stall_window {
            window.pop_front();
        }
        window.push_back(displacement);
        let moved: f64 = window.iter().sum();
        if window.len() == config.stall_window && moved < config.stall_eps {
            return Err(PlanError::StallDetected {
                partial: Box::new(path),
                window: config.stall_window,
                moved,
            });
        }
        current = next;
    }
    Err(PlanError::MaxStepsExceeded { partial: Box::new(path), max_steps: config.max_steps })
}

/// Chains legs through the configured intermediate waypoints. Junction
/// points appear once. Leg failures are wrapped with their leg index, and
/// their partial paths include every earlier leg.
pub fn plan_path(
    grid: &OccupancyGrid2D,
    start: PlanarPoint,
    target: PlanarPoint,
    config: &PlannerConfig,
) -> Result<Path2D, PlanError> {
    let mut stops = Vec::with_capacity(config.intermediate_waypoints.len() + 2);
    stops.push(start);
    stops.extend(config.intermediate_waypoints.iter().copied());
    stops.push(target);

    let mut path = Path2D::default();
    for (leg, pair) in stops.windows(2).enumerate() {
        match plan_leg(grid, pair[0], pair[1], config) {
            Ok(p) => path.append_leg(p),
            Err(err) => {
                let err = match err {
                    PlanError::StallDetected { partial, window, moved } => {
                        let mut joined = path;
                        joined.append_leg(*partial);
                        PlanError::StallDetected { partial: Box::new(joined), window, moved }
                    }
                    PlanError::MaxStepsExceeded { partial, max_steps } => {
                        let mut joined = path;
                        joined.append_leg(*partial);
                        PlanError::MaxStepsExceeded { partial: Box::new(joined), max_steps }
                    }
                    other => other,
                };
                return Err(PlanError::Leg { leg, source: Box::new(err) });
            }
        }
    }
    Ok(path)
}

/// Whether the cells holding `start` and `target` are joined by a 4-connected
/// chain of cells below `threshold`. Separates genuinely blocked maps from
/// local-minimum failures of the greedy planner.
pub fn feasibility_oracle(
    grid: &OccupancyGrid2D,
    start: PlanarPoint,
    target: PlanarPoint,
    threshold: f64,
) -> bool {
    let (Some(s), Some(t)) = (grid.cell_of(start), grid.cell_of(target)) else {
        return false;
    };
    let (nx, ny) = grid.size();
    let free = |i: usize, j: usize| grid.get(i, j) < threshold;
    if !free(s.i, s.j) || !free(t.i, t.j) {
        return false;
    }
    let mut seen = vec![false; nx * ny];
    let mut queue = VecDeque::from([(s.i, s.j)]);
    seen[s.i + nx * s.j] = true;
    while let Some((i, j)) = queue.pop_front() {
        if (i, j) == (t.i, t.j) {
            return true;
        }
        let neighbours = [
            (i.wrapping_sub(1), j),
            (i + 1, j),
            (i, j.wrapping_sub(1)),
            (i, j + 1),
        ];
        for (a, b) in neighbours {
            if a < nx && b < ny && !seen[a + nx * b] && free(a, b) {
                seen[a + nx * b] = true;
                queue.push_back((a, b));
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gen_random, inflate};
    use crate::kernel::gradient_check;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn empty(n: usize) -> OccupancyGrid2D {
        OccupancyGrid2D::empty((n, n), 1.0).unwrap()
    }

    #[test]
    fn objective_vanishes_at_free_target() {
        let g = empty(10);
        let t = PlanarPoint::new(4.2, 6.1);
        let f = step_objective(&g, t, Weights { w1: 2.0, w2: 5.0 }, 7.0);
        assert_eq!(f.try_eval(t).unwrap(), 0.0);
    }

    #[test]
    fn objective_on_empty_grid_is_pure_quadratic() {
        let g = empty(10);
        let t = PlanarPoint::new(4.2, 6.1);
        let (w1, d0) = (2.5, 3.0);
        let f = step_objective(&g, t, Weights { w1, w2: 5.0 }, d0);
        let p = PlanarPoint::new(1.0, 8.5);
        let expect = w1 * (p - t).norm_sq() / (d0 * d0);
        assert!((f.try_eval(p).unwrap() - expect).abs() < 1e-14);
        let g_expect = (p - t) * (2.0 * w1 / (d0 * d0));
        assert!((f.try_grad(p).unwrap() - g_expect).norm() < 1e-14);
    }

    #[test]
    fn objective_matches_direct_recomputation() {
        let g = inflate(&gen_random((20, 20), 0.2, 4), 1.0, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let t = PlanarPoint::new(rng.random_range(0.0..20.0), rng.random_range(0.0..20.0));
            let p = PlanarPoint::new(rng.random_range(0.0..20.0), rng.random_range(0.0..20.0));
            let w = Weights { w1: rng.random_range(0.0..5.0), w2: rng.random_range(0.0..5.0) };
            let d0 = rng.random_range(0.5..30.0);
            let f = step_objective(&g, t, w, d0);
            let direct = w.w1 * ((p.x - t.x).powi(2) + (p.y - t.y).powi(2)) / d0.powi(2)
                + w.w2 * occupancy_at(&g, p).unwrap();
            assert!((f.try_eval(p).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn objective_gradient_is_consistent() {
        let g = inflate(&gen_random((15, 15), 0.3, 6), 1.0, 0.5);
        let f = step_objective(&g, PlanarPoint::new(12.0, 3.0), Weights { w1: 3.0, w2: 5.0 }, 11.0);
        // a point well inside a patch
        assert!(gradient_check(&f, PlanarPoint::new(4.3, 7.8), 1e-5) <= 1e-5);
    }

    #[test]
    fn schedule_anchors() {
        let cfg = PlannerConfig::for_grid(&empty(10));
        assert_eq!(weight_schedule(10.0, 10.0, &cfg).w1, 1.0);
        assert_eq!(weight_schedule(0.0, 10.0, &cfg).w1, 5.0);
        assert_eq!(weight_schedule(5.0, 10.0, &cfg).w1, 3.0);
        assert_eq!(weight_schedule(25.0, 10.0, &cfg).w1, 1.0);
        assert_eq!(weight_schedule(5.0, 10.0, &cfg).w2, 5.0);
    }

    #[test]
    fn schedule_is_non_increasing_in_distance() {
        let cfg = PlannerConfig::for_grid(&empty(10));
        let mut prev = f64::INFINITY;
        for k in 0..=300 {
            let w = weight_schedule(k as f64 * 0.1, 20.0, &cfg).w1;
            assert!(w <= prev);
            prev = w;
        }
    }

    #[test]
    fn adjacent_target_snaps_immediately() {
        let g = empty(10);
        let cfg = PlannerConfig::for_grid(&g);
        let (s, t) = (PlanarPoint::new(2.5, 2.5), PlanarPoint::new(3.3, 3.1));
        let path = plan_leg(&g, s, t, &cfg).unwrap();
        assert_eq!(path.waypoints, vec![s, t]);
        assert!(path.steps.is_empty());
    }

    #[test]
    fn empty_grid_path_is_straight() {
        let g = empty(40);
        let cfg = PlannerConfig::for_grid(&g);
        let (s, t) = (PlanarPoint::new(2.5, 3.5), PlanarPoint::new(35.2, 28.9));
        let path = plan_leg(&g, s, t, &cfg).unwrap();
        let dir = (t - s) * (1.0 / t.distance(s));
        for w in &path.waypoints {
            let off = *w - s;
            let lateral = (off.x * dir.y - off.y * dir.x).abs();
            assert!(lateral <= 1e-6, "lateral deviation {lateral}");
        }
        assert_eq!(path.waypoints[0], s);
        assert_eq!(*path.waypoints.last().unwrap(), t);
        assert!(path.max_step() <= cfg.c_s + 1e-9);
    }

    #[test]
    fn endpoint_preconditions() {
        let mut v = vec![0.0; 100];
        v[5 + 10 * 5] = 1.0;
        let g = OccupancyGrid2D::new((10, 10), 1.0, PlanarPoint::default(), v).unwrap();
        let cfg = PlannerConfig::for_grid(&g);
        let free = PlanarPoint::new(1.5, 1.5);
        let occ = PlanarPoint::new(5.5, 5.5);
        assert!(matches!(plan_leg(&g, occ, free, &cfg), Err(PlanError::StartOccupied { .. })));
        assert!(matches!(plan_leg(&g, free, occ, &cfg), Err(PlanError::TargetOccupied { .. })));
        let edge = PlanarPoint::new(0.0, 4.0);
        assert!(matches!(plan_leg(&g, edge, free, &cfg), Err(PlanError::OutOfBounds { .. })));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let g = empty(10);
        let mut cfg = PlannerConfig::for_grid(&g);
        cfg.goal_tolerance = 2.0 * cfg.c_s;
        let r = plan_leg(&g, PlanarPoint::new(1.5, 1.5), PlanarPoint::new(8.5, 8.5), &cfg);
        assert!(matches!(r, Err(PlanError::InvalidConfig(_))));
    }

    // A wall with a pocket facing the start traps the greedy planner.
    fn pocket_grid() -> OccupancyGrid2D {
        let n = 30;
        let mut v = vec![0.0; n * n];
        for j in 5..20 {
            v[20 + n * j] = 1.0;
        }
        OccupancyGrid2D::new((n, n), 1.0, PlanarPoint::default(), v).unwrap()
    }

    #[test]
    fn stall_is_detected_with_partial_path() {
        let g = inflate(&pocket_grid(), 1.0, 0.5);
        let cfg = PlannerConfig::for_grid(&g);
        let err = plan_leg(&g, PlanarPoint::new(5.5, 15.2), PlanarPoint::new(26.5, 15.2), &cfg).unwrap_err();
        assert_eq!(err.code(), "StallDetected");
        let partial = err.partial_path().unwrap();
        assert!(partial.waypoints.len() > cfg.stall_window);
        assert!(partial.max_step() <= cfg.c_s + 1e-9);
    }

    #[test]
    fn intermediate_waypoint_escapes_the_pocket() {
        let g = inflate(&pocket_grid(), 1.0, 0.5);
        let mut cfg = PlannerConfig::for_grid(&g);
        cfg.intermediate_waypoints = vec![PlanarPoint::new(22.5, 25.5)];
        let (s, t) = (PlanarPoint::new(5.5, 15.2), PlanarPoint::new(26.5, 15.2));
        let path = plan_path(&g, s, t, &cfg).unwrap();
        assert_eq!(path.waypoints[0], s);
        assert_eq!(*path.waypoints.last().unwrap(), t);
        assert!(path.max_step() <= cfg.c_s + 1e-9);
        let hits = path.waypoints.iter().filter(|&&p| p == cfg.intermediate_waypoints[0]).count();
        assert_eq!(hits, 1);
    }

    #[test]
    fn max_steps_is_enforced() {
        let g = empty(40);
        let mut cfg = PlannerConfig::for_grid(&g);
        cfg.max_steps = 3;
        let err = plan_leg(&g, PlanarPoint::new(1.5, 1.5), PlanarPoint::new(38.5, 38.5), &cfg).unwrap_err();
        assert!(matches!(err, PlanError::MaxStepsExceeded { .. }));
        assert_eq!(err.partial_path().unwrap().waypoints.len(), 4);
    }

    #[test]
    fn no_intermediates_equals_single_leg() {
        let g = inflate(&gen_random((30, 30), 0.05, 2), 1.0, 0.5);
        let cfg = PlannerConfig::for_grid(&g);
        let free: Vec<PlanarPoint> = (0..30)
            .flat_map(|j| (0..30).map(move |i| (i, j)))
            .filter(|&(i, j)| g.get(i, j) == 0.0)
            .map(|(i, j)| g.cell_center(i, j))
            .collect();
        let mut successes = 0;
        for k in 0..20 {
            let (s, t) = (free[k * 7], free[free.len() - 1 - k * 11]);
            match (plan_leg(&g, s, t, &cfg), plan_path(&g, s, t, &cfg)) {
                (Ok(a), Ok(b)) => {
                    assert_eq!(a, b);
                    successes += 1;
                }
                (Err(a), Err(PlanError::Leg { leg: 0, source })) => assert_eq!(a, *source),
                other => panic!("mismatch {other:?}"),
            }
        }
        assert!(successes > 0);
    }

    #[test]
    fn midpoint_junction_appears_once() {
        let g = empty(30);
        let mut cfg = PlannerConfig::for_grid(&g);
        let (s, t) = (PlanarPoint::new(2.5, 2.5), PlanarPoint::new(26.5, 20.5));
        let mid = PlanarPoint::new(14.5, 11.5);
        cfg.intermediate_waypoints = vec![mid];
        let path = plan_path(&g, s, t, &cfg).unwrap();
        assert_eq!(path.waypoints.iter().filter(|&&p| p == mid).count(), 1);
        assert_eq!((path.waypoints[0], *path.waypoints.last().unwrap()), (s, t));
        assert!(path.max_step() <= cfg.c_s + 1e-9);
        // step indices keep counting across legs
        for (k, st) in path.steps.iter().enumerate() {
            assert_eq!(st.index, k + 1);
        }
    }

    #[test]
    fn leg_errors_carry_the_leg_index() {
        let g = inflate(&pocket_grid(), 1.0, 0.5);
        let mut cfg = PlannerConfig::for_grid(&g);
        cfg.intermediate_waypoints = vec![PlanarPoint::new(20.5, 10.5)];
        let err = plan_path(&g, PlanarPoint::new(5.5, 15.2), PlanarPoint::new(26.5, 15.2), &cfg).unwrap_err();
        assert!(matches!(err, PlanError::Leg { leg: 0, .. }));
        assert_eq!(err.code(), "TargetOccupied");
    }

    #[test]
    fn oracle_basic_cases() {
        let g = empty(10);
        assert!(feasibility_oracle(&g, PlanarPoint::new(0.5, 0.5), PlanarPoint::new(9.5, 9.5), 0.5));
        let mut v = vec![0.0; 100];
        for j in 0..10 {
            v[4 + 10 * j] = 1.0;
        }
        let wall = OccupancyGrid2D::new((10, 10), 1.0, PlanarPoint::default(), v).unwrap();
        assert!(!feasibility_oracle(&wall, PlanarPoint::new(0.5, 0.5), PlanarPoint::new(9.5, 9.5), 0.5));
        assert!(feasibility_oracle(&wall, PlanarPoint::new(0.5, 0.5), PlanarPoint::new(3.5, 9.5), 0.5));
    }

    // Union-find over free cells, independent of the BFS above.
    fn union_find_connected(g: &OccupancyGrid2D, a: (usize, usize), b: (usize, usize), thr: f64) -> bool {
        let (nx, ny) = g.size();
        let mut parent: Vec<usize> = (0..nx * ny).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for j in 0..ny {
            for i in 0..nx {
                if g.get(i, j) >= thr {
                    continue;
                }
                if i + 1 < nx && g.get(i + 1, j) < thr {
                    let (x, y) = (find(&mut parent, i + nx * j), find(&mut parent, i + 1 + nx * j));
                    parent[x] = y;
                }
                if j + 1 < ny && g.get(i, j + 1) < thr {
                    let (x, y) = (find(&mut parent, i + nx * j), find(&mut parent, i + nx * (j + 1)));
                    parent[x] = y;
                }
            }
        }
        g.get(a.0, a.1) < thr
            && g.get(b.0, b.1) < thr
            && find(&mut parent, a.0 + nx * a.1) == find(&mut parent, b.0 + nx * b.1)
    }

    #[test]
    fn oracle_matches_union_find() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for seed in 0..40 {
            let g = gen_random((25, 25), 0.35, seed);
            for _ in 0..20 {
                let a = (rng.random_range(0..25), rng.random_range(0..25));
                let b = (rng.random_range(0..25), rng.random_range(0..25));
                let pa = g.cell_center(a.0, a.1);
                let pb = g.cell_center(b.0, b.1);
                assert_eq!(feasibility_oracle(&g, pa, pb, 0.5), union_find_connected(&g, a, b, 0.5));
            }
        }
    }
}
