//! Minimization of a smooth planar field over a disk intersected with a box.
//!
//! This is the per-step subproblem of the waypoint planner: the disk is the
//! step cap around the current position and the box is the environment
//! boundary. The solver is projected gradient descent with Armijo
//! backtracking, restarted from several points, with the best feasible
//! result kept.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{PlanarPoint, WorldBox};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid kernel settings: {0}")]
    InvalidSettings(String),
    #[error("objective is not finite at ({x}, {y})")]
    NonFiniteObjective { x: f64, y: f64 },
}

/// A scalar field with an analytic gradient.
///
/// Implementations must be deterministic and free of side effects; the solver
/// relies on re-evaluation returning the same value.
pub trait ObjectiveField {
    fn eval(&self, p: PlanarPoint) -> f64;

    fn grad(&self, p: PlanarPoint) -> PlanarPoint;

    /// Unconstrained minimizer of the field's quadratic term, if it has one.
    /// Its feasible projection is used as an extra start.
    fn quadratic_minimizer(&self) -> Option<PlanarPoint> {
        None
    }

    /// Additional start points the field knows to be basin candidates
    /// (for a gridded field, its lattice nodes). Infeasible points are
    /// projected into the region.
    fn candidate_starts(&self, _region: &DiskBoxRegion) -> Vec<PlanarPoint> {
        Vec::new()
    }
}

/// Field assembled from closures, mostly for tests and ad-hoc objectives.
pub struct FnField<E, G> {
    pub eval: E,
    pub grad: G,
    pub minimizer: Option<PlanarPoint>,
}

impl<E, G> FnField<E, G>
where
    E: Fn(PlanarPoint) -> f64,
    G: Fn(PlanarPoint) -> PlanarPoint,
{
    pub fn new(eval: E, grad: G) -> Self {
        Self { eval, grad, minimizer: None }
    }

    pub fn with_minimizer(mut self, p: PlanarPoint) -> Self {
        self.minimizer = Some(p);
        self
    }
}

impl<E, G> ObjectiveField for FnField<E, G>
where
    E: Fn(PlanarPoint) -> f64,
    G: Fn(PlanarPoint) -> PlanarPoint,
{
    fn eval(&self, p: PlanarPoint) -> f64 {
        (self.eval)(p)
    }

    fn grad(&self, p: PlanarPoint) -> PlanarPoint {
        (self.grad)(p)
    }

    fn quadratic_minimizer(&self) -> Option<PlanarPoint> {
        self.minimizer
    }
}

/// Feasible set of one planning step: `{p : |p - center| <= radius} ∩ box`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskBoxRegion {
    center: PlanarPoint,
    radius: f64,
    bounds: WorldBox,
}

impl DiskBoxRegion {
    pub fn new(center: PlanarPoint, radius: f64, bounds: WorldBox) -> Result<Self, KernelError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(KernelError::InvalidRegion(format!("radius must be finite and > 0, got {radius}")));
        }
        if !(bounds.x_min < bounds.x_max && bounds.y_min < bounds.y_max) {
            return Err(KernelError::InvalidRegion(format!("degenerate box {bounds:?}")));
        }
        if !center.is_finite() || !bounds.contains(center) {
            return Err(KernelError::InvalidRegion(format!("center {center} is outside the box")));
        }
        Ok(Self { center, radius, bounds })
    }

    pub fn center(&self) -> PlanarPoint {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn bounds(&self) -> WorldBox {
        self.bounds
    }

    fn in_disk(&self, p: PlanarPoint) -> bool {
        (p - self.center).norm_sq() <= self.radius * self.radius
    }

    pub fn contains(&self, p: PlanarPoint, tol: f64) -> bool {
        let b = self.bounds;
        (p - self.center).norm() <= self.radius + tol
            && p.x >= b.x_min - tol
            && p.x <= b.x_max + tol
            && p.y >= b.y_min - tol
            && p.y <= b.y_max + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSettings {
    pub max_iterations: usize,
    /// Length in meters of the first trial move along the descent direction.
    pub step_init: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub grad_tol: f64,
    pub ring_starts: usize,
}

impl KernelSettings {
    /// Defaults for a step region of the given radius.
    pub fn for_radius(radius: f64) -> Self {
        Self {
            max_iterations: 200,
            step_init: radius,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            grad_tol: 1e-8,
            ring_starts: 8,
        }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        let bad = |msg: &str| Err(KernelError::InvalidSettings(msg.to_string()));
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.step_init.is_finite() && self.step_init > 0.0) {
            return bad("step_init must be finite and positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        if !(self.grad_tol.is_finite() && self.grad_tol > 0.0) {
            return bad("grad_tol must be finite and positive");
        }
        if self.ring_starts == 0 {
            return bad("ring_starts must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub argmin: PlanarPoint,
    pub value: f64,
    /// Iterations used by the winning start.
    pub iterations: usize,
    /// Whether the winning start met a stationarity test before the cap.
    pub converged: bool,
    pub starts_tried: usize,
}

/// Euclidean projection onto the region.
///
/// The nearest point of a disk-box intersection lies at `p` itself, on the
/// circle (radial projection), on a box edge clipped to the disk, or at a
/// box corner; every case is enumerated and the closest feasible candidate
/// wins.
pub fn project_feasible(p: PlanarPoint, region: &DiskBoxRegion) -> PlanarPoint {
    let b = region.bounds;
    if region.in_disk(p) && b.contains(p) {
        return p;
    }
    let c = region.center;
    let r = region.radius;
    let mut best = c;
    let mut best_d = (p - c).norm_sq();
    let mut offer = |q: PlanarPoint| {
        let d = (p - q).norm_sq();
        if d < best_d {
            best = q;
            best_d = d;
        }
    };

    let off = p - c;
    let radial = c + off * (r / off.norm());
    if b.contains(radial) {
        offer(radial);
    }
    let clamped = b.clamp(p);
    if region.in_disk(clamped) {
        offer(clamped);
    }
    let corners = [
        PlanarPoint::new(b.x_min, b.y_min),
        PlanarPoint::new(b.x_max, b.y_min),
        PlanarPoint::new(b.x_max, b.y_max),
        PlanarPoint::new(b.x_min, b.y_max),
    ];
    for e in 0..4 {
        let (a, q) = (corners[e], corners[(e + 1) % 4]);
        if let Some(s) = nearest_on_chord(a, q, c, r, p) {
            offer(b.clamp(a + (q - a) * s));
        }
    }
    best
}

/// Parameter of the point on segment `a..b`, restricted to the disk, that is
/// nearest to `p`. `None` when the segment misses the disk.
fn nearest_on_chord(a: PlanarPoint, b: PlanarPoint, c: PlanarPoint, r: f64, p: PlanarPoint) -> Option<f64> {
    let dir = b - a;
    let qa = dir.norm_sq();
    let qb = 2.0 * (a - c).dot(dir);
    let qc = (a - c).norm_sq() - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let lo = ((-qb - root) / (2.0 * qa)).max(0.0);
    let hi = ((-qb + root) / (2.0 * qa)).min(1.0);
    if lo > hi {
        return None;
    }
    Some(((p - a).dot(dir) / qa).clamp(lo, hi))
}

struct Run {
    point: PlanarPoint,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn checked_eval<F: ObjectiveField + ?Sized>(field: &F, p: PlanarPoint) -> Result<f64, KernelError> {
    let v = field.eval(p);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(KernelError::NonFiniteObjective { x: p.x, y: p.y })
    }
}

/// Backtracking search along `-dir` from `x`. `None` when no trial step of at
/// least `min_step` meters satisfies the sufficient-decrease test.
#[allow(clippy::too_many_arguments)]
fn armijo_step<F: ObjectiveField + ?Sized>(
    field: &F,
    region: &DiskBoxRegion,
    settings: &KernelSettings,
    x: PlanarPoint,
    fx: f64,
    g: PlanarPoint,
    dir: PlanarPoint,
    min_step: f64,
) -> Result<Option<(PlanarPoint, f64)>, KernelError> {
    let mut t = settings.step_init;
    while t >= min_step {
        let y = project_feasible(x - dir * t, region);
        if y == x {
            // the direction points straight out of the feasible set
            return Ok(None);
        }
        let fy = checked_eval(field, y)?;
        if fy <= fx + settings.armijo_c * g.dot(y - x) {
            return Ok(Some((y, fy)));
        }
        t *= settings.backtrack_factor;
    }
    Ok(None)
}

fn descend<F: ObjectiveField + ?Sized>(
    field: &F,
    region: &DiskBoxRegion,
    settings: &KernelSettings,
    start: PlanarPoint,
) -> Result<Run, KernelError> {
    let min_step = settings.step_init * 1e-13;
    let mut x = start;
    let mut fx = checked_eval(field, x)?;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < settings.max_iterations {
        iterations += 1;
        let g = field.grad(x);
        let gn = g.norm();
        if !gn.is_finite() {
            break;
        }
        if gn <= settings.grad_tol {
            converged = true;
            break;
        }
        // Bilinear occupancy has axis-aligned seams where the full gradient
        // step stalls on a valley floor. The single-axis components slide
        // along such seams, so all three directions are searched and the
        // lowest accepted trial wins (earliest on ties).
        let directions = [g, PlanarPoint::new(g.x, 0.0), PlanarPoint::new(0.0, g.y)];
        let mut accepted: Option<(PlanarPoint, f64)> = None;
        for d in directions {
            let dn = d.norm();
            if dn <= settings.grad_tol {
                continue;
            }
            if let Some((y, fy)) = armijo_step(field, region, settings, x, fx, g, d * (1.0 / dn), min_step)? {
                if accepted.is_none_or(|(_, best)| fy < best) {
                    accepted = Some((y, fy));
                }
            }
        }
        match accepted {
            Some((y, fy)) => {
                x = y;
                fx = fy;
            }
            None => {
                converged = true;
                break;
            }
        }
    }
    Ok(Run { point: x, value: fx, iterations, converged })
}

/// Multi-start projected gradient descent.
///
/// Starts, in order: the region center, `ring_starts` points evenly spaced on
/// the disk boundary (projected into the box), the projection of the
/// field's quadratic minimizer when it provides one, then any candidate
/// starts the field offers. The lowest final value
/// wins; exact ties go to the earliest start. Because the center is a start
/// and every run is monotone, the result never exceeds `eval(center)`.
pub fn minimize<F: ObjectiveField + ?Sized>(
    field: &F,
    region: &DiskBoxRegion,
    settings: &KernelSettings,
) -> Result<SolveReport, KernelError> {
    settings.validate()?;
    let c = region.center;
    let mut starts = Vec::with_capacity(settings.ring_starts + 2);
    starts.push(c);
    for k in 0..settings.ring_starts {
        let theta = std::f64::consts::TAU * k as f64 / settings.ring_starts as f64;
        let on_ring = c + PlanarPoint::new(theta.cos(), theta.sin()) * region.radius;
        starts.push(project_feasible(on_ring, region));
    }
    if let Some(m) = field.quadratic_minimizer() {
        if m.is_finite() {
            starts.push(project_feasible(m, region));
        }
    }
    starts.extend(
        field
            .candidate_starts(region)
            .into_iter()
            .filter(|p| p.is_finite())
            .map(|p| project_feasible(p, region)),
    );

    let mut best: Option<Run> = None;
    for &s in &starts {
        let run = descend(field, region, settings, s)?;
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least the center is tried");
    Ok(SolveReport {
        argmin: best.point,
        value: best.value,
        iterations: best.iterations,
        converged: best.converged,
        starts_tried: starts.len(),
    })
}

/// Relative disagreement between the analytic gradient and a central
/// difference with step `h`: `|g - fd| / max(1, |g|)`.
pub fn gradient_check<F: ObjectiveField + ?Sized>(field: &F, p: PlanarPoint, h: f64) -> f64 {
    let ex = PlanarPoint::new(h, 0.0);
    let ey = PlanarPoint::new(0.0, h);
    let fd = PlanarPoint::new(
        (field.eval(p + ex) - field.eval(p - ex)) / (2.0 * h),
        (field.eval(p + ey) - field.eval(p - ey)) / (2.0 * h),
    );
    let g = field.grad(p);
    (g - fd).norm() / g.norm().max(1.0)
}
