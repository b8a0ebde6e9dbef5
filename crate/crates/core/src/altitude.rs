//! Height profile along a fixed planar path.
//!
//! Given `n` waypoints, choose heights `z` minimizing `sum (z_t - h)^2`
//! subject to `|z_{t+1} - z_t| <= c_z`, `z_0 = z_start`, `z_{n-1} = z_end`
//! and `0 <= z_t <= z_max`.
//!
//! The slope and endpoint constraints bound each coordinate to a reachable
//! interval `[L_t, U_t]`. Both bounds are `c_z`-Lipschitz in `t`, so clamping
//! the constant `h` into the interval is feasible, and it is coordinatewise
//! optimal, hence globally optimal.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AltitudeError {
    #[error("invalid altitude input: {0}")]
    Invalid(String),
    #[error("no profile of {n} waypoints meets the slope cap: {reason}")]
    Infeasible { n: usize, reason: String },
    #[error("coordinate descent did not converge in {sweeps} sweeps (last change {last_change:e})")]
    MaxSweepsExceeded { sweeps: usize, last_change: f64 },
}

impl AltitudeError {
    pub fn code(&self) -> &'static str {
        match self {
            AltitudeError::Invalid(_) => "InvalidAltitude",
            AltitudeError::Infeasible { .. } => "Infeasible",
            AltitudeError::MaxSweepsExceeded { .. } => "MaxSweepsExceeded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltitudeConfig {
    /// Preferred flight height.
    pub h: f64,
    /// Maximum height change between consecutive waypoints.
    pub c_z: f64,
    pub z_start: f64,
    pub z_end: f64,
    pub z_max: f64,
}

impl AltitudeConfig {
    pub fn validate(&self) -> Result<(), AltitudeError> {
        let all = [self.h, self.c_z, self.z_start, self.z_end, self.z_max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(AltitudeError::Invalid(format!("non-finite parameter in {self:?}")));
        }
        if self.c_z <= 0.0 {
            return Err(AltitudeError::Invalid(format!("c_z must be > 0, got {}", self.c_z)));
        }
        for (name, v) in [("h", self.h), ("z_start", self.z_start), ("z_end", self.z_end)] {
            if !(0.0..=self.z_max).contains(&v) {
                return Err(AltitudeError::Invalid(format!(
                    "{name} = {v} outside [0, z_max = {}]",
                    self.z_max
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltitudeProfile {
    pub heights: Vec<f64>,
}

impl AltitudeProfile {
    pub fn objective(&self, h: f64) -> f64 {
        objective(&self.heights, h)
    }

    pub fn max_slope(&self) -> f64 {
        self.heights.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
    }
}

pub fn objective(heights: &[f64], h: f64) -> f64 {
    heights.iter().map(|z| (z - h) * (z - h)).sum()
}

/// Per-waypoint reachable height bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

// Rounding slack when comparing bounds that should coincide exactly.
const FEAS_TOL: f64 = 1e-9;

pub fn reachable_envelope(n: usize, cfg: &AltitudeConfig) -> Result<Envelope, AltitudeError> {
    if n < 2 {
        return Err(AltitudeError::Invalid(format!("need at least 2 waypoints, got {n}")));
    }
    cfg.validate()?;
    let span = cfg.c_z * (n - 1) as f64;
    if (cfg.z_end - cfg.z_start).abs() > span + FEAS_TOL {
        return Err(AltitudeError::Infeasible {
            n,
            reason: format!(
                "endpoint difference {} exceeds c_z * (n - 1) = {span}",
                (cfg.z_end - cfg.z_start).abs()
            ),
        });
    }
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for t in 0..n {
        let up = cfg.c_z * t as f64;
        let down = cfg.c_z * (n - 1 - t) as f64;
        let l = (cfg.z_start - up).max(cfg.z_end - down).max(0.0);
        let u = (cfg.z_start + up).min(cfg.z_end + down).min(cfg.z_max);
        if l > u + FEAS_TOL {
            return Err(AltitudeError::Infeasible {
                n,
                reason: format!("waypoint {t}: lower bound {l} above upper bound {u}"),
            });
        }
        lower.push(l);
        upper.push(u.max(l));
    }
    Ok(Envelope { lower, upper })
}

/// Optimal profile: `h` clamped into the reachable envelope.
pub fn solve_heights(n: usize, cfg: &AltitudeConfig) -> Result<AltitudeProfile, AltitudeError> {
    let env = reachable_envelope(n, cfg)?;
    let mut heights: Vec<f64> = env
        .lower
        .iter()
        .zip(&env.upper)
        .map(|(&l, &u)| cfg.h.clamp(l, u))
        .collect();
    heights[0] = cfg.z_start;
    heights[n - 1] = cfg.z_end;
    Ok(AltitudeProfile { heights })
}

/// Cyclic coordinate descent on the same problem, started from the straight
/// ramp between the endpoints. Slow but independent of the envelope formula.
pub fn solve_heights_iterative(
    n: usize,
    cfg: &AltitudeConfig,
    tol: f64,
    max_sweeps: usize,
) -> Result<AltitudeProfile, AltitudeError> {
    reachable_envelope(n, cfg)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(AltitudeError::Invalid(format!("tol must be > 0, got {tol}")));
    }
    let last = (n - 1) as f64;
    let mut z: Vec<f64> = (0..n)
        .map(|t| cfg.z_start + (cfg.z_end - cfg.z_start) * t as f64 / last)
        .collect();
    z[n - 1] = cfg.z_end;
    let mut change = f64::INFINITY;
    for _ in 0..max_sweeps {
        change = 0.0;
        for t in 1..n - 1 {
            let lo = (z[t - 1] - cfg.c_z).max(z[t + 1] - cfg.c_z).max(0.0);
            let hi = (z[t - 1] + cfg.c_z).min(z[t + 1] + cfg.c_z).min(cfg.z_max);
            let next = if lo <= hi { cfg.h.clamp(lo, hi) } else { z[t] };
            change = f64::max(change, (next - z[t]).abs());
            z[t] = next;
        }
        if change < tol {
            return Ok(AltitudeProfile { heights: z });
        }
    }
    Err(AltitudeError::MaxSweepsExceeded { sweeps: max_sweeps, last_change: change })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(h: f64, c_z: f64, z_start: f64, z_end: f64, z_max: f64) -> AltitudeConfig {
        AltitudeConfig { h, c_z, z_start, z_end, z_max }
    }

    fn random_feasible(rng: &mut ChaCha8Rng, max_n: usize) -> (usize, AltitudeConfig) {
        loop {
            let n = rng.random_range(2..=max_n);
            let z_max = rng.random_range(1.0..60.0);
            let c = cfg(
                rng.random_range(0.0..=z_max),
                rng.random_range(0.05..5.0),
                rng.random_range(0.0..=z_max),
                rng.random_range(0.0..=z_max),
                z_max,
            );
            if reachable_envelope(n, &c).is_ok() {
                return (n, c);
            }
        }
    }

    #[test]
    fn two_points_pin_everything() {
        let env = reachable_envelope(2, &cfg(10.0, 1.0, 0.0, 0.0, 100.0)).unwrap();
        assert_eq!(env.lower, vec![0.0, 0.0]);
        assert_eq!(env.upper, vec![0.0, 0.0]);
    }

    #[test]
    fn upper_envelope_is_two_ramps() {
        let env = reachable_envelope(11, &cfg(10.0, 1.0, 0.0, 0.0, 1e3)).unwrap();
        assert_eq!(env.upper, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 4.0, 3.0, 2.0, 1.0, 0.0]);
        assert!(env.lower.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(reachable_envelope(1, &cfg(1.0, 1.0, 0.0, 0.0, 5.0)), Err(AltitudeError::Invalid(_))));
        assert!(matches!(reachable_envelope(5, &cfg(1.0, 0.0, 0.0, 0.0, 5.0)), Err(AltitudeError::Invalid(_))));
        assert!(matches!(reachable_envelope(5, &cfg(6.0, 1.0, 0.0, 0.0, 5.0)), Err(AltitudeError::Invalid(_))));
        assert!(matches!(reachable_envelope(5, &cfg(1.0, 1.0, 0.0, 4.5, 5.0)), Err(AltitudeError::Infeasible { .. })));
        assert!(reachable_envelope(5, &cfg(1.0, 1.0, 0.0, 4.0, 5.0)).is_ok());
    }

    #[test]
    fn constant_when_endpoints_sit_at_h() {
        let c = cfg(12.0, 0.5, 12.0, 12.0, 40.0);
        assert_eq!(solve_heights(9, &c).unwrap().heights, vec![12.0; 9]);
        assert_eq!(solve_heights_iterative(9, &c, 1e-12, 1).unwrap().heights, vec![12.0; 9]);
    }

    #[test]
    fn ramp_plateau_descent() {
        let p = solve_heights(200, &cfg(35.0, 1.0, 5.0, 5.0, 100.0)).unwrap().heights;
        for t in 0..=30 {
            assert_eq!(p[t], 5.0 + t as f64);
            assert_eq!(p[199 - t], p[t]);
        }
        assert!(p[30..=169].iter().all(|&z| z == 35.0));
    }

    #[test]
    fn three_points_midpoint_by_exhaustive_search() {
        let c = cfg(10.0, 1.0, 0.0, 0.0, 1e3);
        // The midpoint is free in [0, 1]; scan it finely.
        let best = (0..=100_000)
            .map(|k| k as f64 * 1e-5)
            .min_by(|a, b| objective(&[0.0, *a, 0.0], 10.0).total_cmp(&objective(&[0.0, *b, 0.0], 10.0)))
            .unwrap();
        assert_eq!(best, 1.0);
        assert_eq!(solve_heights_iterative(3, &c, 1e-12, 100).unwrap().heights, vec![0.0, best, 0.0]);
        assert_eq!(solve_heights(3, &c).unwrap().heights, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn closed_form_matches_coordinate_descent() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..500 {
            let (n, c) = random_feasible(&mut rng, 50);
            let a = solve_heights(n, &c).unwrap().heights;
            let b = solve_heights_iterative(n, &c, 1e-13, 100_000).unwrap().heights;
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-6, "n={n} {c:?}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn sweep_budget_is_enforced() {
        let c = cfg(35.0, 1.0, 5.0, 5.0, 100.0);
        let err = solve_heights_iterative(200, &c, 1e-12, 3).unwrap_err();
        assert!(matches!(err, AltitudeError::MaxSweepsExceeded { sweeps: 3, .. }));
    }

    #[test]
    fn envelope_bounds_are_attained() {
        // For each t and each bound, ramp from both endpoints toward the bound
        // as fast as the cap allows; the result must be feasible and hit it.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let (n, c) = random_feasible(&mut rng, 40);
            let env = reachable_envelope(n, &c).unwrap();
            for t in 0..n {
                for target in [env.lower[t], env.upper[t]] {
                    let z: Vec<f64> = (0..n)
                        .map(|s| {
                            let (from, steps) = if s <= t { (c.z_start, s) } else { (c.z_end, n - 1 - s) };
                            let reach = c.c_z * steps as f64;
                            target.clamp(from - reach, from + reach)
                        })
                        .collect();
                    assert_feasible(&z, &c);
                    assert!((z[t] - target).abs() <= 1e-9);
                }
            }
        }
    }

    fn assert_feasible(z: &[f64], c: &AltitudeConfig) {
        assert_eq!(z[0], c.z_start);
        assert_eq!(*z.last().unwrap(), c.z_end);
        for w in z.windows(2) {
            assert!((w[1] - w[0]).abs() <= c.c_z + 1e-9, "{z:?}");
        }
        assert!(z.iter().all(|&v| (0.0..=c.z_max).contains(&v)));
    }

    proptest! {
        #[test]
        fn closed_form_profile_is_feasible(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (n, c) = random_feasible(&mut rng, 300);
            let p = solve_heights(n, &c).unwrap();
            assert_feasible(&p.heights, &c);
        }

        #[test]
        fn plateau_holds_where_h_is_reachable(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (n, c) = random_feasible(&mut rng, 300);
            let env = reachable_envelope(n, &c).unwrap();
            let p = solve_heights(n, &c).unwrap();
            for t in 1..n - 1 {
                if env.lower[t] <= c.h && c.h <= env.upper[t] {
                    prop_assert_eq!(p.heights[t], c.h);
                }
            }
        }

        #[test]
        fn no_feasible_perturbation_improves(seed in any::<u64>(), t_frac in 0.0f64..1.0, delta in -1.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (n, c) = random_feasible(&mut rng, 60);
            let p = solve_heights(n, &c).unwrap();
            let mut q = p.heights.clone();
            let t = ((n - 1) as f64 * t_frac) as usize;
            if t > 0 && t < n - 1 {
                q[t] += delta * c.c_z;
                let ok = (q[t] - q[t - 1]).abs() <= c.c_z && (q[t + 1] - q[t]).abs() <= c.c_z
                    && (0.0..=c.z_max).contains(&q[t]);
                if ok {
                    prop_assert!(objective(&q, c.h) >= p.objective(c.h) - 1e-12);
                }
            }
        }
    }
}
