//! Config file for `plan` and `check`.
//!
//! A flat JSON object; every key is optional and unknown keys are rejected.
//! Missing values default relative to the map:
//!
//! | key | default |
//! |---|---|
//! | `c_s` | `sqrt(2) * resolution` |
//! | `goal_tolerance` | `c_s` |
//! | `w1_base`, `w2`, `weight_gain` | 1, 5, 4 |
//! | `inflation_radius` | `resolution` |
//! | `occupancy_threshold` | 0.5 |
//! | `max_steps` | `10 * (nx + ny)` |
//! | `stall_window`, `stall_eps` | 15, `0.1 * c_s` |
//! | `intermediate_waypoints` | `[]`, as `[[x, y], ...]` |
//! | `kernel` | object with `max_iterations` 200, `step_init` `c_s`, `armijo_c` 1e-4, `backtrack_factor` 0.5, `grad_tol` 1e-8, `ring_starts` 8 |
//! | `h`, `c_z`, `z_max` | 35, 1, 100 |

use std::path::Path;

use serde::Deserialize;

use crate::altitude::AltitudeConfig;
use crate::grid::{OccupancyGrid2D, PlanarPoint};
use crate::kernel::KernelSettings;
use crate::planner::PlannerConfig;

pub const DEFAULT_H: f64 = 35.0;
pub const DEFAULT_C_Z: f64 = 1.0;
pub const DEFAULT_Z_MAX: f64 = 100.0;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelOverrides {
    pub max_iterations: Option<usize>,
    pub step_init: Option<f64>,
    pub armijo_c: Option<f64>,
    pub backtrack_factor: Option<f64>,
    pub grad_tol: Option<f64>,
    pub ring_starts: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub c_s: Option<f64>,
    pub w1_base: Option<f64>,
    pub w2: Option<f64>,
    pub weight_gain: Option<f64>,
    pub inflation_radius: Option<f64>,
    pub occupancy_threshold: Option<f64>,
    pub goal_tolerance: Option<f64>,
    pub max_steps: Option<usize>,
    pub stall_window: Option<usize>,
    pub stall_eps: Option<f64>,
    pub intermediate_waypoints: Option<Vec<[f64; 2]>>,
    pub kernel: Option<KernelOverrides>,
    pub h: Option<f64>,
    pub c_z: Option<f64>,
    pub z_max: Option<f64>,
}

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Invalid(String),
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Effective planner and altitude settings for `grid`, validated. The
    /// altitude endpoints are left at zero for the mission to fill in.
    pub fn resolve(&self, grid: &OccupancyGrid2D) -> Result<(PlannerConfig, AltitudeConfig), ConfigError> {
        let mut p = PlannerConfig::for_grid(grid);
        if let Some(c_s) = self.c_s {
            p.c_s = c_s;
            p.goal_tolerance = c_s;
            p.stall_eps = 0.1 * c_s;
            p.kernel = KernelSettings::for_radius(c_s);
        }
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.w1_base, self.w1_base);
        set(&mut p.w2, self.w2);
        set(&mut p.weight_gain, self.weight_gain);
        set(&mut p.inflation_radius, self.inflation_radius);
        set(&mut p.occupancy_threshold, self.occupancy_threshold);
        set(&mut p.goal_tolerance, self.goal_tolerance);
        set(&mut p.stall_eps, self.stall_eps);
        p.max_steps = self.max_steps.unwrap_or(p.max_steps);
        p.stall_window = self.stall_window.unwrap_or(p.stall_window);
        if let Some(stops) = &self.intermediate_waypoints {
            p.intermediate_waypoints = stops.iter().map(|&[x, y]| PlanarPoint::new(x, y)).collect();
        }
        if let Some(k) = &self.kernel {
            p.kernel.max_iterations = k.max_iterations.unwrap_or(p.kernel.max_iterations);
            set(&mut p.kernel.step_init, k.step_init);
            set(&mut p.kernel.armijo_c, k.armijo_c);
            set(&mut p.kernel.backtrack_factor, k.backtrack_factor);
            set(&mut p.kernel.grad_tol, k.grad_tol);
            p.kernel.ring_starts = k.ring_starts.unwrap_or(p.kernel.ring_starts);
        }
        p.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;

        let a = AltitudeConfig {
            h: self.h.unwrap_or(DEFAULT_H),
            c_z: self.c_z.unwrap_or(DEFAULT_C_Z),
            z_start: 0.0,
            z_end: 0.0,
            z_max: self.z_max.unwrap_or(DEFAULT_Z_MAX),
        };
        a.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok((p, a))
    }
}
