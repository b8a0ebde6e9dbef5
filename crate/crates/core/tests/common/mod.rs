//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use std::collections::VecDeque;

use scout_core::grid::{occupancy_at, OccupancyGrid2D, PlanarPoint, WorldBox};

/// Altitude instance whose every parameter is an integer number of
/// millimeters, so the exact optimum lies on the millimeter lattice.
#[derive(Debug, Clone, Copy)]
pub struct MilliInstance {
    pub n: usize,
    pub h: i64,
    pub c_z: i64,
    pub z_start: i64,
    pub z_end: i64,
    pub z_max: i64,
}

pub fn milli(v: i64) -> f64 {
    v as f64 / 1000.0
}

/// Exhaustive search over every millimeter-lattice height sequence that
/// meets the slope, endpoint and box constraints, by dynamic programming
/// with a sliding-window minimum. Returns the best objective, or `None`
/// when no lattice sequence is feasible.
pub fn lattice_search(inst: &MilliInstance) -> Option<f64> {
    let k = inst.z_max as usize + 1;
    let c = inst.c_z as usize;
    let h = milli(inst.h);
    let cost = |z: usize| {
        let d = milli(z as i64) - h;
        d * d
    };
    let mut best = vec![f64::INFINITY; k];
    best[inst.z_start as usize] = cost(inst.z_start as usize);
    for _ in 1..inst.n {
        let windowed = window_min(&best, c);
        best = (0..k).map(|z| windowed[z] + cost(z)).collect();
    }
    let v = best[inst.z_end as usize];
    v.is_finite().then_some(v)
}

// out[i] = min(v[i - w ..= i + w]), via a monotone deque.
fn window_min(v: &[f64], w: usize) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![f64::INFINITY; n];
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for (i, slot) in out.iter_mut().enumerate() {
        let hi = (i + w).min(n - 1);
        while next <= hi {
            while dq.back().is_some_and(|&b| v[b] >= v[next]) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        while dq.front().is_some_and(|&f| f + w < i) {
            dq.pop_front();
        }
        *slot = v[*dq.front().unwrap()];
    }
    out
}

/// Lowest and highest lattice height reachable at every index by some full
/// feasible lattice sequence, by dilating the reachable sets from both ends.
pub fn lattice_reach(inst: &MilliInstance) -> Option<Vec<(i64, i64)>> {
    let k = inst.z_max as usize + 1;
    let c = inst.c_z as usize;
    let dilate = |set: &[bool]| -> Vec<bool> {
        let mut prefix = vec![0usize; k + 1];
        for z in 0..k {
            prefix[z + 1] = prefix[z] + usize::from(set[z]);
        }
        (0..k).map(|z| prefix[(z + c + 1).min(k)] > prefix[z.saturating_sub(c)]).collect()
    };
    let mut fwd = vec![vec![false; k]; inst.n];
    fwd[0][inst.z_start as usize] = true;
    for t in 1..inst.n {
        fwd[t] = dilate(&fwd[t - 1]);
    }
    let mut bwd = vec![vec![false; k]; inst.n];
    bwd[inst.n - 1][inst.z_end as usize] = true;
    for t in (0..inst.n - 1).rev() {
        bwd[t] = dilate(&bwd[t + 1]);
    }
    (0..inst.n)
        .map(|t| {
            let both: Vec<i64> = (0..k).filter(|&z| fwd[t][z] && bwd[t][z]).map(|z| z as i64).collect();
            Some((*both.first()?, *both.last()?))
        })
        .collect()
}

/// The step objective written out directly from its definition.
pub fn step_value(grid: &OccupancyGrid2D, target: PlanarPoint, w1: f64, w2: f64, d0: f64, p: PlanarPoint) -> f64 {
    let dx = p.x - target.x;
    let dy = p.y - target.y;
    w1 * (dx * dx + dy * dy) / (d0 * d0) + w2 * occupancy_at(grid, p).unwrap()
}

/// `m * m` points covering a disk on a polar lattice that includes the rim,
/// clamped into the box. Clamping toward a box that holds the center never
/// leaves the disk, so every sample is feasible.
pub fn disk_samples(center: PlanarPoint, radius: f64, bounds: &WorldBox, m: usize) -> Vec<PlanarPoint> {
    let mut out = Vec::with_capacity(m * m);
    for a in 0..m {
        let theta = std::f64::consts::TAU * a as f64 / m as f64;
        for r in 0..m {
            let rad = radius * r as f64 / (m - 1) as f64;
            let p = PlanarPoint::new(center.x + rad * theta.cos(), center.y + rad * theta.sin());
            out.push(PlanarPoint::new(
                p.x.clamp(bounds.x_min, bounds.x_max),
                p.y.clamp(bounds.y_min, bounds.y_max),
            ));
        }
    }
    out
}
