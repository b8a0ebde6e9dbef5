//! Two-stage trajectory planning for a scouting UAV over occupancy grids.
//!
//! The 3D problem is split in two: a greedy, one-step-at-a-time planar
//! planner picks waypoints on the projected and inflated map, then a convex
//! program assigns per-waypoint heights that stay near the scouting altitude
//! under a climb-rate cap. [`mission::plan_mission`] runs the whole pipeline.

pub mod altitude;
pub mod cli;
pub mod grid;
pub mod kernel;
pub mod mission;
pub mod planner;
