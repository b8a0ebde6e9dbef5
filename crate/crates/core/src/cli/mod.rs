//! The `scout` command line.
//!
//! Exit codes: 0 success, 2 usage or validation, 3 file I/O or unreadable
//! input, 4 planning failure, 5 failed trajectory check. Every failure also
//! prints one line `stage=<name> code=<name> detail=<text>` to stderr.

pub mod check;
pub mod config;
pub mod svg;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::altitude::AltitudeError;
use crate::grid::{gen_city_block, gen_random, inflate, load_grid, save_grid, Grid, GridError, PlanarPoint};
use crate::mission::{load_trajectory, plan_mission, save_trajectory, MissionError, MissionSpec, Point3};
use crate::planner::PlanError;
use config::{ConfigError, ConfigFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_PLAN: i32 = 4;
pub const EXIT_CHECK: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "scout", version, about = "Plan UAV scouting trajectories over occupancy grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random planar grid.
    GenRandom {
        #[arg(long, num_args = 2, value_names = ["NX", "NY"], required = true)]
        size: Vec<usize>,
        #[arg(long)]
        density: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a city-block volumetric grid.
    GenCity {
        #[arg(long, num_args = 3, value_names = ["NX", "NY", "NZ"], required = true)]
        size: Vec<usize>,
        #[arg(long)]
        blocks: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan a mission and write its trajectory.
    Plan {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"], required = true, allow_negative_numbers = true)]
        start: Vec<f64>,
        #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"], required = true, allow_negative_numbers = true)]
        target: Vec<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Re-verify a trajectory file against a map.
    Check {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        map: PathBuf,
        /// Defaults to the settings recorded in the trajectory file.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Draw a map, optionally with a trajectory.
    Render {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        traj: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
struct Failure {
    exit: i32,
    stage: &'static str,
    code: &'static str,
    detail: String,
}

impl Failure {
    fn new(exit: i32, stage: &'static str, code: &'static str, detail: impl Into<String>) -> Self {
        Self { exit, stage, code, detail: detail.into() }
    }

    fn usage(stage: &'static str, detail: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, stage, "InvalidArgument", detail)
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (program name first), runs the command, and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            if code != EXIT_OK {
                let first = e.to_string().lines().next().unwrap_or_default().to_string();
                report(&Failure::usage("args", first));
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::GenRandom { size, density, seed, out } => gen_random_cmd(&size, density, seed, &out),
        Command::GenCity { size, blocks, seed, out } => gen_city_cmd(&size, blocks, seed, &out),
        Command::Plan { map, start, target, config, out, svg } => {
            plan_cmd(&map, &start, &target, config.as_deref(), &out, svg.as_deref())
        }
        Command::Check { traj, map, config } => check_cmd(&traj, &map, config.as_deref()),
        Command::Render { map, traj, out } => render_cmd(&map, traj.as_deref(), &out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            report(&f);
            f.exit
        }
    }
}

fn report(f: &Failure) {
    let detail = f.detail.replace(['\n', '\r'], " ");
    eprintln!("stage={} code={} detail={detail}", f.stage, f.code);
}

fn grid_failure(stage: &'static str, e: GridError) -> Failure {
    match e {
        GridError::Io(msg) => Failure::new(EXIT_IO, stage, "Io", msg),
        GridError::MalformedFile(msg) => Failure::new(EXIT_IO, stage, "MalformedFile", msg),
        GridError::PlacementFailed { .. } => Failure::new(EXIT_USAGE, stage, "PlacementFailed", e.to_string()),
        GridError::OutOfBounds { .. } => Failure::new(EXIT_USAGE, stage, "OutOfBounds", e.to_string()),
        GridError::Invalid(msg) => Failure::new(EXIT_USAGE, stage, "InvalidArgument", msg),
    }
}

fn config_failure(e: ConfigError) -> Failure {
    match e {
        ConfigError::Io(msg) => Failure::new(EXIT_IO, "config", "Io", msg),
        ConfigError::Invalid(msg) => Failure::new(EXIT_USAGE, "config", "InvalidConfig", msg),
    }
}

fn mission_failure(e: &MissionError) -> Failure {
    use crate::mission::Failure as M;
    let exit = match &e.failure {
        M::Spec(_) | M::Grid(_) => EXIT_USAGE,
        M::Plan(p) => match innermost(p) {
            PlanError::InvalidConfig(_) | PlanError::OutOfBounds { .. } => EXIT_USAGE,
            _ => EXIT_PLAN,
        },
        M::Altitude(AltitudeError::Invalid(_)) => EXIT_USAGE,
        M::Altitude(_) | M::Misaligned { .. } => EXIT_PLAN,
    };
    Failure::new(exit, e.stage.name(), e.code(), e.failure.to_string())
}

fn innermost(e: &PlanError) -> &PlanError {
    match e {
        PlanError::Leg { source, .. } => innermost(source),
        other => other,
    }
}

fn write_file(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::new(EXIT_IO, "write", "Io", format!("{}: {e}", path.display())))
}

fn gen_random_cmd(size: &[usize], density: f64, seed: u64, out: &Path) -> CmdResult {
    if !(0.0..=1.0).contains(&density) {
        return Err(Failure::usage("args", format!("--density must lie in [0, 1], got {density}")));
    }
    if size.contains(&0) {
        return Err(Failure::usage("args", "--size components must be positive"));
    }
    let grid: Grid = gen_random((size[0], size[1]), density, seed).into();
    save_grid(&grid, out).map_err(|e| grid_failure("write", e))
}

fn gen_city_cmd(size: &[usize], blocks: usize, seed: u64, out: &Path) -> CmdResult {
    if blocks == 0 {
        return Err(Failure::usage("args", "--blocks must be >= 1"));
    }
    let grid = gen_city_block((size[0], size[1], size[2]), blocks, seed).map_err(|e| grid_failure("generate", e))?;
    save_grid(&grid.into(), out).map_err(|e| grid_failure("write", e))
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile, Failure> {
    match path {
        Some(p) => ConfigFile::load(p).map_err(config_failure),
        None => Ok(ConfigFile::default()),
    }
}

#[derive(Serialize)]
struct PartialFile<'a> {
    stage: &'static str,
    code: &'static str,
    path_2d: &'a [PlanarPoint],
    config_echo: &'a MissionSpec,
}

fn plan_cmd(
    map_path: &Path,
    start: &[f64],
    target: &[f64],
    config_path: Option<&Path>,
    out: &Path,
    svg_path: Option<&Path>,
) -> CmdResult {
    let map = load_grid(map_path).map_err(|e| grid_failure("load", e))?;
    let plane = map.to_planar();
    let (planner, altitude) = load_config(config_path)?.resolve(&plane).map_err(config_failure)?;
    let spec = MissionSpec::new(
        Point3::new(start[0], start[1], start[2]),
        Point3::new(target[0], target[1], target[2]),
        planner,
        altitude,
    );
    let outcome = match plan_mission(&map, &spec) {
        Ok(o) => o,
        Err(e) => {
            if let Some(partial) = e.partial_path() {
                let file = PartialFile {
                    stage: e.stage.name(),
                    code: e.code(),
                    path_2d: &partial.waypoints,
                    config_echo: &spec,
                };
                let mut name = out.as_os_str().to_owned();
                name.push(".partial");
                let text = serde_json::to_string_pretty(&file).expect("partial path serializes");
                write_file(Path::new(&name), &text)?;
            }
            return Err(mission_failure(&e));
        }
    };
    for rec in &outcome.log {
        println!("stage={} {}", rec.stage, rec.detail);
    }
    save_trajectory(&outcome.trajectory, &outcome.metrics, &spec, out).map_err(|e| grid_failure("write", e))?;
    if let Some(svg_path) = svg_path {
        let scene = svg::Scene {
            grid: &plane,
            inflated: Some((&outcome.inflated, spec.planner.occupancy_threshold)),
            trajectory: Some(&outcome.trajectory.points),
            altitude_strip: true,
        };
        write_file(svg_path, &svg::render(&scene))?;
    }
    let m = &outcome.metrics;
    println!(
        "waypoints={} length_2d={} length_3d={} max_step_2d={} max_slope={} min_clearance_value={}",
        m.waypoint_count, m.length_2d, m.length_3d, m.max_step_2d, m.max_slope, m.min_clearance_value
    );
    Ok(())
}

fn check_cmd(traj_path: &Path, map_path: &Path, config_path: Option<&Path>) -> CmdResult {
    let saved = load_trajectory(traj_path).map_err(|e| grid_failure("load", e))?;
    let map = load_grid(map_path).map_err(|e| grid_failure("load", e))?;
    let (planner, altitude) = match config_path {
        Some(p) => ConfigFile::load(p)
            .and_then(|c| c.resolve(&map.to_planar()))
            .map_err(config_failure)?,
        None => (saved.spec.planner.clone(), saved.spec.altitude_config()),
    };
    let rows = check::check_trajectory(&saved, &map, &planner, &altitude);
    print!("{}", check::format_table(&rows));
    let failed: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_CHECK, "check", "InvariantViolated", failed.join(",")))
    }
}

fn render_cmd(map_path: &Path, traj_path: Option<&Path>, out: &Path) -> CmdResult {
    let map = load_grid(map_path).map_err(|e| grid_failure("load", e))?;
    let plane = map.to_planar();
    let saved = match traj_path {
        Some(p) => Some(load_trajectory(p).map_err(|e| grid_failure("load", e))?),
        None => None,
    };
    let inflated = saved
        .as_ref()
        .map(|s| (inflate(&plane, s.spec.planner.inflation_radius, s.spec.planner.occupancy_threshold), s.spec.planner.occupancy_threshold));
    let scene = svg::Scene {
        grid: &plane,
        inflated: inflated.as_ref().map(|(g, t)| (g, *t)),
        trajectory: saved.as_ref().map(|s| s.trajectory.points.as_slice()),
        altitude_strip: false,
    };
    write_file(out, &svg::render(&scene))
}
