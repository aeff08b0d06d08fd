use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rowplan_core::env::{GoalSpec, Orientation, RobotState};
use rowplan_core::plan::PlannerId;
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "rowplan", version, about = "Path planning between crop rows")]
pub struct Cli {
    /// Seed for instance generation and training.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for report, log and waypoint files.
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
    /// Machine-readable output format; plain text when omitted.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Geojson,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Plan one instance and print the macro actions.
    Plan(PlanArgs),
    /// Run the seeded benchmark and write the report files.
    Bench(BenchArgs),
    /// Train the Q-network over a row curriculum.
    Train(TrainArgs),
    /// Replay an action sequence with a per-step rendering.
    Simulate(SimulateArgs),
    /// Compile a plan into metric waypoints.
    Export(ExportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct InstanceArgs {
    #[arg(long)]
    pub rows: u32,
    #[arg(long)]
    pub len: u32,
    /// Start pose `corridor_x,y,orientation`, e.g. `1.5,2,0` (orientation 0/up or 1/down).
    #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
    pub start: RobotState,
    /// Goal `row,y`.
    #[arg(long, value_parser = parse_goal)]
    pub goal: GoalSpec,
}

#[derive(Debug, Args, Serialize)]
pub struct PlanArgs {
    #[arg(long, value_parser = parse_planner)]
    pub planner: PlannerId,
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Checkpoint for the dqn planner.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    /// Comma-separated planner names.
    #[arg(long, value_delimiter = ',', value_parser = parse_planner, default_value = "heuristic,astar")]
    pub planners: Vec<PlannerId>,
    /// Instances (per field size with --scaling); 10000, or 1000 per size.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 65)]
    pub rows: u32,
    #[arg(long, default_value_t = 10)]
    pub len: u32,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Comma-separated row counts for a scaling sweep instead of a single benchmark.
    #[arg(long, value_delimiter = ',')]
    pub scaling: Option<Vec<u32>>,
    /// Timed calls per instance; the median is recorded.
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 1)]
    pub warmup: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// Row schedule: `5..65:5`, a comma list or a single count.
    #[arg(long, default_value = "5")]
    pub stages: String,
    /// Environment steps per stage.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Checkpoint path to write.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON file with training hyperparameters; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Greedy evaluation episodes after each stage (0 to skip).
    #[arg(long, default_value_t = 0)]
    pub eval_episodes: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Actions as `[[o,m],...]`, or `@file` to read them from a file.
    #[arg(long)]
    pub actions: String,
}

#[derive(Debug, Args, Serialize)]
pub struct ExportArgs {
    /// JSON written by `plan --format json`.
    #[arg(long)]
    pub plan_json: PathBuf,
    /// Field geometry file (`key = value` lines).
    #[arg(long)]
    pub geometry: PathBuf,
}

fn parse_planner(s: &str) -> Result<PlannerId, String> {
    s.parse().map_err(|e: rowplan_core::PlanError| e.to_string())
}

fn parse_orientation(s: &str) -> Result<Orientation, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "0" | "up" => Ok(Orientation::Up),
        "1" | "down" => Ok(Orientation::Down),
        other => Err(format!("orientation must be 0/up or 1/down, got `{other}`")),
    }
}

pub fn parse_state(s: &str) -> Result<RobotState, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [x, y, o] = parts[..] else {
        return Err(format!("expected `corridor_x,y,orientation`, got `{s}`"));
    };
    let x: f64 = x.parse().map_err(|_| format!("bad corridor_x `{x}`"))?;
    let y: i32 = y.parse().map_err(|_| format!("bad y `{y}`"))?;
    RobotState::from_corridor_x(x, y, parse_orientation(o)?).map_err(|e| e.to_string())
}

pub fn parse_goal(s: &str) -> Result<GoalSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [g, y] = parts[..] else {
        return Err(format!("expected `row,y`, got `{s}`"));
    };
    let g: u32 = g.parse().map_err(|_| format!("bad goal row `{g}`"))?;
    let y: i32 = y.parse().map_err(|_| format!("bad goal y `{y}`"))?;
    Ok(GoalSpec::new(g, y))
}
