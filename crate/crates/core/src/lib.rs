//! Planning core for sampling-point navigation in row-crop fields.
//!
//! The world is a set of `R` planted rows separated by `R - 1` drivable
//! corridors, each `L` cells long, with a headland strip at both ends where
//! the robot may change corridor or turn around. The sampling arm only reaches
//! the robot's left side, so every goal on a row has (at most) two valid
//! approach configurations.
//!
//! * [`env`] holds the world model, reward function and the exhaustive oracle.
//! * [`plan`] holds the heuristic and implicit-graph A* planners.
//! * [`route`] compiles macro actions into metric waypoints.

pub mod env;
pub mod plan;
pub mod route;

pub use env::{
    Action, EnvError, Episode, FieldSpec, GoalSpec, Movement, Orientation, RobotState,
    StepOutcome,
};
pub use plan::{PlanError, PlanRequest, PlanResult, Planner, PlannerId};
