//! Deterministic planners and the shared plan representation.
//!
//! Every planner produces unit-step `raw_actions` that [`crate::env::simulate`]
//! can replay, plus `macro_actions`: the same sequence with runs of identical
//! actions collapsed. A macro is executed "to the limit": a vertical macro
//! keeps moving until it reaches a headland or the goal, a switch macro is a
//! single lateral move.

mod astar;
mod heuristic;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{Action, EnvError, Episode, FieldSpec, GoalSpec, Movement, RobotState};

pub use astar::{plan_astar, AStarPlanner};
pub use heuristic::{plan_heuristic, HeuristicPlanner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerId {
    Heuristic,
    #[serde(rename = "astar")]
    GraphAStar,
    Dqn,
}

impl PlannerId {
    pub fn name(self) -> &'static str {
        match self {
            PlannerId::Heuristic => "heuristic",
            PlannerId::GraphAStar => "astar",
            PlannerId::Dqn => "dqn",
        }
    }
}

impl fmt::Display for PlannerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerId {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "heuristic" => Ok(PlannerId::Heuristic),
            "astar" | "a*" | "graph" => Ok(PlannerId::GraphAStar),
            "dqn" => Ok(PlannerId::Dqn),
            other => Err(PlanError::UnknownPlanner(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("unknown planner `{0}`")]
    UnknownPlanner(String),
    #[error("macro {index} ({action}): {reason}")]
    InvalidMacro {
        index: usize,
        action: Action,
        reason: String,
    },
    #[error("planner failed: {0}")]
    Failed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub field: FieldSpec,
    pub start: RobotState,
    pub goal: GoalSpec,
}

impl PlanRequest {
    pub fn new(field: FieldSpec, start: RobotState, goal: GoalSpec) -> Self {
        Self { field, start, goal }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        self.start.validate(&self.field)?;
        self.goal.validate(&self.field)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub planner: PlannerId,
    pub raw_actions: Vec<Action>,
    pub macro_actions: Vec<Action>,
    /// Corridor units travelled by `raw_actions`.
    pub path_length: f64,
    pub planning_time: Duration,
    /// The planner's own claim; benchmarks verify by simulation instead.
    pub reached_goal: bool,
    /// Search nodes expanded (0 for planners that do not search).
    pub expansions: usize,
}

impl PlanResult {
    pub(crate) fn from_raw(
        planner: PlannerId,
        start: &RobotState,
        raw_actions: Vec<Action>,
        expansions: usize,
    ) -> Self {
        let macro_actions = dedup(&raw_actions);
        let path_length = path_length(start, &raw_actions);
        Self {
            planner,
            raw_actions,
            macro_actions,
            path_length,
            planning_time: Duration::ZERO,
            reached_goal: true,
            expansions,
        }
    }
}

/// Common interface for the heuristic, A* and learned planners.
pub trait Planner: Send + Sync {
    fn id(&self) -> PlannerId;
    fn plan(&self, req: &PlanRequest) -> Result<PlanResult, PlanError>;
}

/// Collapses maximal runs of identical actions, preserving order.
pub fn dedup(raw: &[Action]) -> Vec<Action> {
    let mut out: Vec<Action> = Vec::with_capacity(raw.len().min(8));
    for a in raw {
        if out.last() != Some(a) {
            out.push(*a);
        }
    }
    out
}

/// Geometric length of a unit-step sequence that never clamps against a headland.
pub fn path_length(start: &RobotState, raw: &[Action]) -> f64 {
    let mut corridor = start.corridor;
    let mut total = 0u64;
    for a in raw {
        match a.kind() {
            Movement::Forward | Movement::Backward => total += 1,
            Movement::Switch { corridor: c } => {
                total += u64::from(c.abs_diff(corridor));
                corridor = c;
            }
        }
    }
    total as f64
}

/// Unit steps produced by one macro under move-to-limit semantics.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroRun {
    pub action: Action,
    /// Pose before the first step.
    pub from: RobotState,
    /// Pose after each unit step.
    pub states: Vec<RobotState>,
}

/// Expands macro actions into unit steps under move-to-limit semantics.
///
/// Expansion stops at the goal; a macro that cannot make progress, or macros
/// left over once the goal is reached, are reported as [`PlanError::InvalidMacro`].
pub fn expand_macros(
    field: &FieldSpec,
    start: &RobotState,
    goal: &GoalSpec,
    macros: &[Action],
) -> Result<Vec<Action>, PlanError> {
    Ok(expand_macro_runs(field, start, goal, macros)?
        .iter()
        .flat_map(|run| std::iter::repeat(run.action).take(run.states.len()))
        .collect())
}

/// Per-macro expansion, keeping the intermediate poses.
pub fn expand_macro_runs(
    field: &FieldSpec,
    start: &RobotState,
    goal: &GoalSpec,
    macros: &[Action],
) -> Result<Vec<MacroRun>, PlanError> {
    let mut ep = Episode::new(*field, *start, *goal)?;
    let mut runs = Vec::with_capacity(macros.len());
    let invalid = |index: usize, action: Action, reason: String| PlanError::InvalidMacro {
        index,
        action,
        reason,
    };

    for (index, &action) in macros.iter().enumerate() {
        if ep.is_done() {
            return Err(invalid(index, action, "goal already reached".into()));
        }
        let mut run = MacroRun {
            action,
            from: *ep.state(),
            states: Vec::new(),
        };
        match action.kind() {
            Movement::Switch { .. } => {
                let out = ep.step(&action).map_err(|e| invalid(index, action, e.to_string()))?;
                run.states.push(out.next_state);
            }
            Movement::Forward | Movement::Backward => {
                let dy = action.vertical_dy().expect("vertical");
                let y = ep.state().y;
                if (dy > 0 && y == field.top()) || (dy < 0 && y == field.bottom()) {
                    return Err(invalid(index, action, "already at the corridor end".into()));
                }
                loop {
                    if ep.steps() >= field.max_steps() {
                        return Err(invalid(index, action, "step budget exhausted".into()));
                    }
                    let out = ep.step(&action).map_err(|e| invalid(index, action, e.to_string()))?;
                    run.states.push(out.next_state);
                    if out.done || field.is_headland(out.next_state.y) {
                        break;
                    }
                }
            }
        }
        runs.push(run);
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{simulate, Orientation::*};

    fn act(o: u32, m: u32) -> Action {
        Action::from_codes(o, m).unwrap()
    }

    #[test]
    fn dedup_collapses_runs() {
        let raw = [act(0, 0), act(0, 0), act(0, 0), act(1, 0)];
        assert_eq!(dedup(&raw), vec![act(0, 0), act(1, 0)]);
        assert!(dedup(&[]).is_empty());
        let fig = [act(0, 0), act(1, 7), act(1, 7), act(1, 0)];
        assert_eq!(dedup(&fig), vec![act(0, 0), act(1, 7), act(1, 0)]);
    }

    #[test]
    fn dedup_keeps_non_adjacent_repeats() {
        let raw = [act(0, 0), act(1, 0), act(0, 0)];
        assert_eq!(dedup(&raw), raw.to_vec());
    }

    #[test]
    fn planner_ids_parse() {
        assert_eq!("A*".parse::<PlannerId>().unwrap(), PlannerId::GraphAStar);
        assert_eq!("heuristic".parse::<PlannerId>().unwrap(), PlannerId::Heuristic);
        assert!("rrt".parse::<PlannerId>().is_err());
        assert_eq!(serde_json::to_string(&PlannerId::GraphAStar).unwrap(), "\"astar\"");
    }

    #[test]
    fn macro_expansion_runs_to_limits() {
        let f = FieldSpec::new(10, 10).unwrap();
        let start = RobotState::new(0, 5, Up);
        let goal = GoalSpec::new(6, 5);
        let macros = [act(0, 0), act(1, 7), act(1, 0)];
        let raw = expand_macros(&f, &start, &goal, &macros).unwrap();
        // 5 up to the top headland, one switch, 5 down to the goal.
        assert_eq!(raw.len(), 11);
        assert_eq!(dedup(&raw), macros.to_vec());
        let sim = simulate(&f, &start, &goal, &raw).unwrap();
        assert!(sim.success);
        assert_eq!(sim.final_state, RobotState::new(5, 5, Down));
    }

    #[test]
    fn macro_without_progress_is_rejected() {
        let f = FieldSpec::new(4, 5).unwrap();
        let start = RobotState::new(0, 5, Up);
        let err = expand_macros(&f, &start, &GoalSpec::new(3, 0), &[act(0, 0)]).unwrap_err();
        assert!(matches!(err, PlanError::InvalidMacro { index: 0, .. }));
    }

    #[test]
    fn macro_switch_in_corridor_is_rejected() {
        let f = FieldSpec::new(4, 5).unwrap();
        let start = RobotState::new(0, 2, Up);
        let err = expand_macros(&f, &start, &GoalSpec::new(3, 0), &[act(0, 3)]).unwrap_err();
        assert!(matches!(err, PlanError::InvalidMacro { index: 0, .. }));
    }

    #[test]
    fn path_length_counts_lateral_rows() {
        let start = RobotState::new(0, 0, Up);
        let raw = [act(0, 1), act(0, 4), act(1, 1)];
        assert_eq!(path_length(&start, &raw), 4.0);
    }
}
