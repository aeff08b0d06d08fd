//! Discrete crop-row world: states, transitions, rewards and ground truth.

mod dynamics;
mod observe;
mod oracle;
mod simulate;
mod types;

use thiserror::Error;

pub use dynamics::{
    step, Episode, RewardParts, StepContext, StepOutcome, CLOSER_CORRIDOR_BONUS, GOAL_REWARD,
    OSCILLATION_PENALTY, STEP_PENALTY, SWITCH_PENALTY_PER_ROW, TURN_PENALTY,
};
pub use observe::{observe, OBS_DIM};
pub use oracle::{oracle_path, oracle_shortest, OracleResult};
pub use simulate::{simulate, simulate_with, SimFailure, SimFailureKind, Simulation};
pub use types::{
    corridor_index, format_actions, parse_actions, Action, FieldSpec, GoalSpec, Movement,
    Orientation, RobotState,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid goal: {0}")]
    InvalidGoal(String),
    #[error("malformed action: {0}")]
    MalformedAction(String),
    #[error("illegal action {action}: corridor switch requested at y = {y}, away from a headland")]
    IllegalAction { action: Action, y: i32 },
    #[error("episode already finished")]
    EpisodeDone,
}

/// The (at most two) configurations from which a goal is inside the work zone.
///
/// The arm reaches the left side only, so a row is sampled from its east
/// corridor while facing up or from its west corridor while facing down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoalConfigs {
    configs: [Option<RobotState>; 2],
}

impl GoalConfigs {
    pub fn iter(&self) -> impl Iterator<Item = RobotState> + '_ {
        self.configs.iter().flatten().copied()
    }

    pub fn contains(&self, state: &RobotState) -> bool {
        self.configs.iter().flatten().any(|c| c == state)
    }

    pub fn len(&self) -> usize {
        self.configs.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Required heading when approaching through `corridor`, if it is an
    /// approach corridor at all.
    pub fn orientation_in(&self, corridor: u32) -> Option<Orientation> {
        self.iter()
            .find(|c| c.corridor == corridor)
            .map(|c| c.orientation)
    }
}

/// Goal configurations, east approach first.
pub fn goal_configs(field: &FieldSpec, goal: &GoalSpec) -> Result<GoalConfigs, EnvError> {
    goal.validate(field)?;
    Ok(goal_configs_unchecked(field, goal))
}

pub(crate) fn goal_configs_unchecked(field: &FieldSpec, goal: &GoalSpec) -> GoalConfigs {
    // East corridor of row g has index g, west corridor has index g - 1.
    let east = (goal.row < field.num_corridors())
        .then(|| RobotState::new(goal.row, goal.y, Orientation::Up));
    let west = (goal.row >= 1).then(|| RobotState::new(goal.row - 1, goal.y, Orientation::Down));
    GoalConfigs {
        configs: [east, west],
    }
}

pub fn is_goal(state: &RobotState, field: &FieldSpec, goal: &GoalSpec) -> bool {
    goal_configs_unchecked(field, goal).contains(state)
}
