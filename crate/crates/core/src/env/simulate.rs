use std::fmt;

use super::{Action, EnvError, Episode, FieldSpec, GoalSpec, RobotState};

/// Outcome of replaying an action sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub success: bool,
    pub total_distance: f64,
    pub total_reward: f64,
    pub final_state: RobotState,
    pub steps: u32,
    pub failure: Option<SimFailure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimFailure {
    /// Index of the offending action (or the action count when they ran out).
    pub step: usize,
    pub kind: SimFailureKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimFailureKind {
    Rejected(EnvError),
    StepBudgetExceeded,
    GoalNotReached,
}

impl fmt::Display for SimFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SimFailureKind::Rejected(e) => write!(f, "step {}: {e}", self.step),
            SimFailureKind::StepBudgetExceeded => {
                write!(f, "step {}: step budget exhausted", self.step)
            }
            SimFailureKind::GoalNotReached => {
                write!(f, "actions exhausted after {} steps without reaching the goal", self.step)
            }
        }
    }
}

/// Replays `actions` from `start`. Actions after the goal is reached are ignored.
///
/// Invalid `start`/`goal` are errors; everything that goes wrong while
/// stepping is reported through [`Simulation::failure`].
pub fn simulate(
    field: &FieldSpec,
    start: &RobotState,
    goal: &GoalSpec,
    actions: &[Action],
) -> Result<Simulation, EnvError> {
    simulate_with(field, start, goal, actions, |_, _| {})
}

/// Like [`simulate`], calling `on_step(index, episode)` after every applied action.
pub fn simulate_with(
    field: &FieldSpec,
    start: &RobotState,
    goal: &GoalSpec,
    actions: &[Action],
    mut on_step: impl FnMut(usize, &Episode),
) -> Result<Simulation, EnvError> {
    let mut ep = Episode::new(*field, *start, *goal)?;
    let mut failure = None;
    for (i, action) in actions.iter().enumerate() {
        if ep.is_done() {
            break;
        }
        if ep.steps() >= field.max_steps() {
            failure = Some(SimFailure {
                step: i,
                kind: SimFailureKind::StepBudgetExceeded,
            });
            break;
        }
        if let Err(e) = ep.step(action) {
            failure = Some(SimFailure {
                step: i,
                kind: SimFailureKind::Rejected(e),
            });
            break;
        }
        on_step(i, &ep);
    }
    if failure.is_none() && !ep.is_done() {
        failure = Some(SimFailure {
            step: actions.len(),
            kind: SimFailureKind::GoalNotReached,
        });
    }
    Ok(Simulation {
        success: failure.is_none(),
        total_distance: ep.total_distance(),
        total_reward: ep.total_reward(),
        final_state: *ep.state(),
        steps: ep.steps(),
        failure,
    })
}
