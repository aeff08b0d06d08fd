use super::{goal_configs_unchecked, Action, EnvError, FieldSpec, GoalSpec, Movement, RobotState};

pub const STEP_PENALTY: f64 = -0.2;
pub const SWITCH_PENALTY_PER_ROW: f64 = -0.2;
pub const TURN_PENALTY: f64 = -1.5;
pub const OSCILLATION_PENALTY: f64 = -1.5;
pub const GOAL_REWARD: f64 = 20.0;
pub const CLOSER_CORRIDOR_BONUS: f64 = 5.0;

/// Itemised reward of a single transition.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RewardParts {
    pub step_penalty: f64,
    pub switch_penalty: f64,
    pub turn_penalty: f64,
    pub oscillation_penalty: f64,
    pub goal_reward: f64,
    pub closer_corridor_bonus: f64,
}

impl RewardParts {
    /// Sum in declaration order. [`StepOutcome::reward`] is defined as this value.
    pub fn total(&self) -> f64 {
        self.step_penalty
            + self.switch_penalty
            + self.turn_penalty
            + self.oscillation_penalty
            + self.goal_reward
            + self.closer_corridor_bonus
    }
}

/// Episode-level information a transition depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepContext {
    /// Corridor the episode started in, for the closer-corridor bonus.
    pub initial_corridor: u32,
    /// Vertical displacement of the previous step, `None` after a switch or at
    /// episode start.
    pub prev_displacement: Option<i32>,
}

impl StepContext {
    pub fn start(start: &RobotState) -> Self {
        Self {
            initial_corridor: start.corridor,
            prev_displacement: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub next_state: RobotState,
    pub reward: f64,
    pub done: bool,
    pub reward_parts: RewardParts,
    /// World units traversed by this step.
    pub distance_delta: f64,
    /// Signed vertical displacement; `None` for corridor switches.
    pub displacement: Option<i32>,
}

/// Applies one action. Pure: the result depends only on the arguments.
pub fn step(
    state: &RobotState,
    action: &Action,
    field: &FieldSpec,
    goal: &GoalSpec,
    ctx: &StepContext,
) -> Result<StepOutcome, EnvError> {
    state.validate(field)?;
    goal.validate(field)?;
    let goals = goal_configs_unchecked(field, goal);
    if goals.contains(state) {
        return Err(EnvError::EpisodeDone);
    }

    let mut parts = RewardParts::default();
    let mut next = *state;
    let at_headland = field.is_headland(state.y);

    // Orientation is applied before the movement.
    if action.orientation != state.orientation && !at_headland {
        parts.turn_penalty = TURN_PENALTY;
    }
    next.orientation = action.orientation;

    let (distance_delta, displacement) = match action.kind() {
        Movement::Forward | Movement::Backward => {
            let dy = action.vertical_dy().expect("vertical move");
            next.y = (state.y + dy).clamp(field.bottom(), field.top());
            let moved = next.y - state.y;
            parts.step_penalty = STEP_PENALTY;
            if moved != 0 && ctx.prev_displacement == Some(-moved) && !at_headland {
                parts.oscillation_penalty = OSCILLATION_PENALTY;
            }
            (f64::from(moved.abs()), Some(moved))
        }
        Movement::Switch { corridor } => {
            if corridor >= field.num_corridors() {
                return Err(EnvError::MalformedAction(format!(
                    "{action}: switch target must be in 2..={}",
                    field.num_rows()
                )));
            }
            if !at_headland {
                return Err(EnvError::IllegalAction {
                    action: *action,
                    y: state.y,
                });
            }
            next.corridor = corridor;
            let rows = f64::from(corridor.abs_diff(state.corridor));
            parts.switch_penalty = SWITCH_PENALTY_PER_ROW * rows;
            (rows, None)
        }
    };

    let done = goals.contains(&next);
    if done {
        parts.goal_reward = GOAL_REWARD;
        let nearest = goals
            .iter()
            .map(|c| c.corridor.abs_diff(ctx.initial_corridor))
            .min()
            .expect("valid goal has an approach corridor");
        if next.corridor.abs_diff(ctx.initial_corridor) == nearest {
            parts.closer_corridor_bonus = CLOSER_CORRIDOR_BONUS;
        }
    }

    Ok(StepOutcome {
        next_state: next,
        reward: parts.total(),
        done,
        reward_parts: parts,
        distance_delta,
        displacement,
    })
}

/// Stateful wrapper threading [`StepContext`] through an episode.
#[derive(Debug, Clone)]
pub struct Episode {
    field: FieldSpec,
    goal: GoalSpec,
    state: RobotState,
    ctx: StepContext,
    steps: u32,
    done: bool,
    total_reward: f64,
    total_distance: f64,
}

impl Episode {
    pub fn new(field: FieldSpec, start: RobotState, goal: GoalSpec) -> Result<Self, EnvError> {
        start.validate(&field)?;
        goal.validate(&field)?;
        let done = goal_configs_unchecked(&field, &goal).contains(&start);
        Ok(Self {
            field,
            goal,
            state: start,
            ctx: StepContext::start(&start),
            steps: 0,
            done,
            total_reward: 0.0,
            total_distance: 0.0,
        })
    }

    pub fn step(&mut self, action: &Action) -> Result<StepOutcome, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeDone);
        }
        let out = step(&self.state, action, &self.field, &self.goal, &self.ctx)?;
        self.state = out.next_state;
        self.ctx.prev_displacement = out.displacement;
        self.steps += 1;
        self.done = out.done;
        self.total_reward += out.reward;
        self.total_distance += out.distance_delta;
        Ok(out)
    }

    pub fn state(&self) -> &RobotState {
        &self.state
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn goal(&self) -> &GoalSpec {
        &self.goal
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Step budget exhausted without reaching the goal.
    pub fn is_truncated(&self) -> bool {
        !self.done && self.steps >= self.field.max_steps()
    }

    pub fn total_reward(&self) -> f64 {
        self.total_reward
    }

    pub fn total_distance(&self) -> f64 {
        self.total_distance
    }
}
