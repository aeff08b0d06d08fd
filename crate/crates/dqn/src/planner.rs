//! Planner backed by a trained Q-network.

use std::sync::Arc;
use std::time::Instant;

use rowplan_core::env::{simulate, FieldSpec, GoalSpec, RobotState};
use rowplan_core::plan::{dedup, expand_macros, path_length, PlanError, PlanRequest, PlanResult, Planner, PlannerId};
use rowplan_core::route::snap_to_n_sections;

use crate::qnet::QNetwork;
use crate::train::greedy_rollout;

/// Sections per corridor in the training environment.
pub const TRAINING_SECTIONS: u32 = 10;

#[derive(Debug, Clone)]
pub struct DqnPlanner {
    net: Arc<QNetwork>,
}

impl DqnPlanner {
    pub fn new(net: QNetwork) -> Self {
        Self { net: Arc::new(net) }
    }

    pub fn network(&self) -> &QNetwork {
        &self.net
    }
}

impl Planner for DqnPlanner {
    fn id(&self) -> PlannerId {
        PlannerId::Dqn
    }

    fn plan(&self, req: &PlanRequest) -> Result<PlanResult, PlanError> {
        plan_dqn(&self.net, req)
    }
}

/// Maps a cell of an `L`-section corridor onto the `sections`-section one by
/// nearest section centre. Headlands map to headlands.
pub fn snap_y(y: i32, from: &FieldSpec, sections: u32) -> i32 {
    if y == from.bottom() {
        -1
    } else if y == from.top() {
        sections as i32
    } else {
        let frac = (f64::from(y) + 0.5) / f64::from(from.corridor_len());
        snap_to_n_sections(frac, 1.0, sections).expect("interior cell lies inside the corridor") as i32
    }
}

/// Greedy rollout of the network.
///
/// Fields whose corridors are not 10 sections long are snapped onto a
/// 10-section field for the rollout; the resulting macros are then replayed
/// in the real field under move-to-limit semantics. `reached_goal` reflects
/// whether that replay ends at the goal. Running out of steps yields a
/// result with `reached_goal == false`, not an error.
pub fn plan_dqn(net: &QNetwork, req: &PlanRequest) -> Result<PlanResult, PlanError> {
    let t0 = Instant::now();
    req.validate()?;
    let field = req.field;
    if field.num_rows() > net.max_rows() {
        return Err(PlanError::Failed(format!(
            "field has {} rows but the network was sized for {}",
            field.num_rows(),
            net.max_rows()
        )));
    }

    let native = field.corridor_len() == TRAINING_SECTIONS;
    let (sim_field, sim_start, sim_goal) = if native {
        (field, req.start, req.goal)
    } else {
        let sim_field = FieldSpec::new(field.num_rows(), TRAINING_SECTIONS)?;
        let start = RobotState {
            y: snap_y(req.start.y, &field, TRAINING_SECTIONS),
            ..req.start
        };
        let goal = GoalSpec::new(req.goal.row, snap_y(req.goal.y, &field, TRAINING_SECTIONS));
        (sim_field, start, goal)
    };

    let rollout = greedy_rollout(net, &sim_field, &sim_start, &sim_goal).map_err(|e| PlanError::Failed(e.to_string()))?;
    let macros = dedup(&rollout.actions);
    let (raw_actions, reached_goal) = if native {
        (rollout.actions, rollout.reached_goal)
    } else {
        match expand_macros(&field, &req.start, &req.goal, &macros) {
            Ok(raw) => {
                let ok = simulate(&field, &req.start, &req.goal, &raw).is_ok_and(|s| s.success);
                (raw, ok)
            }
            Err(_) => (Vec::new(), false),
        }
    };
    Ok(PlanResult {
        planner: PlannerId::Dqn,
        path_length: path_length(&req.start, &raw_actions),
        raw_actions,
        macro_actions: macros,
        planning_time: t0.elapsed(),
        reached_goal,
        expansions: rollout.evaluations,
    })
}
