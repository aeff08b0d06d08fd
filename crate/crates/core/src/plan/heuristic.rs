//! Rule-based planner: exit the start corridor through the cheaper headland,
//! switch to the approach corridor on the start's side of the goal row, and
//! re-enter facing the required way.
//!
//! Vertical travel is independent of heading (the robot drives backward as
//! easily as forward) and headings are free to change at a headland, so the
//! cost separates into a vertical term and a lateral term. Each stage picks the
//! minimum of its own term, which makes the plan optimal.

use std::time::Instant;

use crate::env::{goal_configs_unchecked, Action, FieldSpec, GoalSpec, Orientation, RobotState};

use super::{PlanError, PlanRequest, PlanResult, Planner, PlannerId};

#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicPlanner;

impl Planner for HeuristicPlanner {
    fn id(&self) -> PlannerId {
        PlannerId::Heuristic
    }

    fn plan(&self, req: &PlanRequest) -> Result<PlanResult, PlanError> {
        plan_heuristic(req)
    }
}

pub fn plan_heuristic(req: &PlanRequest) -> Result<PlanResult, PlanError> {
    let t0 = Instant::now();
    req.validate()?;
    let raw = heuristic_actions(&req.field, &req.start, &req.goal);
    let mut result = PlanResult::from_raw(PlannerId::Heuristic, &req.start, raw, 0);
    result.planning_time = t0.elapsed();
    Ok(result)
}

fn heuristic_actions(field: &FieldSpec, start: &RobotState, goal: &GoalSpec) -> Vec<Action> {
    let goals = goal_configs_unchecked(field, goal);
    let mut raw = Vec::with_capacity(2 * field.corridor_len() as usize + 4);
    if goals.contains(start) {
        return raw;
    }

    // Direct approach inside the start corridor. Headings only change at a
    // headland, so either the heading already matches or we stand on one.
    if let Some(required) = goals.orientation_in(start.corridor) {
        if required == start.orientation || field.is_headland(start.y) {
            push_vertical(&mut raw, required, start.y, goal.y);
            return raw;
        }
    }

    // Exit through the headland with the shorter out-and-back; ties go to the top.
    let via = |edge: i32| (start.y - edge).abs() + (edge - goal.y).abs();
    let edge = if via(field.top()) <= via(field.bottom()) {
        field.top()
    } else {
        field.bottom()
    };
    push_vertical(&mut raw, start.orientation, start.y, edge);

    // West approach (index g - 1) when the start lies west of the goal row.
    let target = if start.corridor < goal.row {
        goal.row - 1
    } else {
        goal.row
    };
    let heading = goals
        .orientation_in(target)
        .expect("side rule always selects an existing approach corridor");
    if target != start.corridor {
        raw.push(Action::switch_to(heading, target));
    }
    push_vertical(&mut raw, heading, edge, goal.y);
    raw
}

fn push_vertical(raw: &mut Vec<Action>, heading: Orientation, from: i32, to: i32) {
    let dy = (to - from).signum();
    let step = Action::vertical(heading, dy);
    raw.extend(std::iter::repeat(step).take(from.abs_diff(to) as usize));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{format_actions, oracle_shortest, simulate, Orientation::*};

    fn plan(rows: u32, len: u32, start: RobotState, goal: GoalSpec) -> PlanResult {
        let field = FieldSpec::new(rows, len).unwrap();
        plan_heuristic(&PlanRequest::new(field, start, goal)).unwrap()
    }

    #[test]
    fn turn_around_in_own_corridor() {
        let r = plan(4, 5, RobotState::new(1, 2, Up), GoalSpec::new(2, 4));
        assert_eq!(r.path_length, 4.0);
        assert_eq!(format_actions(&r.raw_actions), "[[0,0],[0,0],[0,0],[1,0]]");
        assert_eq!(format_actions(&r.macro_actions), "[[0,0],[1,0]]");
    }

    #[test]
    fn bottom_exit_and_lateral_switch() {
        // Row 3 is the last row: only its west corridor (2.5, facing down) works.
        let r = plan(4, 5, RobotState::new(0, 0, Up), GoalSpec::new(3, 0));
        assert_eq!(r.path_length, 4.0);
        assert_eq!(format_actions(&r.macro_actions), "[[0,1],[1,4],[1,1]]");
        let f = FieldSpec::new(4, 5).unwrap();
        let sim = simulate(&f, &RobotState::new(0, 0, Up), &GoalSpec::new(3, 0), &r.raw_actions).unwrap();
        assert!(sim.success);
        assert_eq!(sim.final_state, RobotState::new(2, 0, Down));
    }

    #[test]
    fn start_at_goal_is_empty() {
        let r = plan(4, 5, RobotState::new(2, 4, Up), GoalSpec::new(2, 4));
        assert!(r.raw_actions.is_empty());
        assert!(r.macro_actions.is_empty());
        assert_eq!(r.path_length, 0.0);
    }

    #[test]
    fn direct_backward_approach() {
        // Corridor 1.5 facing down serves row 2; goal is above, so reverse up.
        let r = plan(4, 5, RobotState::new(1, 1, Down), GoalSpec::new(2, 3));
        assert_eq!(format_actions(&r.raw_actions), "[[1,1],[1,1]]");
    }

    #[test]
    fn headland_start_turns_for_free() {
        let r = plan(4, 5, RobotState::new(1, 5, Up), GoalSpec::new(2, 3));
        assert_eq!(format_actions(&r.raw_actions), "[[1,0],[1,0]]");
    }

    #[test]
    fn reproduces_deployment_example() {
        let r = plan(10, 10, RobotState::new(0, 5, Up), GoalSpec::new(6, 5));
        assert_eq!(format_actions(&r.macro_actions), "[[0,0],[1,7],[1,0]]");
    }

    #[test]
    fn equal_exits_prefer_top() {
        // From y = 2 in L = 5 to goal y = 2: top costs 3 + 3, bottom 3 + 3.
        let r = plan(4, 5, RobotState::new(0, 2, Up), GoalSpec::new(2, 2));
        assert_eq!(r.raw_actions[0], Action::forward(Up));
    }

    #[test]
    fn matches_oracle_on_small_field() {
        let field = FieldSpec::new(5, 4).unwrap();
        for c in 0..field.num_corridors() {
            for y in -1..=field.top() {
                for o in Orientation::ALL {
                    for g in 0..field.num_rows() {
                        for gy in 0..field.top() {
                            let start = RobotState::new(c, y, o);
                            let goal = GoalSpec::new(g, gy);
                            let r = plan_heuristic(&PlanRequest::new(field, start, goal)).unwrap();
                            let oracle = oracle_shortest(&field, &start, &goal).unwrap();
                            assert_eq!(r.path_length, oracle.distance, "{start} -> {goal:?}");
                        }
                    }
                }
            }
        }
    }
}
