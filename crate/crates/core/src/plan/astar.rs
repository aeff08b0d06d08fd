//! A* over an implicit macro graph.
//!
//! Nodes are robot poses restricted to the interesting y values: both
//! headlands, the goal's y and the start's y. Inside a corridor the robot can
//! only drive to either headland or, when already in an approach corridor
//! with the right heading, to the goal. At a headland it can also step to an
//! adjacent corridor or flip heading for free. Turning inside a corridor is
//! never generated.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use crate::env::{goal_configs_unchecked, Action, FieldSpec, GoalConfigs, GoalSpec, RobotState};

use super::{PlanError, PlanRequest, PlanResult, Planner, PlannerId};

#[derive(Debug, Clone, Copy, Default)]
pub struct AStarPlanner;

impl Planner for AStarPlanner {
    fn id(&self) -> PlannerId {
        PlannerId::GraphAStar
    }

    fn plan(&self, req: &PlanRequest) -> Result<PlanResult, PlanError> {
        plan_astar(req)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edge {
    /// Drive along the corridor to `y`, keeping the heading.
    Vertical { to: i32 },
    Lateral { to: u32 },
    Flip,
}

struct Record {
    g: u32,
    parent: Option<(RobotState, Edge)>,
    closed: bool,
}

struct Search<'a> {
    field: &'a FieldSpec,
    goal: &'a GoalSpec,
    goals: GoalConfigs,
}

impl Search<'_> {
    /// Exact remaining distance: lateral offset plus the vertical detour
    /// through a headland whenever the corridor or heading is wrong.
    fn h(&self, s: &RobotState) -> u32 {
        let top = self.field.top();
        let bottom = self.field.bottom();
        let gy = self.goal.y;
        let via = |edge: i32| (s.y - edge).unsigned_abs() + (edge - gy).unsigned_abs();
        self.goals
            .iter()
            .map(|c| {
                let dx = s.corridor.abs_diff(c.corridor);
                let direct = dx == 0
                    && (s.orientation == c.orientation || self.field.is_headland(s.y));
                let dy = if direct {
                    s.y.abs_diff(gy)
                } else {
                    via(top).min(via(bottom))
                };
                dx + dy
            })
            .min()
            .unwrap_or(u32::MAX)
    }

    fn successors(&self, s: &RobotState, out: &mut Vec<(RobotState, Edge, u32)>) {
        out.clear();
        let top = self.field.top();
        let bottom = self.field.bottom();
        let gy = self.goal.y;
        let vertical = |to: i32, out: &mut Vec<_>| {
            if to != s.y {
                out.push((RobotState { y: to, ..*s }, Edge::Vertical { to }, s.y.abs_diff(to)));
            }
        };

        vertical(top, out);
        vertical(bottom, out);
        if self.goals.orientation_in(s.corridor) == Some(s.orientation) {
            vertical(gy, out);
        }
        if self.field.is_headland(s.y) {
            out.push((
                RobotState {
                    orientation: s.orientation.flipped(),
                    ..*s
                },
                Edge::Flip,
                0,
            ));
            if s.corridor > 0 {
                let to = s.corridor - 1;
                out.push((RobotState { corridor: to, ..*s }, Edge::Lateral { to }, 1));
            }
            if s.corridor + 1 < self.field.num_corridors() {
                let to = s.corridor + 1;
                out.push((RobotState { corridor: to, ..*s }, Edge::Lateral { to }, 1));
            }
        }
    }
}

pub fn plan_astar(req: &PlanRequest) -> Result<PlanResult, PlanError> {
    let t0 = Instant::now();
    req.validate()?;
    let search = Search {
        field: &req.field,
        goal: &req.goal,
        goals: goal_configs_unchecked(&req.field, &req.goal),
    };

    let start = req.start;
    let mut records: HashMap<RobotState, Record> = HashMap::new();
    // (f, insertion sequence) keeps equal-f nodes in FIFO order.
    let mut open: BinaryHeap<Reverse<(u32, u64, RobotState)>> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut expansions = 0usize;
    let mut succ = Vec::with_capacity(6);

    records.insert(
        start,
        Record {
            g: 0,
            parent: None,
            closed: false,
        },
    );
    open.push(Reverse((search.h(&start), seq, start)));

    let mut reached = None;
    while let Some(Reverse((_, _, node))) = open.pop() {
        let rec = records.get_mut(&node).expect("queued nodes are recorded");
        if rec.closed {
            continue;
        }
        rec.closed = true;
        let g = rec.g;
        if search.goals.contains(&node) {
            reached = Some(node);
            break;
        }
        expansions += 1;

        search.successors(&node, &mut succ);
        for &(next, edge, cost) in &succ {
            let ng = g + cost;
            match records.entry(next) {
                Entry::Occupied(mut e) => {
                    let r = e.get_mut();
                    if r.closed || ng >= r.g {
                        continue;
                    }
                    r.g = ng;
                    r.parent = Some((node, edge));
                }
                Entry::Vacant(e) => {
                    e.insert(Record {
                        g: ng,
                        parent: Some((node, edge)),
                        closed: false,
                    });
                }
            }
            seq += 1;
            open.push(Reverse((ng + search.h(&next), seq, next)));
        }
    }

    let goal_node = reached.ok_or_else(|| {
        PlanError::Failed(format!("no route from {} to {:?}", req.start, req.goal))
    })?;
    let raw = unit_actions(&records, &start, goal_node);
    let mut result = PlanResult::from_raw(PlannerId::GraphAStar, &start, raw, expansions);
    result.planning_time = t0.elapsed();
    Ok(result)
}

/// Rebuilds the node path and expands it into unit-step actions.
///
/// A run of headland moves becomes one switch action carrying the final
/// heading; a bare flip is folded into the heading of the next vertical step.
fn unit_actions(
    records: &HashMap<RobotState, Record>,
    start: &RobotState,
    goal: RobotState,
) -> Vec<Action> {
    let mut path = Vec::new();
    let mut node = goal;
    while let Some((prev, edge)) = records[&node].parent {
        path.push((prev, edge, node));
        node = prev;
    }
    path.reverse();

    let mut raw = Vec::new();
    let mut corridor = start.corridor;
    let mut i = 0;
    while i < path.len() {
        let (from, edge, to) = path[i];
        match edge {
            Edge::Vertical { to: y } => {
                let dy = (y - from.y).signum();
                let step = Action::vertical(from.orientation, dy);
                raw.extend(std::iter::repeat(step).take(from.y.abs_diff(y) as usize));
                i += 1;
            }
            Edge::Lateral { .. } | Edge::Flip => {
                let mut last = to;
                i += 1;
                while let Some(&(_, Edge::Lateral { .. } | Edge::Flip, next)) = path.get(i) {
                    last = next;
                    i += 1;
                }
                if last.corridor != corridor {
                    raw.push(Action::switch_to(last.orientation, last.corridor));
                    corridor = last.corridor;
                }
            }
        }
    }
    raw
}
