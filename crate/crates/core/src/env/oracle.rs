//! Exhaustive shortest-path oracle over the full unit state graph.
//!
//! Edges: unit vertical moves (cost 1, either heading), lateral moves between
//! adjacent corridors at a headland (cost 1) and orientation flips at a
//! headland (cost 0). In-corridor flips are excluded. With 0/1 weights a
//! deque-based BFS is exact.

use std::collections::VecDeque;

use super::{goal_configs_unchecked, Action, EnvError, FieldSpec, GoalSpec, Orientation, RobotState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub distance: f64,
    pub exists: bool,
}

struct Graph {
    field: FieldSpec,
    height: usize,
}

impl Graph {
    fn new(field: FieldSpec) -> Self {
        Self {
            field,
            height: field.corridor_len() as usize + 2,
        }
    }

    fn index(&self, s: &RobotState) -> usize {
        ((s.corridor as usize * self.height) + (s.y + 1) as usize) * 2 + s.orientation.code() as usize
    }

    fn state(&self, idx: usize) -> RobotState {
        let o = if idx % 2 == 0 { Orientation::Up } else { Orientation::Down };
        let cell = idx / 2;
        RobotState::new(
            (cell / self.height) as u32,
            (cell % self.height) as i32 - 1,
            o,
        )
    }

    /// Successors as `(state, cost, action)`; flips carry no action of their own.
    fn successors(&self, s: &RobotState, out: &mut Vec<(RobotState, u32, Option<Action>)>) {
        out.clear();
        for dy in [1, -1] {
            let y = s.y + dy;
            if (-1..=self.field.top()).contains(&y) {
                out.push((
                    RobotState { y, ..*s },
                    1,
                    Some(Action::vertical(s.orientation, dy)),
                ));
            }
        }
        if self.field.is_headland(s.y) {
            out.push((
                RobotState {
                    orientation: s.orientation.flipped(),
                    ..*s
                },
                0,
                None,
            ));
            if s.corridor > 0 {
                let c = s.corridor - 1;
                out.push((
                    RobotState { corridor: c, ..*s },
                    1,
                    Some(Action::switch_to(s.orientation, c)),
                ));
            }
            if s.corridor + 1 < self.field.num_corridors() {
                let c = s.corridor + 1;
                out.push((
                    RobotState { corridor: c, ..*s },
                    1,
                    Some(Action::switch_to(s.orientation, c)),
                ));
            }
        }
    }
}

/// Minimal travel distance from `start` to any goal configuration.
pub fn oracle_shortest(
    field: &FieldSpec,
    start: &RobotState,
    goal: &GoalSpec,
) -> Result<OracleResult, EnvError> {
    Ok(match search(field, start, goal)? {
        Some((d, _)) => OracleResult {
            distance: f64::from(d),
            exists: true,
        },
        None => OracleResult {
            distance: f64::INFINITY,
            exists: false,
        },
    })
}

/// Shortest distance together with a unit-step action sequence realising it.
pub fn oracle_path(
    field: &FieldSpec,
    start: &RobotState,
    goal: &GoalSpec,
) -> Result<Option<(u32, Vec<Action>)>, EnvError> {
    search(field, start, goal)
}

fn search(
    field: &FieldSpec,
    start: &RobotState,
    goal: &GoalSpec,
) -> Result<Option<(u32, Vec<Action>)>, EnvError> {
    start.validate(field)?;
    goal.validate(field)?;
    let goals = goal_configs_unchecked(field, goal);
    if goals.is_empty() {
        return Ok(None);
    }

    let graph = Graph::new(*field);
    let n = field.num_states();
    let mut dist = vec![u32::MAX; n];
    let mut parent: Vec<Option<(usize, Option<Action>)>> = vec![None; n];
    let mut deque = VecDeque::new();
    let mut succ = Vec::with_capacity(5);

    let s0 = graph.index(start);
    dist[s0] = 0;
    deque.push_back(s0);

    while let Some(u) = deque.pop_front() {
        let state = graph.state(u);
        let du = dist[u];
        if goals.contains(&state) {
            return Ok(Some((du, reconstruct(&parent, u))));
        }
        graph.successors(&state, &mut succ);
        for &(next, cost, action) in &succ {
            let v = graph.index(&next);
            let dv = du + cost;
            if dv < dist[v] {
                dist[v] = dv;
                parent[v] = Some((u, action));
                if cost == 0 {
                    deque.push_front(v);
                } else {
                    deque.push_back(v);
                }
            }
        }
    }
    Ok(None)
}

fn reconstruct(parent: &[Option<(usize, Option<Action>)>], mut node: usize) -> Vec<Action> {
    let mut actions = Vec::new();
    while let Some((prev, action)) = parent[node] {
        if let Some(a) = action {
            actions.push(a);
        }
        node = prev;
    }
    actions.reverse();
    actions
}
