use crate::env::{Action, FieldSpec, GoalSpec, Movement, Orientation, RobotState};
use crate::plan::{dedup, expand_macro_runs, MacroRun};

use super::{snap_to_n_sections, Direction, FieldGeometry, Phase, RouteError, Waypoint, WaypointPath};

/// Output of [`compile`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledRoute {
    pub path: WaypointPath,
    /// Unit-step expansion the waypoints were generated from.
    pub raw_actions: Vec<Action>,
    pub final_state: RobotState,
    pub reached_goal: bool,
}

fn section_m(field: &FieldSpec, geom: &FieldGeometry) -> f64 {
    geom.corridor_length_m / f64::from(field.corridor_len())
}

/// Local metric position of an abstract pose.
fn local_xy(field: &FieldSpec, geom: &FieldGeometry, corridor: u32, y: i32) -> (f64, f64) {
    let x = (f64::from(corridor) + 0.5) * geom.row_spacing_m;
    let y_m = if y == field.top() {
        geom.corridor_length_m + geom.headland_offset_m
    } else if y == field.bottom() {
        -geom.headland_offset_m
    } else {
        (f64::from(y) + 0.5) * section_m(field, geom)
    };
    (x, y_m)
}

fn run_phase(field: &FieldSpec, run: &MacroRun) -> Option<Phase> {
    let last = run.states.last()?;
    match run.action.kind() {
        Movement::Switch { corridor } if corridor == run.from.corridor => None,
        Movement::Switch { .. } => Some(Phase::Switch),
        _ if field.is_headland(last.y) => Some(Phase::Exit),
        _ if field.is_headland(run.from.y) => Some(Phase::Enter),
        _ => Some(Phase::Approach),
    }
}

/// Compiles macro actions into a waypoint polyline.
///
/// Macros are replayed from `start` under move-to-limit semantics, so each
/// vertical macro yields one waypoint per section centre up to the corridor
/// end or the goal. A switch yields a single headland waypoint on the target
/// centerline. A switch that keeps the corridor only changes the heading and
/// emits nothing.
///
/// Sequences that cannot be executed, or whose phases leave the
/// exit/switch/enter order, are rejected with the index of the offending macro.
pub fn compile(
    field: &FieldSpec,
    start: &RobotState,
    goal: &GoalSpec,
    macros: &[Action],
    geom: &FieldGeometry,
) -> Result<CompiledRoute, RouteError> {
    geom.validate()?;
    let runs = expand_macro_runs(field, start, goal, macros)?;

    let world = |s: &RobotState| {
        let (x, y) = local_xy(field, geom, s.corridor, s.y);
        geom.to_world(x, y)
    };
    let mut points = Vec::new();
    let mut last_phase: Option<Phase> = None;
    let mut raw_actions = Vec::new();
    for (index, run) in runs.iter().enumerate() {
        raw_actions.extend(std::iter::repeat(run.action).take(run.states.len()));
        let Some(phase) = run_phase(field, run) else {
            continue;
        };
        if let Some(after) = last_phase {
            if phase != after && phase.rank() <= after.rank() {
                return Err(RouteError::PhaseOrder { index, phase, after });
            }
        }
        last_phase = Some(phase);
        let direction = if run.action.movement == Action::BACKWARD {
            Direction::Backward
        } else {
            Direction::Forward
        };
        let first = points.is_empty().then_some(&run.from);
        for s in first.into_iter().chain(&run.states) {
            let (x_m, y_m) = world(s);
            points.push(Waypoint {
                x_m,
                y_m,
                phase,
                direction,
            });
        }
    }
    if points.is_empty() {
        let (x_m, y_m) = world(start);
        points.push(Waypoint {
            x_m,
            y_m,
            phase: Phase::Approach,
            direction: Direction::Forward,
        });
    }

    let final_state = runs
        .last()
        .and_then(|r| r.states.last().copied())
        .unwrap_or(*start);
    Ok(CompiledRoute {
        path: WaypointPath::new(points)?,
        raw_actions,
        reached_goal: crate::env::is_goal(&final_state, field, goal),
        final_state,
    })
}

/// Polyline length predicted from the unit steps alone.
///
/// Every vertical unit covers one section and every lateral unit one row
/// spacing. A step between a headland and the adjacent section centre is
/// longer than a section by `headland_offset_m - section_m / 2`, so each such
/// transition adds that correction.
pub fn expected_length(
    field: &FieldSpec,
    geom: &FieldGeometry,
    start: &RobotState,
    raw_actions: &[Action],
) -> f64 {
    let (mut corridor, mut y) = (start.corridor, start.y);
    let (mut vertical, mut lateral, mut transitions) = (0u64, 0u64, 0u64);
    for a in raw_actions {
        match a.kind() {
            Movement::Switch { corridor: c } => {
                lateral += u64::from(c.abs_diff(corridor));
                corridor = c;
            }
            Movement::Forward | Movement::Backward => {
                let next = y + a.vertical_dy().unwrap_or(0);
                if next == y {
                    continue;
                }
                vertical += 1;
                if field.is_headland(y) != field.is_headland(next) {
                    transitions += 1;
                }
                y = next;
            }
        }
    }
    let section = section_m(field, geom);
    vertical as f64 * section
        + lateral as f64 * geom.row_spacing_m
        + transitions as f64 * (geom.headland_offset_m - 0.5 * section)
}

/// Recovers the macro sequence from a compiled path.
///
/// Waypoints are snapped back to corridors and sections, turned into unit
/// actions and deduplicated. Vertical steps take their heading from the
/// direction tag and the sign of motion; a switch takes the heading of the
/// vertical step that follows it.
pub fn abstract_actions(
    path: &WaypointPath,
    field: &FieldSpec,
    geom: &FieldGeometry,
) -> Result<Vec<Action>, RouteError> {
    let cells = path
        .points()
        .iter()
        .map(|p| to_cell(field, geom, p))
        .collect::<Result<Vec<_>, _>>()?;

    let mut raw: Vec<Action> = Vec::new();
    let mut pending_switches: Vec<usize> = Vec::new();
    let mut heading = Orientation::Up;
    for (i, w) in cells.windows(2).enumerate() {
        let ((c0, y0), (c1, y1)) = (w[0], w[1]);
        if c0 != c1 {
            if y0 != y1 || !field.is_headland(y0) {
                return Err(RouteError::Malformed(format!(
                    "points {i} and {} change corridor away from a headland",
                    i + 1
                )));
            }
            pending_switches.push(raw.len());
            raw.push(Action::switch_to(heading, c1));
            continue;
        }
        let dy = y1 - y0;
        if dy.abs() != 1 {
            return Err(RouteError::Malformed(format!(
                "points {i} and {} are not adjacent sections",
                i + 1
            )));
        }
        let forward = path.points()[i + 1].direction == Direction::Forward;
        heading = if (dy > 0) == forward {
            Orientation::Up
        } else {
            Orientation::Down
        };
        for j in pending_switches.drain(..) {
            raw[j].orientation = heading;
        }
        raw.push(Action::vertical(heading, dy));
    }
    Ok(dedup(&raw))
}

fn to_cell(field: &FieldSpec, geom: &FieldGeometry, p: &Waypoint) -> Result<(u32, i32), RouteError> {
    let (x, y) = geom.to_local(p.x_m, p.y_m);
    let k = (x / geom.row_spacing_m - 0.5).round();
    let tol = 1e-6 * geom.row_spacing_m.max(1.0);
    if k < 0.0 || k >= f64::from(field.num_corridors()) || (x - (k + 0.5) * geom.row_spacing_m).abs() > tol {
        return Err(RouteError::Malformed(format!("x = {x} m is not on a corridor centerline")));
    }
    let cell_y = if y > geom.corridor_length_m {
        field.top()
    } else if y < 0.0 {
        field.bottom()
    } else {
        snap_to_n_sections(y, geom.corridor_length_m, field.corridor_len())? as i32
    };
    Ok((k as u32, cell_y))
}
