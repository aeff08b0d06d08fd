use super::{FieldSpec, GoalSpec, RobotState};

pub const OBS_DIM: usize = 5;

/// Observation `[x_r, y_r, theta_r, g_x, g_y]`, each scaled into `[0, 1]`.
///
/// The orientation bit passes through unscaled; headlands map to 0 and 1.
pub fn observe(state: &RobotState, goal: &GoalSpec, field: &FieldSpec) -> [f64; OBS_DIM] {
    let rows = f64::from(field.num_rows());
    let len = f64::from(field.corridor_len());
    [
        state.corridor_x() / rows,
        f64::from(state.y + 1) / (len + 1.0),
        f64::from(state.orientation.code()),
        f64::from(goal.row) / rows,
        f64::from(goal.y) / len,
    ]
}
