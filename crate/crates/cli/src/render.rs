use rowplan_core::env::{FieldSpec, GoalSpec, Orientation, RobotState};

/// Top-down ASCII view: rows are columns of `#`, the robot is `^`/`v` in its
/// corridor, the goal sampling point is `*`. Headland lines are dotted.
pub fn render(field: &FieldSpec, goal: &GoalSpec, state: &RobotState) -> String {
    let mut out = String::new();
    for y in (field.bottom()..=field.top()).rev() {
        let headland = field.is_headland(y);
        out.push_str(&format!("{y:>4} "));
        for r in 0..field.num_rows() {
            out.push(if headland {
                '.'
            } else if r == goal.row && y == goal.y {
                '*'
            } else {
                '#'
            });
            if r + 1 < field.num_rows() {
                let robot = state.corridor == r && state.y == y;
                let c = match (robot, state.orientation) {
                    (true, Orientation::Up) => '^',
                    (true, Orientation::Down) => 'v',
                    (false, _) if headland => '.',
                    (false, _) => ' ',
                };
                out.push(if headland { '.' } else { ' ' });
                out.push(c);
                out.push(if headland { '.' } else { ' ' });
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_field() {
        let f = FieldSpec::new(3, 2).unwrap();
        let view = render(&f, &GoalSpec::new(2, 1), &RobotState::new(0, 0, Orientation::Down));
        let expected = ["   2 .........", "   1 #   #   *", "   0 # v #   #", "  -1 ........."];
        assert_eq!(view.lines().collect::<Vec<_>>(), expected);
    }
}
