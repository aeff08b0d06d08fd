use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rowplan_core::env::{is_goal, FieldSpec, GoalSpec, Orientation, RobotState};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: u64,
    pub field: FieldSpec,
    pub start: RobotState,
    pub goal: GoalSpec,
}

/// `n` instances from a seeded ChaCha8 stream.
///
/// Starts are uniform over corridors, interior cells and headings; goals
/// over rows and interior cells. A start that already satisfies its goal is
/// redrawn.
pub fn generate_instances(seed: u64, n: usize, field: &FieldSpec) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = field.corridor_len() as i32;
    (0..n as u64)
        .map(|id| loop {
            let start = RobotState::new(
                rng.random_range(0..field.num_corridors()),
                rng.random_range(0..len),
                if rng.random::<bool>() { Orientation::Up } else { Orientation::Down },
            );
            let goal = GoalSpec::new(rng.random_range(0..field.num_rows()), rng.random_range(0..len));
            if !is_goal(&start, field, &goal) {
                break Instance {
                    id,
                    field: *field,
                    start,
                    goal,
                };
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        let field = FieldSpec::new(65, 10).unwrap();
        let a = generate_instances(7, 500, &field);
        assert_eq!(a, generate_instances(7, 500, &field));
        assert_ne!(a, generate_instances(8, 500, &field));
        for (i, inst) in a.iter().enumerate() {
            assert_eq!(inst.id, i as u64);
            inst.start.validate(&field).unwrap();
            inst.goal.validate(&field).unwrap();
            assert!(!field.is_headland(inst.start.y));
            assert!(!is_goal(&inst.start, &field, &inst.goal));
        }
    }
}
