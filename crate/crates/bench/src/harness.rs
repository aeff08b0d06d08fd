use std::fmt;
use std::time::Instant;

use rowplan_core::env::{simulate, SimFailureKind};
use rowplan_core::plan::{PlanRequest, Planner, PlannerId};
use serde::{Deserialize, Serialize};

use crate::instances::Instance;
use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// The planner returned an error.
    PlannerError,
    /// The environment rejected one of the planned actions.
    RejectedAction,
    StepBudgetExceeded,
    GoalNotReached,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureReason::PlannerError => "planner_error",
            FailureReason::RejectedAction => "rejected_action",
            FailureReason::StepBudgetExceeded => "step_budget_exceeded",
            FailureReason::GoalNotReached => "goal_not_reached",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub instance_id: u64,
    pub planner: PlannerId,
    pub success: bool,
    pub planning_time_ns: u64,
    /// Distance driven when the plan is replayed (up to the failure point
    /// for unsuccessful plans).
    pub path_length_units: f64,
    pub num_macro_actions: usize,
    pub failure_reason: Option<FailureReason>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Timed calls per (planner, instance); the median is recorded.
    pub repetitions: usize,
    /// Untimed calls before timing starts.
    pub warmup: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            repetitions: 5,
            warmup: 1,
        }
    }
}

/// Plans every instance with every planner, instance-major, in input order.
///
/// Planning time is the median wall-clock duration of `repetitions` calls
/// measured around `Planner::plan`. Success is decided by replaying the last
/// plan in the environment; the planner's own claim is ignored.
pub fn run_benchmark(
    planners: &[&dyn Planner],
    instances: &[Instance],
    cfg: &BenchConfig,
) -> Result<Vec<BenchmarkRecord>, BenchError> {
    if planners.is_empty() {
        return Err(BenchError::NoPlanners);
    }
    if cfg.repetitions == 0 {
        return Err(BenchError::Config("repetitions must be positive".into()));
    }
    let mut records = Vec::with_capacity(planners.len() * instances.len());
    let mut times = Vec::with_capacity(cfg.repetitions);
    for inst in instances {
        let req = PlanRequest::new(inst.field, inst.start, inst.goal);
        for planner in planners {
            for _ in 0..cfg.warmup {
                let _ = std::hint::black_box(planner.plan(&req));
            }
            times.clear();
            let mut last = None;
            for _ in 0..cfg.repetitions {
                let t0 = Instant::now();
                let out = std::hint::black_box(planner.plan(&req));
                times.push(t0.elapsed().as_nanos() as u64);
                last = Some(out);
            }
            times.sort_unstable();
            let planning_time_ns = median_ns(&times).max(1);
            records.push(verify(inst, planner.id(), planning_time_ns, last.expect("repetitions > 0")));
        }
    }
    Ok(records)
}

fn median_ns(sorted: &[u64]) -> u64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2
    }
}

fn verify(
    inst: &Instance,
    planner: PlannerId,
    planning_time_ns: u64,
    outcome: Result<rowplan_core::PlanResult, rowplan_core::PlanError>,
) -> BenchmarkRecord {
    let mut record = BenchmarkRecord {
        instance_id: inst.id,
        planner,
        success: false,
        planning_time_ns,
        path_length_units: 0.0,
        num_macro_actions: 0,
        failure_reason: Some(FailureReason::PlannerError),
    };
    let Ok(plan) = outcome else {
        return record;
    };
    record.num_macro_actions = plan.macro_actions.len();
    match simulate(&inst.field, &inst.start, &inst.goal, &plan.raw_actions) {
        Ok(sim) => {
            record.path_length_units = sim.total_distance;
            record.success = sim.success;
            record.failure_reason = sim.failure.map(|f| match f.kind {
                SimFailureKind::Rejected(_) => FailureReason::RejectedAction,
                SimFailureKind::StepBudgetExceeded => FailureReason::StepBudgetExceeded,
                SimFailureKind::GoalNotReached => FailureReason::GoalNotReached,
            });
            if !record.success && record.failure_reason.is_none() {
                record.failure_reason = Some(FailureReason::GoalNotReached);
            }
        }
        Err(_) => record.failure_reason = Some(FailureReason::RejectedAction),
    }
    record
}

#[cfg(test)]
mod tests {
    use super::*;
    use rowplan_core::env::FieldSpec;
    use rowplan_core::plan::{HeuristicPlanner, PlanError, PlanResult};
    use std::time::Duration;

    struct Liar;

    impl Planner for Liar {
        fn id(&self) -> PlannerId {
            PlannerId::Dqn
        }

        fn plan(&self, _: &PlanRequest) -> Result<PlanResult, PlanError> {
            Ok(PlanResult {
                planner: PlannerId::Dqn,
                raw_actions: Vec::new(),
                macro_actions: Vec::new(),
                path_length: 1.0,
                planning_time: Duration::ZERO,
                reached_goal: true,
                expansions: 0,
            })
        }
    }

    struct Broken;

    impl Planner for Broken {
        fn id(&self) -> PlannerId {
            PlannerId::GraphAStar
        }

        fn plan(&self, _: &PlanRequest) -> Result<PlanResult, PlanError> {
            Err(PlanError::Failed("boom".into()))
        }
    }

    fn instances() -> Vec<Instance> {
        crate::generate_instances(3, 20, &FieldSpec::new(8, 10).unwrap())
    }

    #[test]
    fn success_comes_from_simulation() {
        // No instance starts at its goal, so an empty plan claimed as a
        // success must be recorded as a failure.
        let recs = run_benchmark(&[&Liar], &instances(), &BenchConfig::default()).unwrap();
        assert!(recs.iter().all(|r| !r.success && r.failure_reason.is_some()));
    }

    #[test]
    fn planner_errors_are_recorded() {
        let recs = run_benchmark(&[&HeuristicPlanner, &Broken], &instances(), &BenchConfig::default()).unwrap();
        assert_eq!(recs.len(), 40);
        for pair in recs.chunks(2) {
            assert_eq!(pair[0].instance_id, pair[1].instance_id);
            assert!(pair[0].success && pair[0].failure_reason.is_none());
            assert_eq!(pair[1].failure_reason, Some(FailureReason::PlannerError));
            assert!(pair[1].planning_time_ns > 0);
        }
    }

    #[test]
    fn needs_a_planner() {
        assert!(matches!(
            run_benchmark(&[], &instances(), &BenchConfig::default()),
            Err(BenchError::NoPlanners)
        ));
    }

    #[test]
    fn median_of_times() {
        assert_eq!(median_ns(&[1, 5, 9]), 5);
        assert_eq!(median_ns(&[1, 5, 9, 11]), 7);
    }
}
