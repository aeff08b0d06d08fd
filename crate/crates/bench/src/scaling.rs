use rowplan_core::env::FieldSpec;
use rowplan_core::plan::Planner;
use serde::{Deserialize, Serialize};

use crate::harness::{run_benchmark, BenchConfig};
use crate::instances::generate_instances;
use crate::stats::Distribution;
use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub num_rows: u32,
    pub instances: usize,
    pub mean_time_ns: f64,
    pub median_time_ns: f64,
    pub success_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub corridor_len: u32,
    pub instances_per_size: usize,
    pub bench: BenchConfig,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            corridor_len: 10,
            instances_per_size: 1000,
            bench: BenchConfig::default(),
        }
    }
}

/// Mean planning time of one planner over fields of increasing row count.
/// Every size uses the same seed for its instance stream.
pub fn scaling_sweep(
    planner: &dyn Planner,
    sizes: &[u32],
    seed: u64,
    cfg: &ScalingConfig,
) -> Result<Vec<ScalingRow>, BenchError> {
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(BenchError::Config("field sizes must be strictly ascending".into()));
    }
    sizes
        .iter()
        .map(|&num_rows| {
            let field = FieldSpec::new(num_rows, cfg.corridor_len)?;
            let instances = generate_instances(seed, cfg.instances_per_size, &field);
            let records = run_benchmark(&[planner], &instances, &cfg.bench)?;
            let times: Vec<f64> = records.iter().map(|r| r.planning_time_ns as f64).collect();
            let d = Distribution::from_values(&times).ok_or(BenchError::NoRecords)?;
            Ok(ScalingRow {
                num_rows,
                instances: records.len(),
                mean_time_ns: d.mean,
                median_time_ns: d.median,
                success_rate: records.iter().filter(|r| r.success).count() as f64 / records.len() as f64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rowplan_core::plan::AStarPlanner;

    #[test]
    fn rejects_unsorted_sizes() {
        assert!(scaling_sweep(&AStarPlanner, &[20, 10], 0, &ScalingConfig::default()).is_err());
    }

    #[test]
    fn rows_follow_sizes() {
        let cfg = ScalingConfig {
            instances_per_size: 20,
            ..ScalingConfig::default()
        };
        let rows = scaling_sweep(&AStarPlanner, &[4, 8], 1, &cfg).unwrap();
        assert_eq!(rows.iter().map(|r| r.num_rows).collect::<Vec<_>>(), vec![4, 8]);
        assert!(rows.iter().all(|r| r.success_rate == 1.0 && r.instances == 20));
    }
}
