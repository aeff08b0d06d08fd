use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::harness::BenchmarkRecord;
use crate::BenchError;

/// Quantile of sorted data by linear interpolation between closest ranks:
/// position `p * (n - 1)`, the default in most numeric libraries.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Box-plot summary with whiskers at the most extreme points within
/// 1.5 IQR of the quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: usize,
    pub min: f64,
    pub max: f64,
}

impl Distribution {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q1 = quantile(&v, 0.25);
        let q3 = quantile(&v, 0.75);
        let iqr = q3 - q1;
        let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let inside = || v.iter().copied().filter(|x| (lo..=hi).contains(x));
        Some(Self {
            n: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            median: quantile(&v, 0.5),
            q1,
            q3,
            whisker_low: inside().next().unwrap_or(q1),
            whisker_high: inside().next_back().unwrap_or(q3),
            outliers: v.iter().filter(|x| !(lo..=hi).contains(*x)).count(),
            min: v[0],
            max: v[v.len() - 1],
        })
    }
}

/// Per-planner summary. The flat fields are the documented JSON keys and
/// refer to planning time in nanoseconds; the nested distributions carry
/// the full box-plot data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerSummary {
    pub mean_time_ns: f64,
    pub median_time_ns: f64,
    pub q1: f64,
    pub q3: f64,
    pub outliers: usize,
    pub success_rate: f64,
    /// Over successful runs only; `None` if there were none.
    pub mean_path_length: Option<f64>,
    pub runs: usize,
    pub time_ns: Distribution,
    pub path_length: Option<Distribution>,
}

/// Planner name to summary, in name order.
pub type SummaryStats = BTreeMap<String, PlannerSummary>;

pub fn summarize(records: &[BenchmarkRecord]) -> Result<SummaryStats, BenchError> {
    if records.is_empty() {
        return Err(BenchError::NoRecords);
    }
    let mut groups: BTreeMap<String, Vec<&BenchmarkRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.planner.name().to_string()).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|(name, rs)| {
            let times: Vec<f64> = rs.iter().map(|r| r.planning_time_ns as f64).collect();
            let lengths: Vec<f64> = rs.iter().filter(|r| r.success).map(|r| r.path_length_units).collect();
            let time = Distribution::from_values(&times).expect("nonempty group");
            let path = Distribution::from_values(&lengths);
            let successes = rs.iter().filter(|r| r.success).count();
            let summary = PlannerSummary {
                mean_time_ns: time.mean,
                median_time_ns: time.median,
                q1: time.q1,
                q3: time.q3,
                outliers: time.outliers,
                success_rate: successes as f64 / rs.len() as f64,
                mean_path_length: path.map(|d| d.mean),
                runs: rs.len(),
                time_ns: time,
                path_length: path,
            };
            (name, summary)
        })
        .collect())
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let mean = (xs.len() as f64 + 1.0) / 2.0;
    let (mut num, mut dx, mut dy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        num += (a - mean) * (b - mean);
        dx += (a - mean).powi(2);
        dy += (b - mean).powi(2);
    }
    (dx > 0.0 && dy > 0.0).then(|| num / (dx * dy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_quartiles() {
        // Positions 1 and 3 of [1, 2, 3, 4, 100]: q1 = 2, q3 = 4, IQR = 2,
        // upper fence 7, so 100 is the only outlier.
        let d = Distribution::from_values(&[100.0, 3.0, 1.0, 4.0, 2.0]).unwrap();
        assert_eq!((d.q1, d.median, d.q3), (2.0, 3.0, 4.0));
        assert_eq!(d.outliers, 1);
        assert_eq!((d.whisker_low, d.whisker_high), (1.0, 4.0));
        assert_eq!(d.mean, 22.0);
    }

    #[test]
    fn interpolates_between_ranks() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 1.0), 4.0);
    }

    #[test]
    fn single_value() {
        let d = Distribution::from_values(&[7.0]).unwrap();
        assert_eq!((d.mean, d.median, d.q1, d.q3, d.outliers), (7.0, 7.0, 7.0, 7.0, 0));
        assert!(Distribution::from_values(&[]).is_none());
    }

    #[test]
    fn spearman_cases() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert!(spearman(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).is_none());
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
    }
}
