use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::harness::BenchmarkRecord;
use crate::stats::SummaryStats;
use crate::BenchError;

pub const RECORDS_HEADER: &str =
    "instance_id,planner,success,planning_time_ns,path_length_units,num_macro_actions,failure_reason";

/// Published figures for the three planners on a 65-row, 207 m field:
/// (planner, mean planning time in ms, success rate in percent).
pub const REFERENCE_TABLE: [(&str, &str, &str); 3] = [
    ("heuristic", "0.28", "100"),
    ("astar", "1.40", "99.13"),
    ("dqn", "2.78", "96.33"),
];

pub fn write_records_csv<W: Write>(records: &[BenchmarkRecord], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(RECORDS_HEADER.split(','))?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: std::io::Read>(input: R) -> Result<Vec<BenchmarkRecord>, BenchError> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

pub fn summary_json(stats: &SummaryStats) -> Result<String, BenchError> {
    Ok(serde_json::to_string_pretty(stats)?)
}

/// Plain-text comparison table followed by the published reference values.
pub fn render_table(stats: &SummaryStats) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:>6} {:>9} {:>12} {:>12} {:>12} {:>12} {:>9} {:>10}",
        "planner", "runs", "success", "mean ms", "median ms", "q1 ms", "q3 ms", "outliers", "mean len"
    );
    for (name, s) in stats {
        let ms = |ns: f64| ns / 1e6;
        let len = s.mean_path_length.map_or_else(|| "-".to_string(), |l| format!("{l:.3}"));
        let _ = writeln!(
            out,
            "{:<10} {:>6} {:>8.2}% {:>12.5} {:>12.5} {:>12.5} {:>12.5} {:>9} {:>10}",
            name,
            s.runs,
            100.0 * s.success_rate,
            ms(s.mean_time_ns),
            ms(s.median_time_ns),
            ms(s.q1),
            ms(s.q3),
            s.outliers,
            len
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Published reference values (65 rows, 207 m corridors, the original authors' hardware; annotation only, not asserted):"
    );
    for (name, ms, success) in REFERENCE_TABLE {
        let _ = writeln!(out, "  {name:<10} mean planning time {ms} ms, success rate {success}%");
    }
    out
}

/// Paths written by [`emit_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub records_csv: PathBuf,
    pub summary_json: PathBuf,
    pub table_txt: PathBuf,
}

/// Writes `records.csv`, `summary.json` and `report.txt` into `dir`.
pub fn emit_report(dir: &Path, records: &[BenchmarkRecord], stats: &SummaryStats) -> Result<ReportFiles, BenchError> {
    fs::create_dir_all(dir)?;
    let files = ReportFiles {
        records_csv: dir.join("records.csv"),
        summary_json: dir.join("summary.json"),
        table_txt: dir.join("report.txt"),
    };
    write_records_csv(records, std::io::BufWriter::new(fs::File::create(&files.records_csv)?))?;
    fs::write(&files.summary_json, summary_json(stats)? + "\n")?;
    fs::write(&files.table_txt, render_table(stats))?;
    Ok(files)
}
