use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rowplan_core::env::{format_actions, oracle_path, FieldSpec, GoalSpec, Orientation, RobotState};
use rowplan_core::route::{from_csv, from_geojson};

fn rowplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rowplan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn plan_prints_bracketed_macros() {
    let o = rowplan(&["plan", "--planner", "heuristic", "--rows", "4", "--len", "5", "--start", "1.5,2,0", "--goal", "2,4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("macro_actions: [[0,0],[1,0]]"), "{out}");
    assert!(out.contains("path_length: 4\n"), "{out}");
    assert!(stderr(&o).starts_with("config: {"));

    let o = rowplan(&[
        "plan", "--planner", "astar", "--rows", "4", "--len", "5", "--start", "1.5,2,0", "--goal", "2,4", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).expect("stdout is pure JSON");
    assert_eq!(v["path_length"], 4.0);
    assert_eq!(v["success"], true);
}

#[test]
fn plan_at_goal_is_empty() {
    let o = rowplan(&["plan", "--planner", "astar", "--rows", "4", "--len", "5", "--start", "2.5,4,up", "--goal", "2,4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("macro_actions: []"));
}

#[test]
fn usage_errors_exit_with_one() {
    let invalid = rowplan(&["plan", "--planner", "astar", "--rows", "4", "--len", "5", "--start", "7.5,2,0", "--goal", "2,4"]);
    assert_eq!(invalid.status.code(), Some(1));
    assert!(stderr(&invalid).contains("corridor_x"));
    let no_model = rowplan(&["plan", "--planner", "dqn", "--rows", "4", "--len", "5", "--start", "1.5,2,0", "--goal", "2,4"]);
    assert_eq!(no_model.status.code(), Some(1));
    assert!(stderr(&no_model).contains("--model"));
    let unknown = rowplan(&["plan", "--planner", "astar", "--speed", "3"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert_eq!(rowplan(&["--help"]).status.code(), Some(0));
}

#[test]
fn simulate_verdicts() {
    let field = FieldSpec::new(6, 8).unwrap();
    let start = RobotState::new(1, 3, Orientation::Down);
    let goal = GoalSpec::new(4, 6);
    let (d, actions) = oracle_path(&field, &start, &goal).unwrap().unwrap();
    let o = rowplan(&[
        "simulate", "--rows", "6", "--len", "8", "--start", "1.5,3,1", "--goal", "4,6", "--actions",
        &format_actions(&actions), "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["success"], true);
    assert_eq!(v["total_distance"], f64::from(d));

    let o = rowplan(&["simulate", "--rows", "6", "--len", "8", "--start", "1.5,3,1", "--goal", "4,6", "--actions", "[[1,1],[1,4]]"]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(out.contains("verdict: failure"), "{out}");
    assert!(out.contains("step 1: illegal action [1,4]"), "{out}");
    assert!(out.contains(" v "), "rendering shows the robot");

    let o = rowplan(&["simulate", "--rows", "6", "--len", "8", "--start", "4.5,6,0", "--goal", "4,6", "--actions", "[]"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: success distance 0"));
}

fn without_timing(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            let mut cols: Vec<&str> = l.split(',').collect();
            cols.remove(3);
            cols.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn bench_is_reproducible() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let o = rowplan(&[
            "bench", "--planners", "heuristic,astar", "--n", "40", "--rows", "12", "--len", "10", "--seed", "7",
            "--repetitions", "1", "--output-dir", d.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let table = stdout(&o);
        assert!(table.contains("heuristic") && table.contains("100.00%"), "{table}");
    }
    let read = |d: &Path| fs::read_to_string(d.join("records.csv")).unwrap();
    let (a, b) = (read(dirs[0].path()), read(dirs[1].path()));
    assert_eq!(a.lines().count(), 81);
    assert_eq!(without_timing(&a), without_timing(&b));
    assert!(dirs[0].path().join("summary.json").exists());
    assert!(fs::read_to_string(dirs[0].path().join("report.txt")).unwrap().contains("99.13%"));
}

#[test]
fn bench_scaling_table() {
    let d = tempfile::tempdir().unwrap();
    let o = rowplan(&[
        "bench", "--scaling", "4,8,16", "--planners", "heuristic", "--n", "30", "--output-dir", d.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<String> = stdout(&o).lines().skip(1).map(String::from).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[2].split_whitespace().nth(1) == Some("16"));
    let csv = fs::read_to_string(d.path().join("scaling.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn train_then_plan_with_the_checkpoint() {
    let d = tempfile::tempdir().unwrap();
    let config = d.path().join("train.json");
    fs::write(&config, r#"{"hidden": [16, 16], "learning_starts": 50, "batch_size": 16, "max_rows": 8}"#).unwrap();
    let model = d.path().join("m.ckpt");
    let run = |seed: &str| {
        rowplan(&[
            "train", "--stages", "4,6", "--steps", "400", "--seed", seed, "--out", model.to_str().unwrap(), "--config",
            config.to_str().unwrap(),
        ])
    };
    let o = run("1");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let log_path = d.path().join("m.ckpt.log.csv");
    let log = fs::read_to_string(&log_path).unwrap();
    assert!(log.starts_with("stage_rows,episode,steps,return,success\n"));
    assert!(log.lines().any(|l| l.starts_with("6,")));
    let first_model = fs::read(&model).unwrap();
    assert_eq!(run("1").status.code(), Some(0));
    assert_eq!(fs::read_to_string(&log_path).unwrap(), log, "same seed, same log");
    assert_eq!(fs::read(&model).unwrap(), first_model);

    let o = rowplan(&[
        "plan", "--planner", "dqn", "--model", model.to_str().unwrap(), "--rows", "6", "--len", "10", "--start", "1.5,2,0",
        "--goal", "2,4",
    ]);
    // An undertrained network may fail; either way the checkpoint loads and a plan is printed.
    assert!(matches!(o.status.code(), Some(0 | 2)), "{}", stderr(&o));
    assert!(stdout(&o).contains("macro_actions: ["));
    let too_big = rowplan(&[
        "plan", "--planner", "dqn", "--model", model.to_str().unwrap(), "--rows", "9", "--len", "10", "--start", "1.5,2,0",
        "--goal", "2,4",
    ]);
    assert_eq!(too_big.status.code(), Some(2));
}

#[test]
fn export_writes_three_phase_routes() {
    let d = tempfile::tempdir().unwrap();
    let dir = d.path().to_str().unwrap();
    let o = rowplan(&[
        "plan", "--planner", "heuristic", "--rows", "10", "--len", "10", "--start", "0.5,5,0", "--goal", "6,5", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let plan_path = d.path().join("plan.json");
    fs::write(&plan_path, stdout(&o)).unwrap();
    assert!(stdout(&o).contains("\"macro_actions\": [\n    [\n      0,\n      0\n    ],\n    [\n      1,\n      7\n    ]"));
    let geom = d.path().join("field.cfg");
    fs::write(&geom, "row_spacing_m = 0.76\ncorridor_length_m = 207\n").unwrap();

    let plan = plan_path.to_str().unwrap();
    let g = geom.to_str().unwrap();
    let o = rowplan(&["export", "--plan-json", plan, "--geometry", g, "--output-dir", dir, "--format", "geojson"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("route.geojson")).unwrap()).unwrap();
    let mut phases: Vec<&str> = json["properties"]["phases"].as_array().unwrap().iter().map(|p| p.as_str().unwrap()).collect();
    phases.dedup();
    assert_eq!(phases, ["exit", "switch", "enter"]);
    assert!(stdout(&o).trim_end().ends_with("route.geojson"));
    let o = rowplan(&["export", "--plan-json", plan, "--geometry", g, "--output-dir", dir, "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let from_json = from_geojson(&json).unwrap();
    let from_csv = from_csv(fs::File::open(d.path().join("route.csv")).unwrap()).unwrap();
    assert_eq!(from_json.points().len(), from_csv.points().len());
    for (a, b) in from_json.points().iter().zip(from_csv.points()) {
        assert!((a.x_m - b.x_m).abs() < 1e-9 && (a.y_m - b.y_m).abs() < 1e-9);
    }

    fs::write(&geom, "row_spacing_m = 0.76\ncorridor_length_m = 207\nrow_width = 2\n").unwrap();
    let o = rowplan(&["export", "--plan-json", plan, "--geometry", g, "--output-dir", dir]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("row_width"), "{}", stderr(&o));
}
