use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rowplan_bench::{
    emit_report, generate_instances, render_table, run_benchmark, scaling_sweep, summarize, BenchConfig,
    ScalingConfig, ScalingRow,
};
use rowplan_core::env::{format_actions, parse_actions, simulate, simulate_with, Action, FieldSpec, GoalSpec, RobotState};
use rowplan_core::plan::{AStarPlanner, HeuristicPlanner, PlanRequest, Planner, PlannerId};
use rowplan_core::route::{compile, write_path, ExportFormat, FieldGeometry};
use rowplan_dqn::train::{parse_rows, schedule, train_stage_with};
use rowplan_dqn::{evaluate, load, save, CheckpointMeta, DqnPlanner, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::args::{BenchArgs, Cli, Command, ExportArgs, Format, InstanceArgs, PlanArgs, SimulateArgs, TrainArgs};
use crate::render::render;
use crate::PlanningFailure;

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Plan(a) => plan(cli, a),
        Command::Bench(a) => bench(cli, a),
        Command::Train(a) => train(cli, a),
        Command::Simulate(a) => simulate_cmd(cli, a),
        Command::Export(a) => export(cli, a),
    }
}

/// Machine-readable plan, also the input of `export`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanOutput {
    pub planner: PlannerId,
    pub rows: u32,
    pub len: u32,
    pub start: RobotState,
    pub goal: GoalSpec,
    pub macro_actions: Vec<Action>,
    pub raw_actions: Vec<Action>,
    pub path_length: f64,
    pub planning_time_ns: u64,
    /// Decided by replaying `raw_actions`.
    pub success: bool,
    pub expansions: usize,
}

fn instance(a: &InstanceArgs) -> Result<(FieldSpec, RobotState, GoalSpec)> {
    let field = FieldSpec::new(a.rows, a.len)?;
    a.start.validate(&field)?;
    a.goal.validate(&field)?;
    Ok((field, a.start, a.goal))
}

fn load_planner(id: PlannerId, model: Option<&Path>) -> Result<Box<dyn Planner>> {
    Ok(match id {
        PlannerId::Heuristic => Box::new(HeuristicPlanner),
        PlannerId::GraphAStar => Box::new(AStarPlanner),
        PlannerId::Dqn => {
            let Some(path) = model else {
                bail!("the dqn planner needs --model");
            };
            let (net, meta) = load(path).with_context(|| format!("loading {}", path.display()))?;
            eprintln!("loaded model {} (layers {:?})", path.display(), meta.layer_sizes);
            Box::new(DqnPlanner::new(net))
        }
    })
}

fn plan(cli: &Cli, a: &PlanArgs) -> Result<()> {
    let (field, start, goal) = instance(&a.instance)?;
    let planner = load_planner(a.planner, a.model.as_deref())?;
    let result = planner
        .plan(&PlanRequest::new(field, start, goal))
        .map_err(|e| PlanningFailure(format!("{} planner: {e}", a.planner)))?;
    let sim = simulate(&field, &start, &goal, &result.raw_actions)?;
    let out = PlanOutput {
        planner: a.planner,
        rows: field.num_rows(),
        len: field.corridor_len(),
        start,
        goal,
        macro_actions: result.macro_actions.clone(),
        raw_actions: result.raw_actions.clone(),
        path_length: result.path_length,
        planning_time_ns: result.planning_time.as_nanos() as u64,
        success: sim.success,
        expansions: result.expansions,
    };
    let mut stdout = io::stdout().lock();
    match cli.format {
        Some(Format::Json | Format::Geojson) => writeln!(stdout, "{}", serde_json::to_string_pretty(&out)?)?,
        Some(Format::Csv) => {
            let mut w = csv::Writer::from_writer(&mut stdout);
            w.write_record(["planner", "macro_actions", "path_length", "planning_time_ns", "success"])?;
            w.write_record([
                out.planner.name().to_string(),
                format_actions(&out.macro_actions),
                out.path_length.to_string(),
                out.planning_time_ns.to_string(),
                out.success.to_string(),
            ])?;
            w.flush()?;
        }
        None => {
            writeln!(stdout, "planner: {}", out.planner)?;
            writeln!(stdout, "macro_actions: {}", format_actions(&out.macro_actions))?;
            writeln!(stdout, "path_length: {}", out.path_length)?;
            writeln!(stdout, "planning_time_ms: {:.6}", out.planning_time_ns as f64 / 1e6)?;
            writeln!(stdout, "success: {}", out.success)?;
        }
    }
    if !out.success {
        let why = sim.failure.map_or_else(|| "goal not reached".to_string(), |f| f.to_string());
        return Err(PlanningFailure(format!("{} plan does not reach the goal: {why}", a.planner)).into());
    }
    Ok(())
}

fn bench(cli: &Cli, a: &BenchArgs) -> Result<()> {
    if a.planners.is_empty() {
        bail!("--planners is empty");
    }
    let planners = a
        .planners
        .iter()
        .map(|&id| load_planner(id, a.model.as_deref()))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&dyn Planner> = planners.iter().map(|p| p.as_ref()).collect();
    let cfg = BenchConfig {
        repetitions: a.repetitions,
        warmup: a.warmup,
    };
    fs::create_dir_all(&cli.output_dir)?;

    if let Some(sizes) = &a.scaling {
        let scfg = ScalingConfig {
            corridor_len: a.len,
            instances_per_size: a.n.unwrap_or(1000),
            bench: cfg,
        };
        let mut table: Vec<(PlannerId, ScalingRow)> = Vec::new();
        for (id, p) in a.planners.iter().zip(&refs) {
            eprintln!("scaling sweep: {id} over {sizes:?}");
            for row in scaling_sweep(*p, sizes, cli.seed, &scfg)? {
                table.push((*id, row));
            }
        }
        return write_scaling(cli, &table);
    }

    let n = a.n.unwrap_or(10_000);
    let field = FieldSpec::new(a.rows, a.len)?;
    let instances = generate_instances(cli.seed, n, &field);
    eprintln!("benchmarking {} planner(s) on {n} instances", refs.len());
    let records = run_benchmark(&refs, &instances, &cfg)?;
    let stats = summarize(&records)?;
    let files = emit_report(&cli.output_dir, &records, &stats)?;
    eprintln!(
        "wrote {}, {}, {}",
        files.records_csv.display(),
        files.summary_json.display(),
        files.table_txt.display()
    );
    let mut stdout = io::stdout().lock();
    match cli.format {
        Some(Format::Json | Format::Geojson) => writeln!(stdout, "{}", serde_json::to_string_pretty(&stats)?)?,
        _ => write!(stdout, "{}", render_table(&stats))?,
    }
    Ok(())
}

#[derive(Serialize)]
struct ScalingLine {
    planner: PlannerId,
    #[serde(flatten)]
    row: ScalingRow,
}

fn write_scaling(cli: &Cli, table: &[(PlannerId, ScalingRow)]) -> Result<()> {
    let lines: Vec<ScalingLine> = table.iter().map(|&(planner, row)| ScalingLine { planner, row }).collect();
    let csv_path = cli.output_dir.join("scaling.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["planner", "num_rows", "instances", "mean_time_ns", "median_time_ns", "success_rate"])?;
    for (planner, r) in table {
        w.write_record([
            planner.name().to_string(),
            r.num_rows.to_string(),
            r.instances.to_string(),
            r.mean_time_ns.to_string(),
            r.median_time_ns.to_string(),
            r.success_rate.to_string(),
        ])?;
    }
    w.flush()?;
    let json_path = cli.output_dir.join("scaling.json");
    fs::write(&json_path, serde_json::to_string_pretty(&lines)? + "\n")?;
    eprintln!("wrote {}, {}", csv_path.display(), json_path.display());

    let mut stdout = io::stdout().lock();
    if matches!(cli.format, Some(Format::Json | Format::Geojson)) {
        writeln!(stdout, "{}", serde_json::to_string_pretty(&lines)?)?;
        return Ok(());
    }
    writeln!(stdout, "{:<10} {:>6} {:>9} {:>12} {:>12} {:>9}", "planner", "rows", "instances", "mean ms", "median ms", "success")?;
    for (planner, r) in table {
        writeln!(
            stdout,
            "{:<10} {:>6} {:>9} {:>12.5} {:>12.5} {:>8.2}%",
            planner.name(),
            r.num_rows,
            r.instances,
            r.mean_time_ns / 1e6,
            r.median_time_ns / 1e6,
            100.0 * r.success_rate
        )?;
    }
    Ok(())
}

fn train(cli: &Cli, a: &TrainArgs) -> Result<()> {
    let mut cfg: TrainConfig = match &a.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
            .with_context(|| format!("reading training config {}", path.display()))?,
        None => TrainConfig::default(),
    };
    cfg.seed = cli.seed;
    if let Some(steps) = a.steps {
        cfg.rollout_steps = steps;
    }
    cfg.validate()?;
    let rows = parse_rows(&a.stages)?;
    let stages = schedule(&rows, &cfg);
    eprintln!("training config: {}", serde_json::to_string(&cfg)?);
    eprintln!("curriculum: {} stage(s), rows {rows:?}", stages.len());

    let log_path = training_log_path(&a.out);
    let mut log = csv::Writer::from_path(&log_path).with_context(|| format!("creating {}", log_path.display()))?;
    log.write_record(["stage_rows", "episode", "steps", "return", "success"])?;
    let mut net = None;
    for stage in &stages {
        eprintln!("stage: {} rows, {} steps", stage.num_rows, stage.steps);
        let (trained, stage_log) = train_stage_with(stage, &cfg, net.take(), |p| {
            let n = p.log.episodes.len();
            if n % 200 == 0 {
                eprintln!(
                    "  step {}/{} episodes {n} epsilon {:.3} recent success {:.3}",
                    p.step,
                    p.total_steps,
                    p.epsilon,
                    p.log.recent_success(200)
                );
            }
        })?;
        for (i, e) in stage_log.episodes.iter().enumerate() {
            log.write_record([
                stage.num_rows.to_string(),
                i.to_string(),
                e.steps.to_string(),
                e.total_reward.to_string(),
                e.success.to_string(),
            ])?;
        }
        if a.eval_episodes > 0 {
            let report = evaluate(&trained, &stage.field()?, a.eval_episodes, cfg.seed)?;
            eprintln!("  greedy evaluation: {}", serde_json::to_string(&report)?);
        }
        net = Some(trained);
    }
    log.flush()?;
    let net = net.expect("at least one stage");
    let meta = CheckpointMeta::for_network(&net, Some(&cfg), rows.last().copied());
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    save(&a.out, &net, &meta)?;
    eprintln!("wrote {} and {}", a.out.display(), log_path.display());
    println!("{}", a.out.display());
    Ok(())
}

pub fn training_log_path(model: &Path) -> PathBuf {
    let mut name = model.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".log.csv");
    model.with_file_name(name)
}

#[derive(Serialize)]
struct Verdict {
    success: bool,
    steps: u32,
    total_distance: f64,
    total_reward: f64,
    final_state: RobotState,
    failure: Option<String>,
}

fn simulate_cmd(cli: &Cli, a: &SimulateArgs) -> Result<()> {
    let (field, start, goal) = instance(&a.instance)?;
    let text = match a.actions.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
        None => a.actions.clone(),
    };
    let actions = parse_actions(&text)?;
    let text_mode = cli.format.is_none();
    let mut stdout = io::stdout().lock();
    if text_mode {
        write!(stdout, "start {start}\n{}", render(&field, &goal, &start))?;
    }
    let mut frames = Vec::new();
    let sim = simulate_with(&field, &start, &goal, &actions, |i, ep| {
        if text_mode {
            frames.push(format!(
                "step {} action {} -> {}\n{}",
                i,
                actions[i],
                ep.state(),
                render(&field, &goal, ep.state())
            ));
        }
    })?;
    for f in frames {
        write!(stdout, "{f}")?;
    }
    let verdict = Verdict {
        success: sim.success,
        steps: sim.steps,
        total_distance: sim.total_distance,
        total_reward: sim.total_reward,
        final_state: sim.final_state,
        failure: sim.failure.as_ref().map(ToString::to_string),
    };
    if text_mode {
        writeln!(
            stdout,
            "verdict: {} distance {} reward {:.1} steps {}",
            if verdict.success { "success" } else { "failure" },
            verdict.total_distance,
            verdict.total_reward,
            verdict.steps
        )?;
        if let Some(f) = &verdict.failure {
            writeln!(stdout, "reason: {f}")?;
        }
    } else {
        writeln!(stdout, "{}", serde_json::to_string_pretty(&verdict)?)?;
    }
    match sim.failure {
        Some(f) if !sim.success => Err(PlanningFailure(f.to_string()).into()),
        _ => Ok(()),
    }
}

fn export(cli: &Cli, a: &ExportArgs) -> Result<()> {
    let plan: PlanOutput = serde_json::from_str(
        &fs::read_to_string(&a.plan_json).with_context(|| format!("reading {}", a.plan_json.display()))?,
    )
    .with_context(|| format!("parsing {}", a.plan_json.display()))?;
    let geom = FieldGeometry::load(&a.geometry).with_context(|| format!("geometry {}", a.geometry.display()))?;
    let field = FieldSpec::new(plan.rows, plan.len)?;
    let route = compile(&field, &plan.start, &plan.goal, &plan.macro_actions, &geom)?;
    if !route.reached_goal {
        return Err(PlanningFailure("the plan's macro actions do not reach the goal".into()).into());
    }
    let format = match cli.format {
        Some(Format::Csv) => ExportFormat::Csv,
        _ => ExportFormat::GeoJson,
    };
    fs::create_dir_all(&cli.output_dir)?;
    let file = cli.output_dir.join(format!("route.{}", format.extension()));
    write_path(&route.path, format, &file)?;
    let phases: Vec<&str> = route.path.phases().iter().map(|p| p.as_str()).collect();
    eprintln!(
        "{} waypoints, phases {:?}, length {:.3} m",
        route.path.len(),
        phases,
        route.path.length_m()
    );
    println!("{}", file.display());
    Ok(())
}
