//! DQN training: Bellman targets, gradient steps, rollouts and the curriculum.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rowplan_core::env::{goal_configs, Action, Episode, FieldSpec, GoalSpec, Orientation, RobotState, OBS_DIM};
use serde::{Deserialize, Serialize};

use crate::adam::Adam;
use crate::fpenv::FlushDenormals;
use crate::mlp::{Grads, Mlp, Scalar};
use crate::qnet::{masked_argmax, masked_max, observation, select_from_q, ActionSpace, MaskKey, QNetwork};
use crate::replay::{ReplayBuffer, Transition};
use crate::DqnError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Environment steps per stage unless the stage overrides it.
    pub rollout_steps: u64,
    /// Extra steps added per curriculum stage index.
    pub stage_step_growth: u64,
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub target_sync_interval: u64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of a stage's steps over which epsilon decays linearly.
    pub epsilon_decay_fraction: f64,
    /// Environment steps between gradient updates.
    pub train_freq: u64,
    /// Steps collected before the first update.
    pub learning_starts: u64,
    /// Global gradient-norm cap; `0` disables clipping.
    pub grad_clip: f64,
    pub hidden: Vec<usize>,
    /// Largest field the network is sized for.
    pub max_rows: u32,
    pub corridor_len: u32,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            rollout_steps: 100_000,
            stage_step_growth: 0,
            gamma: 0.99,
            learning_rate: 1e-4,
            batch_size: 64,
            buffer_capacity: 100_000,
            target_sync_interval: 1_000,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_fraction: 0.5,
            train_freq: 4,
            learning_starts: 1_000,
            grad_clip: 10.0,
            hidden: vec![1024, 1024, 1024],
            max_rows: 65,
            corridor_len: 10,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), DqnError> {
        let bad = |msg: String| Err(DqnError::InvalidConfig(msg));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma {} must lie in (0, 1)", self.gamma));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate {} must be positive", self.learning_rate));
        }
        if self.rollout_steps == 0
            || self.batch_size == 0
            || self.buffer_capacity == 0
            || self.target_sync_interval == 0
            || self.train_freq == 0
        {
            return bad("step counts, batch size and buffer capacity must be positive".into());
        }
        if self.batch_size > self.buffer_capacity {
            return bad(format!(
                "batch size {} exceeds buffer capacity {}",
                self.batch_size, self.buffer_capacity
            ));
        }
        for (name, v) in [("epsilon_start", self.epsilon_start), ("epsilon_end", self.epsilon_end)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} {v} outside [0, 1]"));
            }
        }
        if !(self.epsilon_decay_fraction > 0.0 && self.epsilon_decay_fraction <= 1.0) {
            return bad(format!(
                "epsilon_decay_fraction {} must lie in (0, 1]",
                self.epsilon_decay_fraction
            ));
        }
        if !(self.grad_clip >= 0.0) {
            return bad(format!("grad_clip {} must be non-negative", self.grad_clip));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden layer sizes must be positive".into());
        }
        if self.max_rows < 2 || self.corridor_len == 0 {
            return bad("max_rows must be at least 2 and corridor_len positive".into());
        }
        Ok(())
    }

    /// Linear decay from `epsilon_start` to `epsilon_end` over the first
    /// `epsilon_decay_fraction` of `total` steps, constant afterwards.
    pub fn epsilon_at(&self, step: u64, total: u64) -> f64 {
        let decay = (self.epsilon_decay_fraction * total as f64).max(1.0);
        let t = (step as f64 / decay).min(1.0);
        self.epsilon_start + t * (self.epsilon_end - self.epsilon_start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurriculumStage {
    pub num_rows: u32,
    pub corridor_len: u32,
    pub steps: u64,
}

impl CurriculumStage {
    pub fn field(&self) -> Result<FieldSpec, DqnError> {
        Ok(FieldSpec::new(self.num_rows, self.corridor_len)?)
    }
}

/// Parses a row schedule: `start..end:step`, a comma list, or a single value.
pub fn parse_rows(spec: &str) -> Result<Vec<u32>, DqnError> {
    let bad = || DqnError::InvalidConfig(format!("bad row schedule `{spec}`"));
    let spec = spec.trim();
    let rows: Vec<u32> = if let Some((range, step)) = spec.split_once(':') {
        let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
        let step: u32 = step.trim().parse().map_err(|_| bad())?;
        if step == 0 || lo > hi {
            return Err(bad());
        }
        (lo..=hi).step_by(step as usize).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if rows.is_empty() || rows.windows(2).any(|w| w[1] <= w[0]) || rows[0] < 2 {
        return Err(bad());
    }
    Ok(rows)
}

/// Stages for the given rows, stage `k` lasting
/// `rollout_steps + k * stage_step_growth` steps.
pub fn schedule(rows: &[u32], cfg: &TrainConfig) -> Vec<CurriculumStage> {
    rows.iter()
        .enumerate()
        .map(|(k, &num_rows)| CurriculumStage {
            num_rows,
            corridor_len: cfg.corridor_len,
            steps: cfg.rollout_steps + k as u64 * cfg.stage_step_growth,
        })
        .collect()
}

/// The full progression from 5 to 65 rows in steps of 5.
pub fn full_curriculum(cfg: &TrainConfig) -> Vec<CurriculumStage> {
    schedule(&parse_rows("5..65:5").expect("valid literal"), cfg)
}

/// Bellman targets: `r` for terminal transitions, otherwise
/// `r + gamma * max_a' Q_target(s', a')` over the valid `a'`.
pub fn td_target(batch: &[Transition], target: &QNetwork, gamma: f32) -> Vec<f32> {
    if batch.is_empty() {
        return Vec::new();
    }
    let next = stack(batch.iter().map(|t| &t.next_obs));
    let q_next = target.q_batch(&next);
    let mut mask = Vec::new();
    batch
        .iter()
        .zip(q_next.rows())
        .map(|(t, q)| {
            if t.done {
                return t.reward;
            }
            t.next_mask.fill(target.space(), &mut mask);
            let best = masked_max(q.as_slice().expect("contiguous row"), &mask).unwrap_or(0.0);
            t.reward + gamma * best
        })
        .collect()
}

fn stack<'a>(rows: impl ExactSizeIterator<Item = &'a [f32; OBS_DIM]>) -> Array2<f32> {
    let n = rows.len();
    let flat: Vec<f32> = rows.flat_map(|r| r.iter().copied()).collect();
    Array2::from_shape_vec((n, OBS_DIM), flat).expect("rows of OBS_DIM")
}

/// Mean squared error between `Q(obs)[actions[i]]` and `targets[i]`, with
/// its parameter gradients.
pub fn mse_on_actions<F: Scalar>(
    mlp: &Mlp<F>,
    obs: ArrayView2<'_, F>,
    actions: &[usize],
    targets: &[F],
) -> (F, Grads<F>) {
    let (q, cache) = mlp.forward_cached(obs);
    let n = F::from(actions.len()).expect("batch size");
    let two = F::one() + F::one();
    let mut grad = Array2::<F>::zeros(q.raw_dim());
    let mut loss = F::zero();
    for (i, (&a, &y)) in actions.iter().zip(targets).enumerate() {
        let err = q[(i, a)] - y;
        loss = loss + err * err;
        grad[(i, a)] = two * err / n;
    }
    (loss / n, mlp.backward(&cache, grad))
}

/// One Adam step on the mean squared TD error of `online` over `batch`.
/// Returns the loss measured before the step.
pub fn fit_batch(
    online: &mut QNetwork,
    targets: &[f32],
    batch: &[Transition],
    adam: &mut Adam<f32>,
    grad_clip: f64,
) -> f32 {
    let obs = stack(batch.iter().map(|t| &t.obs));
    let actions: Vec<usize> = batch.iter().map(|t| t.action).collect();
    let (loss, mut grads) = mse_on_actions(&online.mlp, obs.view(), &actions, targets);
    if grad_clip > 0.0 {
        grads.clip_global_norm(grad_clip as f32);
    }
    adam.step(&mut online.mlp, &grads);
    loss
}

/// Copies the online parameters into the target network.
pub fn sync_target(target: &mut QNetwork, online: &QNetwork) {
    target.clone_from(online);
}

/// One sampled minibatch update. `None` while the buffer holds fewer than
/// `batch_size` transitions.
pub fn train_step<R: Rng + ?Sized>(
    online: &mut QNetwork,
    target: &QNetwork,
    adam: &mut Adam<f32>,
    buffer: &ReplayBuffer,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Option<f32> {
    let batch = buffer.sample(cfg.batch_size, rng)?;
    let targets = td_target(&batch, target, cfg.gamma as f32);
    Some(fit_batch(online, &targets, &batch, adam, cfg.grad_clip))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub steps: u32,
    pub total_reward: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub stage: CurriculumStage,
    pub episodes: Vec<EpisodeLog>,
    /// Pre-step loss of every update.
    pub losses: Vec<f32>,
    pub updates: u64,
    pub target_syncs: u64,
}

impl TrainingLog {
    /// Success rate over the last `n` finished episodes.
    pub fn recent_success(&self, n: usize) -> f64 {
        let tail = &self.episodes[self.episodes.len().saturating_sub(n)..];
        if tail.is_empty() {
            return 0.0;
        }
        tail.iter().filter(|e| e.success).count() as f64 / tail.len() as f64
    }
}

/// Snapshot handed to progress callbacks after each finished episode.
#[derive(Debug, Clone, Copy)]
pub struct Progress<'a> {
    pub step: u64,
    pub total_steps: u64,
    pub epsilon: f64,
    pub log: &'a TrainingLog,
}

/// Uniform start pose (headlands included) and goal, rejecting starts that
/// already satisfy the goal.
pub fn sample_instance<R: Rng + ?Sized>(field: &FieldSpec, rng: &mut R) -> (RobotState, GoalSpec) {
    loop {
        let start = RobotState::new(
            rng.random_range(0..field.num_corridors()),
            rng.random_range(field.bottom()..=field.top()),
            if rng.random::<bool>() { Orientation::Up } else { Orientation::Down },
        );
        let goal = GoalSpec::new(
            rng.random_range(0..field.num_rows()),
            rng.random_range(0..field.corridor_len() as i32),
        );
        let configs = goal_configs(field, &goal).expect("sampled goal is valid");
        if !configs.contains(&start) {
            return (start, goal);
        }
    }
}

fn stage_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn train_stage(
    stage: &CurriculumStage,
    cfg: &TrainConfig,
    init: Option<QNetwork>,
) -> Result<(QNetwork, TrainingLog), DqnError> {
    train_stage_with(stage, cfg, init, |_| {})
}

/// [`train_stage`] with a callback after every finished episode.
pub fn train_stage_with(
    stage: &CurriculumStage,
    cfg: &TrainConfig,
    init: Option<QNetwork>,
    mut on_episode: impl FnMut(&Progress<'_>),
) -> Result<(QNetwork, TrainingLog), DqnError> {
    cfg.validate()?;
    let _flush = FlushDenormals::new();
    let field = stage.field()?;
    if stage.num_rows > cfg.max_rows {
        return Err(DqnError::InvalidConfig(format!(
            "stage with {} rows exceeds max_rows {}",
            stage.num_rows, cfg.max_rows
        )));
    }
    if stage.steps == 0 {
        return Err(DqnError::InvalidConfig("stage needs at least one step".into()));
    }
    let mut rng = stage_rng(cfg.seed, u64::from(stage.num_rows));
    let mut online = match init {
        Some(net) => {
            if net.max_rows() != cfg.max_rows || net.mlp.sizes()[1..net.mlp.sizes().len() - 1] != cfg.hidden[..] {
                return Err(DqnError::Shape(format!(
                    "warm-start network {:?} does not match the configured shape",
                    net.mlp.sizes()
                )));
            }
            net
        }
        None => QNetwork::new(cfg.max_rows, &cfg.hidden, &mut rng),
    };
    let mut target = online.clone();
    let mut adam = Adam::new(&online.mlp, cfg.learning_rate as f32);
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let space = *online.space();
    let mut log = TrainingLog {
        stage: *stage,
        episodes: Vec::new(),
        losses: Vec::new(),
        updates: 0,
        target_syncs: 0,
    };

    let mut mask = Vec::with_capacity(space.len());
    let (start, goal) = sample_instance(&field, &mut rng);
    let mut ep = Episode::new(field, start, goal)?;
    for t in 0..stage.steps {
        let epsilon = cfg.epsilon_at(t, stage.steps);
        let state = *ep.state();
        let obs = observation(&state, ep.goal(), &field);
        MaskKey::of(&field, &state).fill(&space, &mut mask);
        let a = select_from_q(&online.q_values(&obs), epsilon, &mask, &mut rng)?;
        let out = ep.step(&space.action(a))?;
        buffer.push(Transition {
            obs,
            action: a,
            reward: out.reward as f32,
            next_obs: observation(&out.next_state, ep.goal(), &field),
            done: out.done,
            next_mask: MaskKey::of(&field, &out.next_state),
        });

        if out.done || ep.is_truncated() {
            log.episodes.push(EpisodeLog {
                steps: ep.steps(),
                total_reward: ep.total_reward(),
                success: out.done,
            });
            on_episode(&Progress {
                step: t + 1,
                total_steps: stage.steps,
                epsilon,
                log: &log,
            });
            let (start, goal) = sample_instance(&field, &mut rng);
            ep = Episode::new(field, start, goal)?;
        }

        let done_steps = t + 1;
        if done_steps >= cfg.learning_starts && done_steps % cfg.train_freq == 0 {
            if let Some(loss) = train_step(&mut online, &target, &mut adam, &buffer, cfg, &mut rng) {
                log.losses.push(loss);
                log.updates += 1;
            }
        }
        if done_steps % cfg.target_sync_interval == 0 {
            sync_target(&mut target, &online);
            log.target_syncs += 1;
        }
    }
    Ok((online, log))
}

/// Trains the stages in order, each warm-started from the previous result.
pub fn run_curriculum(
    stages: &[CurriculumStage],
    cfg: &TrainConfig,
    mut on_stage: impl FnMut(usize, &QNetwork, &TrainingLog),
) -> Result<(QNetwork, Vec<TrainingLog>), DqnError> {
    if stages.is_empty() {
        return Err(DqnError::InvalidConfig("empty curriculum".into()));
    }
    let mut net: Option<QNetwork> = None;
    let mut logs = Vec::with_capacity(stages.len());
    for (k, stage) in stages.iter().enumerate() {
        let (trained, log) = train_stage(stage, cfg, net.take())?;
        on_stage(k, &trained, &log);
        logs.push(log);
        net = Some(trained);
    }
    Ok((net.expect("at least one stage"), logs))
}

/// Outcome of a greedy episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub actions: Vec<Action>,
    pub reached_goal: bool,
    pub total_reward: f64,
    /// Network evaluations performed.
    pub evaluations: usize,
}

/// Follows the masked argmax policy until the goal or the step budget.
pub fn greedy_rollout(net: &QNetwork, field: &FieldSpec, start: &RobotState, goal: &GoalSpec) -> Result<Rollout, DqnError> {
    let space: ActionSpace = *net.space();
    let mut ep = Episode::new(*field, *start, *goal)?;
    let mut actions = Vec::new();
    let mut mask = Vec::with_capacity(space.len());
    let mut evaluations = 0;
    while !ep.is_done() && !ep.is_truncated() {
        let state = *ep.state();
        MaskKey::of(field, &state).fill(&space, &mut mask);
        let q = net.q_values(&observation(&state, goal, field));
        evaluations += 1;
        let action = space.action(masked_argmax(&q, &mask).ok_or(DqnError::EmptyMask)?);
        ep.step(&action)?;
        actions.push(action);
    }
    Ok(Rollout {
        actions,
        reached_goal: ep.is_done(),
        total_reward: ep.total_reward(),
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub episodes: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_reward: f64,
    pub mean_steps: f64,
}

/// Greedy success rate over `episodes` instances drawn from `seed`.
pub fn evaluate(net: &QNetwork, field: &FieldSpec, episodes: usize, seed: u64) -> Result<EvalReport, DqnError> {
    let mut rng = stage_rng(seed, u64::MAX);
    let (mut successes, mut reward, mut steps) = (0usize, 0.0, 0usize);
    for _ in 0..episodes {
        let (start, goal) = sample_instance(field, &mut rng);
        let r = greedy_rollout(net, field, &start, &goal)?;
        successes += usize::from(r.reached_goal);
        reward += r.total_reward;
        steps += r.actions.len();
    }
    let n = episodes.max(1) as f64;
    Ok(EvalReport {
        episodes,
        successes,
        success_rate: successes as f64 / n,
        mean_reward: reward / n,
        mean_steps: steps as f64 / n,
    })
}
