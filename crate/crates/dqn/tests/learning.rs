use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rowplan_core::env::{Action, FieldSpec, GoalSpec, Orientation, RobotState, OBS_DIM};
use rowplan_dqn::adam::Adam;
use rowplan_dqn::mlp::Mlp;
use rowplan_dqn::qnet::{select_from_q, ActionSpace, MaskKey, Place, QNetwork};
use rowplan_dqn::replay::{ReplayBuffer, Transition};
use rowplan_dqn::train::{fit_batch, greedy_rollout, mse_on_actions, sync_target, td_target};

/// Central finite differences of the same loss the trainer minimises,
/// compared with the backpropagated gradient by relative error of the
/// full gradient vector.
fn gradient_rel_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_actions = ActionSpace::new(5).len();
    let mut net: Mlp<f64> = Mlp::new_random(&[OBS_DIM, 4, 4, n_actions], &mut rng);
    let batch = 6;
    let obs = Array2::from_shape_fn((batch, OBS_DIM), |_| rng.random_range(-1.0..1.0));
    let actions: Vec<usize> = (0..batch).map(|_| rng.random_range(0..n_actions)).collect();
    let targets: Vec<f64> = (0..batch).map(|_| rng.random_range(-5.0..5.0)).collect();

    let (_, grads) = mse_on_actions(&net, obs.view(), &actions, &targets);
    let analytic = grads.flatten();
    let params = net.flatten();
    let h = 1e-6;
    let mut numeric = Vec::with_capacity(params.len());
    for (i, &p) in params.iter().enumerate() {
        net.set_param(i, p + h);
        let (up, _) = mse_on_actions(&net, obs.view(), &actions, &targets);
        net.set_param(i, p - h);
        let (down, _) = mse_on_actions(&net, obs.view(), &actions, &targets);
        net.set_param(i, p);
        numeric.push((up - down) / (2.0 * h));
    }
    let diff: f64 = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let na: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nn: f64 = numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
    diff / (na + nn).max(1e-12)
}

#[test]
fn backprop_matches_finite_differences() {
    for seed in 0..20 {
        let err = gradient_rel_error(seed);
        assert!(err <= 1e-4, "seed {seed}: relative error {err:e}");
    }
}

fn key() -> MaskKey {
    MaskKey {
        num_rows: 5,
        corridor: 1,
        place: Place::Interior,
    }
}

#[test]
fn repeated_transition_loss_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut net = QNetwork::new(5, &[32, 32], &mut rng);
    let mut adam = Adam::new(&net.mlp, 1e-5);
    let t = Transition {
        obs: [0.3, 0.5, 1.0, 0.4, 0.6],
        action: 3,
        reward: 20.0,
        next_obs: [0.3, 0.6, 1.0, 0.4, 0.6],
        done: true,
        next_mask: key(),
    };
    let batch = vec![t; 8];
    let targets = td_target(&batch, &net, 0.99);
    let mut prev = f32::INFINITY;
    for i in 0..100 {
        let loss = fit_batch(&mut net, &targets, &batch, &mut adam, 0.0);
        assert!(loss <= prev, "step {i}: {loss} > {prev}");
        prev = loss;
    }
}

#[test]
fn sync_copies_bitwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let online = QNetwork::new(5, &[16], &mut rng);
    let mut target = QNetwork::new(5, &[16], &mut rng);
    assert_ne!(online, target);
    sync_target(&mut target, &online);
    let bits = |n: &QNetwork| n.mlp.flatten().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&online), bits(&target));
}

#[test]
fn uniform_exploration_passes_chi_square() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mask = [true, false, true, true, false, true, true, true];
    let q = [0.0f32; 8];
    let mut counts = [0u32; 8];
    let draws = 10_000;
    for _ in 0..draws {
        counts[select_from_q(&q, 1.0, &mask, &mut rng).unwrap()] += 1;
    }
    let valid = mask.iter().filter(|&&m| m).count() as f64;
    let expected = draws as f64 / valid;
    let chi2: f64 = counts
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| m)
        .map(|(&c, _)| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 5 degrees of freedom; 20.52 is the 0.999 quantile.
    assert!(chi2 < 20.52, "chi2 = {chi2}, counts {counts:?}");
    assert_eq!(counts[1] + counts[4], 0);
}

#[test]
fn minimal_successful_episode_reward() {
    // Rig the output so forward-up wins everywhere it is valid.
    let space = ActionSpace::new(5);
    let mut mlp: Mlp<f32> = Mlp::zeros(&[OBS_DIM, 4, space.len()]);
    let last = mlp.layers().len() - 1;
    mlp.layers_mut()[last].b[space.index(&Action::forward(Orientation::Up)).unwrap()] = 1.0;
    let net = QNetwork::from_mlp(mlp, 5).unwrap();
    let field = FieldSpec::new(5, 10).unwrap();
    // One step below the east approach of row 2, which is also the start corridor.
    let r = greedy_rollout(&net, &field, &RobotState::new(2, 3, Orientation::Up), &GoalSpec::new(2, 4)).unwrap();
    assert!(r.reached_goal);
    assert_eq!(r.actions.len(), 1);
    assert!((r.total_reward - 24.8).abs() < 1e-9, "{}", r.total_reward);
}

#[test]
fn checkpoint_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.ckpt");
    let net = QNetwork::new(10, &[8, 8], &mut ChaCha8Rng::seed_from_u64(5));
    let meta = rowplan_dqn::CheckpointMeta::for_network(&net, None, Some(10));
    rowplan_dqn::save(&path, &net, &meta).unwrap();
    let (back, m) = rowplan_dqn::load(&path).unwrap();
    assert_eq!(back, net);
    assert_eq!(m.stage_rows, Some(10));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn buffer_keeps_the_newest(capacity in 1usize..40, pushes in 0usize..200) {
        let mut b = ReplayBuffer::new(capacity);
        for i in 0..pushes {
            b.push(Transition {
                obs: [0.0; OBS_DIM],
                action: i,
                reward: 0.0,
                next_obs: [0.0; OBS_DIM],
                done: false,
                next_mask: key(),
            });
            prop_assert!(b.len() <= capacity);
        }
        let kept: Vec<usize> = b.iter().map(|t| t.action).collect();
        let expected: Vec<usize> = (pushes.saturating_sub(capacity)..pushes).collect();
        prop_assert_eq!(kept, expected);
    }

    #[test]
    fn masked_actions_are_never_selected(
        q in prop::collection::vec(-100.0f32..100.0, 12),
        mask in prop::collection::vec(any::<bool>(), 12),
        seed in any::<u64>(),
    ) {
        prop_assume!(mask.iter().any(|&m| m));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for eps in [0.0, 1.0] {
            for _ in 0..20 {
                let a = select_from_q(&q, eps, &mask, &mut rng).unwrap();
                prop_assert!(mask[a]);
            }
        }
    }

    #[test]
    fn masks_match_environment_rules(
        corridor in 0u32..4,
        y in -1i32..=10,
        o in 0u32..2,
    ) {
        let field = FieldSpec::new(5, 10).unwrap();
        let space = ActionSpace::new(65);
        let state = RobotState::new(corridor, y, Orientation::from_code(o).unwrap());
        let mask = MaskKey::of(&field, &state).mask(&space);
        let goal = GoalSpec::new(0, 0);
        prop_assume!(!rowplan_core::env::is_goal(&state, &field, &goal));
        for (i, &ok) in mask.iter().enumerate() {
            let a = space.action(i);
            let out = rowplan_core::env::step(&state, &a, &field, &goal, &rowplan_core::env::StepContext::start(&state));
            if ok {
                // Valid actions are accepted and always move the robot.
                let out = out.unwrap();
                prop_assert!(out.distance_delta > 0.0);
            } else if let Ok(out) = out {
                // Masked but accepted by the environment: only no-progress moves.
                prop_assert_eq!(out.distance_delta, 0.0);
            }
        }
    }
}
