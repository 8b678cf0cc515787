mod common;

use noisereg_core::training::{AdamState, MetricMode};
use noisereg_core::{
    build_ansatz, load_diabetes, naive_baseline_losses, prepare, train, AdamConfig, ChannelKind, NoiseSpec,
    PrepareOptions, PreparedDataset, TrainConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn data(seed: u64) -> PreparedDataset {
    prepare(&load_diabetes(common::data_path()).unwrap(), &PrepareOptions::with_seed(seed)).unwrap()
}

/// Scalar Adam written from the update equations.
struct ScalarAdam {
    m: f64,
    v: f64,
    t: i32,
}

impl ScalarAdam {
    fn step(&mut self, theta: f64, g: f64) -> f64 {
        let (lr, b1, b2, eps) = (0.03, 0.9, 0.999, 1e-8);
        self.t += 1;
        self.m = b1 * self.m + (1.0 - b1) * g;
        self.v = b2 * self.v + (1.0 - b2) * g * g;
        let m_hat = self.m / (1.0 - f64::powi(b1, self.t));
        let v_hat = self.v / (1.0 - f64::powi(b2, self.t));
        theta - lr * m_hat / (v_hat.sqrt() + eps)
    }
}

#[test]
fn adam_matches_scalar_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut params = vec![0.3, -1.2, 2.0];
    let mut refs: Vec<(ScalarAdam, f64)> = params.iter().map(|&p| (ScalarAdam { m: 0.0, v: 0.0, t: 0 }, p)).collect();
    let mut adam = AdamState::new(3, AdamConfig::default());
    for _ in 0..50 {
        let grads: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        adam.step(&mut params, &grads).unwrap();
        for ((r, theta), g) in refs.iter_mut().zip(&grads) {
            *theta = r.step(*theta, *g);
        }
        for (p, (_, theta)) in params.iter().zip(&refs) {
            assert!((p - theta).abs() < 1e-14);
        }
    }
}

#[test]
fn adam_hand_computed_steps() {
    let mut adam = AdamState::new(1, AdamConfig::default());
    let mut p = [0.0];
    adam.step(&mut p, &[1.0]).unwrap();
    assert!((p[0] + 0.0299999997).abs() < 1e-10, "{}", p[0]);
    let before = p[0];
    adam.step(&mut p, &[1.0]).unwrap();
    assert!(((before - p[0]) - 0.03).abs() < 1e-9);
}

#[test]
fn record_is_deterministic_and_well_formed() {
    let d = data(2);
    let model = build_ansatz(2, NoiseSpec::new(ChannelKind::PhaseDamping, 0.05).unwrap()).unwrap();
    let cfg = TrainConfig {
        epochs: 4,
        ..TrainConfig::with_seed(9)
    };
    let a = train(&model, &d, &cfg).unwrap();
    let b = train(&model, &d, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.train_mse.len(), 4);
    assert_eq!(a.val_mse.len(), 4);
    assert_eq!(a.final_params.len(), 16);
    assert_eq!(a.optimizer_steps, 8);
    assert!(a.train_mse.iter().chain(&a.val_mse).all(|l| l.is_finite() && *l >= 0.0));
    let c = train(&model, &d, &TrainConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(a.initial_params, c.initial_params);
    assert!(a.initial_params.iter().all(|p| (0.0..std::f64::consts::TAU).contains(p)));
}

#[test]
fn full_amplitude_damping_gives_constant_epochs() {
    let d = data(7);
    let (_, loss_at_one) = naive_baseline_losses(&d).unwrap();
    let model = build_ansatz(2, NoiseSpec::new(ChannelKind::AmplitudeDamping, 1.0).unwrap()).unwrap();
    let r = train(&model, &d, &TrainConfig { epochs: 3, ..TrainConfig::with_seed(1) }).unwrap();
    for w in r.train_mse.windows(2).chain(r.val_mse.windows(2)) {
        assert!((w[0] - w[1]).abs() <= 1e-12);
    }
    assert!((r.final_val_mse() - loss_at_one).abs() <= 1e-10);
    // the gradient is zero up to rounding; Adam scales rounding-level
    // gradients by lr/ε, so parameters drift by at most ~1e-8 per step
    for (a, b) in r.initial_params.iter().zip(&r.final_params) {
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn zero_learning_rate_freezes_everything() {
    let d = data(4);
    let model = build_ansatz(1, NoiseSpec::none()).unwrap();
    let mut cfg = TrainConfig {
        epochs: 3,
        ..TrainConfig::with_seed(4)
    };
    cfg.adam.learning_rate = 0.0;
    let r = train(&model, &d, &cfg).unwrap();
    assert_eq!(r.initial_params, r.final_params);
    assert!(r.train_mse.iter().all(|l| *l == r.train_mse[0]));
    assert!(r.val_mse.iter().all(|l| *l == r.val_mse[0]));
}

#[test]
fn full_batch_means_one_step_per_epoch() {
    let d = data(5);
    let model = build_ansatz(1, NoiseSpec::none()).unwrap();
    let r = train(
        &model,
        &d,
        &TrainConfig {
            epochs: 3,
            batch_size: 40,
            ..TrainConfig::with_seed(5)
        },
    )
    .unwrap();
    assert_eq!(r.optimizer_steps, 3);
}

#[test]
fn running_metric_is_available() {
    let d = data(6);
    let model = build_ansatz(1, NoiseSpec::none()).unwrap();
    let base = TrainConfig {
        epochs: 2,
        ..TrainConfig::with_seed(6)
    };
    let post = train(&model, &d, &base).unwrap();
    let running = train(
        &model,
        &d,
        &TrainConfig {
            metric: MetricMode::BatchRunning,
            ..base
        },
    )
    .unwrap();
    assert_eq!(post.final_params, running.final_params);
    assert_eq!(post.val_mse, running.val_mse);
    assert_ne!(post.train_mse, running.train_mse);
}

#[test]
fn invalid_training_inputs() {
    let d = data(1);
    let model = build_ansatz(1, NoiseSpec::none()).unwrap();
    let empty = PreparedDataset::from_samples(vec![], d.validation.clone());
    assert!(train(&model, &empty, &TrainConfig::default()).is_err());
    assert!(train(&model, &d, &TrainConfig { epochs: 0, ..TrainConfig::default() }).is_err());
    assert!(train(&model, &d, &TrainConfig { batch_size: 41, ..TrainConfig::default() }).is_err());
}

#[test]
fn noiseless_five_layer_training_reduces_loss() {
    let d = data(7);
    let model = build_ansatz(5, NoiseSpec::none()).unwrap();
    let improved = (0..16u64)
        .filter(|&seed| {
            let r = train(&model, &d, &TrainConfig::with_seed(seed)).unwrap();
            r.final_train_mse() < r.train_mse[0]
        })
        .count();
    assert!(improved >= 14, "{improved} of 16");
}
