mod common;

use mlc_core::optimizer::{full_gradient, objective};
use mlc_core::{BaseLoss, BaseLossKind, LinearModel, Surrogate, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn fd_gradient(model: &LinearModel, ds: &mlc_core::Dataset, cfg: &TrainConfig, h: f64) -> Vec<f64> {
    let w = model.weights().to_vec();
    (0..w.len())
        .map(|k| {
            let mut plus = w.clone();
            let mut minus = w.clone();
            plus[k] += h;
            minus[k] -= h;
            let at = |v: Vec<f64>| {
                let m = LinearModel::from_weights(model.n_features(), model.n_labels(), model.bias(), v).unwrap();
                objective(&m, ds, cfg).unwrap()
            };
            (at(plus) - at(minus)) / (2.0 * h)
        })
        .collect()
}

fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&diff) / norm(a).max(norm(b)).max(1e-12)
}

#[test]
fn smooth_objective_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (name, ds, lambda) in common::optimizer_fixtures() {
        for learner in Surrogate::ALL {
            for bias in [false, true] {
                let cfg = TrainConfig {
                    learner,
                    lambda,
                    bias,
                    base_loss: BaseLoss::new(BaseLossKind::LogisticLog2),
                    ..TrainConfig::default()
                };
                let rows = ds.n_features() + bias as usize;
                let w: Vec<f64> = (0..rows * ds.n_labels())
                    .map(|_| 0.3 * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let model = LinearModel::from_weights(ds.n_features(), ds.n_labels(), bias, w).unwrap();
                let g = full_gradient(&model, &ds, &cfg).unwrap();
                let fd = fd_gradient(&model, &ds, &cfg, 1e-6);
                let err = max_rel_err(&g, &fd);
                assert!(err < 1e-6, "{name} {learner} bias={bias}: rel err {err}");
            }
        }
    }
}

#[test]
fn hinge_objective_gradient_matches_at_generic_points() {
    // Random weights put every margin away from the kink with probability one;
    // a tiny step keeps the difference quotient on one linear piece.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ds = common::toy_dataset(25, 6, 4, 3);
    for learner in Surrogate::ALL {
        let cfg = TrainConfig {
            learner,
            lambda: 0.05,
            ..TrainConfig::default()
        };
        let w: Vec<f64> = (0..6 * 4).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
        let model = LinearModel::from_weights(6, 4, false, w).unwrap();
        let g = full_gradient(&model, &ds, &cfg).unwrap();
        let fd = fd_gradient(&model, &ds, &cfg, 1e-7);
        let err = max_rel_err(&g, &fd);
        assert!(err < 1e-5, "{learner}: rel err {err}");
    }
}

#[test]
fn hamming_hinge_gradient_at_zero_is_label_correlation() {
    // At W = 0 every margin is 0, so every hinge term is active.
    let ds = common::toy_dataset(10, 3, 2, 4);
    let model = LinearModel::zeros(3, 2, false);
    let cfg = TrainConfig {
        lambda: 1.0,
        ..TrainConfig::default()
    };
    let g = full_gradient(&model, &ds, &cfg).unwrap();
    let dense = ds.features().to_dense();
    let (n, c) = (ds.n_samples() as f64, ds.n_labels());
    for k in 0..3 {
        for j in 0..c {
            let want: f64 = -(0..ds.n_samples())
                .map(|i| dense[i][k] * ds.labels_of(i)[j] as f64)
                .sum::<f64>()
                / (n * c as f64);
            assert!((g[k * c + j] - want).abs() < 1e-14, "entry ({k},{j})");
        }
    }
}
