#![allow(dead_code)]

use mlc_core::data::SparseMatrix;
use mlc_core::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Dense Gaussian features; labels from a noisy random linear teacher so the
/// problems are neither separable nor trivial.
pub fn toy_dataset(n: usize, d: usize, c: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let teacher: Vec<f64> = (0..d * c).map(|_| rng.sample(StandardNormal)).collect();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n * c);
    for _ in 0..n {
        let x: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        for j in 0..c {
            let s: f64 = (0..d).map(|k| x[k] * teacher[k * c + j]).sum::<f64>() + 0.8 * rng.sample::<f64, _>(StandardNormal);
            labels.push(if s > 0.0 { 1 } else { -1 });
        }
        rows.push(x);
    }
    Dataset::new(SparseMatrix::from_dense(&rows, d).unwrap(), labels, c).unwrap()
}

/// Three small problems with their lambda, used by the optimizer tests.
pub fn optimizer_fixtures() -> Vec<(&'static str, Dataset, f64)> {
    vec![
        ("n30_d8_c3", toy_dataset(30, 8, 3, 11), 0.01),
        ("n50_d20_c5", toy_dataset(50, 20, 5, 12), 0.1),
        ("n40_d12_c4", toy_dataset(40, 12, 4, 13), 0.01),
    ]
}

/// Rescales every row to unit Euclidean norm (kernel bound r = 1).
pub fn unit_rows(ds: &Dataset) -> Dataset {
    let rows: Vec<Vec<f64>> = ds
        .features()
        .to_dense()
        .into_iter()
        .map(|r| {
            let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            r.into_iter().map(|v| v / norm).collect()
        })
        .collect();
    Dataset::new(
        SparseMatrix::from_dense(&rows, ds.n_features()).unwrap(),
        ds.label_matrix().to_vec(),
        ds.n_labels(),
    )
    .unwrap()
}

/// Random sparse dataset with some all-negative label rows and some empty
/// feature rows.
pub fn random_sparse(n: usize, d: usize, c: usize, density: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n * c);
    for _ in 0..n {
        let mut row: Vec<(u32, f64)> = Vec::new();
        for j in 0..d as u32 {
            if rng.random_bool(density) {
                row.push((j, rng.sample(StandardNormal)));
            }
        }
        rows.push(row);
        for _ in 0..c {
            labels.push(if rng.random_bool(0.3) { 1 } else { -1 });
        }
    }
    Dataset::new(SparseMatrix::from_rows(rows, d).unwrap(), labels, c).unwrap()
}
