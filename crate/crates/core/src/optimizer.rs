//! Regularized empirical risk minimization for the three surrogate learners:
//!
//! ```text
//! min_W (1/n) sum_i L(W^T x_i, y_i) + lambda * ||W||_F^2
//! ```
//!
//! [`svrg_bb_train`] is SVRG with Barzilai-Borwein step sizes where every
//! per-sample term carries the regularizer,
//! `g_i(W) = L(W^T x_i, y_i) + lambda ||W||^2`:
//!
//! ```text
//! W~_0 = 0
//! for s = 0, 1, ..., S-1:
//!     G_s  = (1/n) sum_i grad g_i(W~_s)
//!     eta_s = ||W~_s - W~_{s-1}||_F^2 / (k * Tr((W~_s - W~_{s-1})^T (G_s - G_{s-1})))   (s > 0)
//!     W_0 = W~_s
//!     for t = 0..m-1:  W_{t+1} = W_t - eta_s (grad g_i(W_t) - grad g_i(W~_s) + G_s)
//!     W~_{s+1} = W_m
//! ```
//!
//! The divisor `k` is the inner-loop length `m` by default
//! ([`BbScale::InnerLen`]); [`BbScale::Rows`] uses the number of weight rows.
//!
//! [`batch_reference_train`] is plain full-batch subgradient descent on the
//! same objective and serves as an independent optimization oracle.
//!
//! For the ranking learner, samples with no relevant or no irrelevant label
//! are dropped from the objective, the gradients and the sampling pool.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, SparseRow};
use crate::error::{MlcError, Result};
use crate::loss::{is_degenerate, subgrad_unchecked, surrogate_value_unchecked, BaseLoss, Surrogate};
use crate::model::{score_into, LinearModel};

/// Denominators of the BB quotient at or below this reuse the previous step.
pub const BB_MIN_CURVATURE: f64 = 1e-12;
pub const ETA_MIN: f64 = 1e-8;
pub const ETA_MAX: f64 = 1e3;
/// Objective growth factor (relative to `W = 0`) treated as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;
pub const EARLY_STOP_GRAD_NORM: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learner: Surrogate,
    pub lambda: f64,
    pub eta0: f64,
    /// Inner-loop length; `None` means twice the effective sample count.
    pub inner_len: Option<usize>,
    pub outer_epochs: usize,
    pub seed: u64,
    pub base_loss: BaseLoss,
    /// Append a constant-1 feature (its weight row counts toward `||W||`).
    pub bias: bool,
    /// Stop once `||G_s||_F < 1e-6`.
    pub early_stop: bool,
    #[serde(default)]
    pub bb_scale: BbScale,
}

/// Divisor applied to the Barzilai-Borwein quotient.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BbScale {
    /// Inner-loop length `m`, as in the original SVRG-BB method.
    #[default]
    InnerLen,
    /// Number of weight rows (features, plus one with a bias). Takes steps
    /// near `1 / (2 lambda d)` once the loss term flattens, which overshoots
    /// badly at small lambda and on the nonsmooth subset surrogate.
    Rows,
}

impl FromStr for BbScale {
    type Err = MlcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rows" => Ok(BbScale::Rows),
            "inner-len" => Ok(BbScale::InnerLen),
            _ => Err(MlcError::Unknown {
                what: "BB scale",
                name: s.to_string(),
            }),
        }
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learner: Surrogate::Hamming,
            lambda: 1e-3,
            eta0: 0.05,
            inner_len: None,
            outer_epochs: 30,
            seed: 0,
            base_loss: BaseLoss::hinge(),
            bias: false,
            early_stop: false,
            bb_scale: BbScale::InnerLen,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta0 > 0.0 && self.eta0.is_finite()) {
            return Err(MlcError::invalid(format!("eta0 must be > 0, got {}", self.eta0)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(MlcError::invalid(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.inner_len == Some(0) {
            return Err(MlcError::invalid("inner loop length must be >= 1"));
        }
        if self.outer_epochs == 0 {
            return Err(MlcError::invalid("outer_epochs must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub eta: f64,
    pub objective: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<EpochRecord>,
    /// Objective at the returned model.
    pub final_objective: f64,
}

impl TrainTrace {
    /// CSV with columns `epoch,eta,objective,grad_norm`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,eta,objective,grad_norm\n");
        for r in &self.records {
            let _ = writeln!(s, "{},{:?},{:?},{:?}", r.epoch, r.eta, r.objective, r.grad_norm);
        }
        s
    }
}

/// The first inner update of an outer epoch, as applied to the iterate.
#[derive(Debug)]
pub struct FirstStep<'a> {
    pub epoch: usize,
    pub eta: f64,
    /// `W_1 - W_0`
    pub step: &'a [f64],
    /// `G_s`
    pub full_grad: &'a [f64],
}

/// Step-size schedule for the reference solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepRule {
    /// `eta_t = eta0 / sqrt(t + 1)`
    InvSqrt,
    /// `eta_t = eta0`
    Constant,
}

impl StepRule {
    fn eta(&self, eta0: f64, t: usize) -> f64 {
        match self {
            StepRule::InvSqrt => eta0 / ((t + 1) as f64).sqrt(),
            StepRule::Constant => eta0,
        }
    }
}

/// Dataset view restricted to the samples the learner can use.
struct Problem<'a> {
    ds: &'a Dataset,
    cfg: &'a TrainConfig,
    samples: Vec<usize>,
    n_features: usize,
    rows: usize,
    c: usize,
}

impl<'a> Problem<'a> {
    fn new(ds: &'a Dataset, cfg: &'a TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let samples: Vec<usize> = (0..ds.n_samples())
            .filter(|&i| cfg.learner != Surrogate::Ranking || !is_degenerate(ds.labels_of(i)))
            .collect();
        if samples.is_empty() {
            return Err(MlcError::invalid("no usable samples for this learner"));
        }
        Ok(Problem {
            ds,
            cfg,
            samples,
            n_features: ds.n_features(),
            rows: ds.n_features() + usize::from(cfg.bias),
            c: ds.n_labels(),
        })
    }

    fn check_model(&self, model: &LinearModel) -> Result<()> {
        if model.n_features() != self.n_features || model.n_labels() != self.c || model.bias() != self.cfg.bias {
            return Err(MlcError::invalid(format!(
                "model shape (d={}, c={}, bias={}) does not match data (d={}, c={}, bias={})",
                model.n_features(),
                model.n_labels(),
                model.bias(),
                self.n_features,
                self.c,
                self.cfg.bias
            )));
        }
        Ok(())
    }

    fn row(&self, i: usize) -> SparseRow<'a> {
        self.ds.row(i)
    }

    fn scores(&self, w: &[f64], i: usize, out: &mut [f64]) {
        score_into(w, self.c, self.n_features, self.cfg.bias, self.row(i), out);
    }

    fn objective(&self, w: &[f64]) -> f64 {
        let mut f = vec![0.0; self.c];
        let mut sum = 0.0;
        for &i in &self.samples {
            self.scores(w, i, &mut f);
            if f.iter().any(|v| !v.is_finite()) {
                return f64::INFINITY;
            }
            sum += surrogate_value_unchecked(self.cfg.learner, &f, self.ds.labels_of(i), &self.cfg.base_loss)
                .unwrap_or(0.0);
        }
        sum / self.samples.len() as f64 + self.cfg.lambda * sq_norm(w)
    }

    /// Fills `grad` with `(1/n) sum_i grad g_i(w)`; optionally stores each
    /// sample's score-space subgradient (row `k` for `samples[k]`).
    fn full_gradient(&self, w: &[f64], grad: &mut [f64], mut per_sample: Option<&mut [f64]>) -> Result<()> {
        let c = self.c;
        let mut f = vec![0.0; c];
        let mut s = vec![0.0; c];
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (k, &i) in self.samples.iter().enumerate() {
            self.scores(w, i, &mut f);
            if f.iter().any(|v| !v.is_finite()) {
                return Err(MlcError::invalid("non-finite scores while computing the gradient"));
            }
            subgrad_unchecked(self.cfg.learner, &f, self.ds.labels_of(i), &self.cfg.base_loss, &mut s);
            self.add_outer(i, &s, 1.0, grad);
            if let Some(buf) = per_sample.as_deref_mut() {
                buf[k * c..(k + 1) * c].copy_from_slice(&s);
            }
        }
        let inv_n = 1.0 / self.samples.len() as f64;
        let two_lambda = 2.0 * self.cfg.lambda;
        for (g, &wk) in grad.iter_mut().zip(w) {
            *g = *g * inv_n + two_lambda * wk;
        }
        Ok(())
    }

    /// `out += scale * x_i s^T`
    fn add_outer(&self, i: usize, s: &[f64], scale: f64, out: &mut [f64]) {
        let c = self.c;
        for (r, xr) in self.row(i).iter() {
            let a = scale * xr;
            out[r * c..(r + 1) * c].iter_mut().zip(s).for_each(|(o, sj)| *o += a * sj);
        }
        if self.cfg.bias {
            let r = self.n_features;
            out[r * c..(r + 1) * c].iter_mut().zip(s).for_each(|(o, sj)| *o += scale * sj);
        }
    }

    fn model(&self, w: Vec<f64>) -> Result<LinearModel> {
        LinearModel::from_weights(self.n_features, self.c, self.cfg.bias, w)
    }

    fn divergence_limit(&self) -> f64 {
        let initial = self.objective(&vec![0.0; self.rows * self.c]);
        DIVERGENCE_FACTOR * initial.max(f64::MIN_POSITIVE)
    }
}

fn sq_norm(w: &[f64]) -> f64 {
    w.iter().map(|v| v * v).sum()
}

/// `(1/n) sum_i L(f(x_i), y_i) + lambda ||W||^2` for the configured learner.
pub fn objective(model: &LinearModel, ds: &Dataset, cfg: &TrainConfig) -> Result<f64> {
    let p = Problem::new(ds, cfg)?;
    p.check_model(model)?;
    if model.weights().iter().any(|w| !w.is_finite()) {
        return Err(MlcError::invalid("non-finite weights"));
    }
    Ok(p.objective(model.weights()))
}

/// `(1/n) sum_i grad g_i(W)`, row-major with the shape of `W`.
pub fn full_gradient(model: &LinearModel, ds: &Dataset, cfg: &TrainConfig) -> Result<Vec<f64>> {
    let p = Problem::new(ds, cfg)?;
    p.check_model(model)?;
    let mut g = vec![0.0; model.weights().len()];
    p.full_gradient(model.weights(), &mut g, None)?;
    Ok(g)
}

pub fn svrg_bb_train(ds: &Dataset, cfg: &TrainConfig) -> Result<(LinearModel, TrainTrace)> {
    svrg_bb_train_observed(ds, cfg, |_| {})
}

/// [`svrg_bb_train`] that reports the first inner update of every epoch.
pub fn svrg_bb_train_observed<F>(ds: &Dataset, cfg: &TrainConfig, mut observer: F) -> Result<(LinearModel, TrainTrace)>
where
    F: FnMut(&FirstStep<'_>),
{
    let p = Problem::new(ds, cfg)?;
    let (c, dim) = (p.c, p.rows * p.c);
    let n = p.samples.len();
    let m = cfg.inner_len.unwrap_or(2 * n);
    let limit = p.divergence_limit();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut snapshot = vec![0.0; dim];
    let mut prev_snapshot = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    let mut prev_grad = vec![0.0; dim];
    let mut snap_sub = vec![0.0; n * c];
    let mut w = vec![0.0; dim];
    let mut dir = vec![0.0; dim];
    let mut f = vec![0.0; c];
    let mut s_cur = vec![0.0; c];
    let mut s_diff = vec![0.0; c];
    let mut eta = cfg.eta0;
    let scale = match cfg.bb_scale {
        BbScale::Rows => p.rows,
        BbScale::InnerLen => m,
    } as f64;
    let mut trace = TrainTrace::default();
    let two_lambda = 2.0 * cfg.lambda;

    for epoch in 0..cfg.outer_epochs {
        p.full_gradient(&snapshot, &mut grad, Some(&mut snap_sub))
            .map_err(|_| diverged(epoch, f64::NAN, &trace))?;
        if epoch > 0 {
            eta = bb_step(&snapshot, &prev_snapshot, &grad, &prev_grad, scale, eta);
        }
        let obj = p.objective(&snapshot);
        let grad_norm = sq_norm(&grad).sqrt();
        trace.records.push(EpochRecord {
            epoch,
            eta,
            objective: obj,
            grad_norm,
        });
        if !obj.is_finite() || obj > limit {
            return Err(diverged(epoch, obj, &trace));
        }
        if cfg.early_stop && grad_norm < EARLY_STOP_GRAD_NORM {
            break;
        }

        w.copy_from_slice(&snapshot);
        for t in 0..m {
            let k = rng.random_range(0..n);
            let i = p.samples[k];
            p.scores(&w, i, &mut f);
            if f.iter().any(|v| !v.is_finite()) {
                return Err(diverged(epoch, f64::INFINITY, &trace));
            }
            let y = ds.labels_of(i);
            subgrad_unchecked(cfg.learner, &f, y, &cfg.base_loss, &mut s_cur);
            for ((d, a), b) in s_diff.iter_mut().zip(&s_cur).zip(&snap_sub[k * c..(k + 1) * c]) {
                *d = a - b;
            }
            // grad g_i(W_t) - grad g_i(W~_s) = x_i (s_t - s~)^T + 2 lambda (W_t - W~_s)
            for kk in 0..dim {
                dir[kk] = grad[kk] + two_lambda * (w[kk] - snapshot[kk]);
            }
            p.add_outer(i, &s_diff, 1.0, &mut dir);
            for v in dir.iter_mut() {
                *v *= -eta;
            }
            for (wk, st) in w.iter_mut().zip(&dir) {
                *wk += st;
            }
            if t == 0 {
                observer(&FirstStep {
                    epoch,
                    eta,
                    step: &dir,
                    full_grad: &grad,
                });
            }
        }

        std::mem::swap(&mut prev_snapshot, &mut snapshot);
        snapshot.copy_from_slice(&w);
        std::mem::swap(&mut prev_grad, &mut grad);
    }

    let final_obj = p.objective(&snapshot);
    trace.final_objective = final_obj;
    if !final_obj.is_finite() || final_obj > limit {
        return Err(diverged(cfg.outer_epochs, final_obj, &trace));
    }
    Ok((p.model(snapshot)?, trace))
}

/// `||dW||^2 / (scale * Tr(dW^T dG))`, clamped; keeps `prev` when the
/// curvature term is not positive.
fn bb_step(w: &[f64], w_prev: &[f64], g: &[f64], g_prev: &[f64], scale: f64, prev: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..w.len() {
        let dw = w[k] - w_prev[k];
        num += dw * dw;
        den += dw * (g[k] - g_prev[k]);
    }
    let eta = if den > BB_MIN_CURVATURE { num / (scale * den) } else { prev };
    eta.clamp(ETA_MIN, ETA_MAX)
}

fn diverged(epoch: usize, objective: f64, trace: &TrainTrace) -> MlcError {
    MlcError::Diverged {
        epoch,
        objective,
        trace: Box::new(trace.clone()),
    }
}

/// Full-batch subgradient descent from `W = 0` for `iters` steps; returns the
/// best iterate seen (subgradient steps are not monotone).
pub fn batch_reference_train(
    ds: &Dataset,
    cfg: &TrainConfig,
    iters: usize,
    rule: StepRule,
) -> Result<(LinearModel, TrainTrace)> {
    let p = Problem::new(ds, cfg)?;
    let dim = p.rows * p.c;
    let limit = p.divergence_limit();
    let mut w = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    let mut best_obj = p.objective(&w);
    let mut best = w.clone();
    let mut trace = TrainTrace::default();
    for t in 0..iters {
        p.full_gradient(&w, &mut g, None)
            .map_err(|_| diverged(t, f64::NAN, &trace))?;
        let eta = rule.eta(cfg.eta0, t);
        for (wk, gk) in w.iter_mut().zip(&g) {
            *wk -= eta * gk;
        }
        let obj = p.objective(&w);
        trace.records.push(EpochRecord {
            epoch: t,
            eta,
            objective: obj,
            grad_norm: sq_norm(&g).sqrt(),
        });
        if !obj.is_finite() || obj > limit {
            return Err(diverged(t, obj, &trace));
        }
        if obj < best_obj {
            best_obj = obj;
            best.copy_from_slice(&w);
        }
    }
    trace.final_objective = best_obj;
    Ok((p.model(best)?, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SparseMatrix;
    use crate::loss::BaseLossKind;

    fn toy() -> Dataset {
        let x = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let features = SparseMatrix::from_dense(&x, 2).unwrap();
        Dataset::new(features, vec![1, -1, -1, 1], 2).unwrap()
    }

    #[test]
    fn objective_at_zero() {
        let ds = toy();
        let m = LinearModel::zeros(2, 2, false);
        for learner in [Surrogate::Hamming, Surrogate::Subset, Surrogate::Ranking] {
            let cfg = TrainConfig {
                learner,
                lambda: 0.5,
                ..TrainConfig::default()
            };
            assert_eq!(objective(&m, &ds, &cfg).unwrap(), 1.0);
        }
    }

    #[test]
    fn single_sample_objective_is_the_surrogate() {
        let features = SparseMatrix::from_dense(&[vec![0.5, -1.0, 2.0]], 3).unwrap();
        let ds = Dataset::new(features, vec![1, -1], 2).unwrap();
        let m = LinearModel::from_weights(3, 2, false, vec![0.1, 0.2, -0.3, 0.4, 0.5, -0.6]).unwrap();
        let f = m.score(ds.row(0)).unwrap();
        let loss = BaseLoss::hinge();
        for learner in Surrogate::ALL {
            let cfg = TrainConfig {
                learner,
                lambda: 0.0,
                ..TrainConfig::default()
            };
            let want = crate::loss::surrogate_value(learner, &f, &[1, -1], &loss).unwrap().unwrap();
            assert_eq!(objective(&m, &ds, &cfg).unwrap(), want);
        }
    }

    #[test]
    fn ranking_objective_skips_degenerate_rows() {
        let features = SparseMatrix::from_dense(&[vec![1.0], vec![1.0]], 1).unwrap();
        let ds = Dataset::new(features, vec![1, 1, 1, -1], 2).unwrap();
        let cfg = TrainConfig {
            learner: Surrogate::Ranking,
            lambda: 0.0,
            ..TrainConfig::default()
        };
        assert_eq!(objective(&LinearModel::zeros(1, 2, false), &ds, &cfg).unwrap(), 1.0);
        let all_pos = Dataset::new(SparseMatrix::from_dense(&[vec![1.0]], 1).unwrap(), vec![1, 1], 2).unwrap();
        assert!(objective(&LinearModel::zeros(1, 2, false), &all_pos, &cfg).is_err());
    }

    #[test]
    fn gradient_flat_region_and_regularizer() {
        let ds = toy();
        let w = vec![2.0, -2.0, -2.0, 2.0];
        let m = LinearModel::from_weights(2, 2, false, w.clone()).unwrap();
        let mut cfg = TrainConfig {
            lambda: 0.0,
            ..TrainConfig::default()
        };
        assert_eq!(full_gradient(&m, &ds, &cfg).unwrap(), vec![0.0; 4]);
        cfg.lambda = 0.3;
        let g = full_gradient(&m, &ds, &cfg).unwrap();
        for (gk, wk) in g.iter().zip(&w) {
            assert_eq!(*gk, 0.6 * wk);
        }
    }

    #[test]
    fn config_validation() {
        let ds = toy();
        let bad = [
            TrainConfig {
                eta0: 0.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                lambda: -1.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                inner_len: Some(0),
                ..TrainConfig::default()
            },
            TrainConfig {
                outer_epochs: 0,
                ..TrainConfig::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(svrg_bb_train(&ds, &cfg), Err(MlcError::InvalidInput(_))));
        }
    }

    #[test]
    fn bb_step_for_equal_differences_is_one_over_scale() {
        // W~_1 - W~_0 = G_1 - G_0 = D gives ||D||^2 / (scale ||D||^2).
        let w_prev = [0.1, 0.2, -0.3];
        let d = [0.3, -1.2, 0.7];
        let w: Vec<f64> = w_prev.iter().zip(&d).map(|(a, b)| a + b).collect();
        let g_prev = [1.0, 0.0, -2.0];
        let g: Vec<f64> = g_prev.iter().zip(&d).map(|(a, b)| a + b).collect();
        for scale in [1.0, 5.0, 40.0] {
            let eta = bb_step(&w, &w_prev, &g, &g_prev, scale, 0.05);
            assert!((eta - 1.0 / scale).abs() < 1e-15);
        }
    }

    #[test]
    fn bb_step_fallback_and_clamp() {
        let z = [0.0, 0.0];
        // no movement, negative curvature: keep the previous step
        assert_eq!(bb_step(&z, &z, &[1.0, 1.0], &z, 3.0, 0.07), 0.07);
        assert_eq!(bb_step(&[1.0, 0.0], &z, &[-1.0, 0.0], &z, 3.0, 0.07), 0.07);
        // tiny positive curvature: clamp from above
        assert_eq!(bb_step(&[1.0, 0.0], &z, &[1e-9, 0.0], &z, 1.0, 0.07), ETA_MAX);
        assert_eq!(bb_step(&[1e-6, 0.0], &z, &[1e3, 0.0], &z, 1.0, 0.07), ETA_MIN);
    }

    #[test]
    fn separable_toy_reaches_zero_loss() {
        let ds = toy();
        let cfg = TrainConfig {
            lambda: 0.0,
            outer_epochs: 50,
            ..TrainConfig::default()
        };
        let (_, trace) = svrg_bb_train(&ds, &cfg).unwrap();
        assert!(trace.final_objective < 1e-3, "{}", trace.final_objective);
        let (_, reference) = batch_reference_train(&ds, &cfg, 2000, StepRule::InvSqrt).unwrap();
        assert!(reference.final_objective < 1e-3);
    }

    #[test]
    fn divergence_is_reported() {
        // A huge constant step on a logistic objective with lambda = 0 and
        // large features overshoots but stays finite; force blow-up with the
        // regularizer instead: eta * 2 lambda >> 2 flips and grows W each step.
        let ds = toy();
        let cfg = TrainConfig {
            lambda: 100.0,
            eta0: 1.0,
            base_loss: BaseLoss::new(BaseLossKind::LogisticLog2),
            ..TrainConfig::default()
        };
        let err = batch_reference_train(&ds, &cfg, 50, StepRule::Constant).unwrap_err();
        match err {
            MlcError::Diverged { trace, .. } => assert!(!trace.records.is_empty()),
            other => panic!("expected divergence, got {other}"),
        }
    }

    #[test]
    fn trace_csv_header() {
        let ds = toy();
        let cfg = TrainConfig {
            outer_epochs: 2,
            ..TrainConfig::default()
        };
        let (_, trace) = svrg_bb_train(&ds, &cfg).unwrap();
        let csv = trace.to_csv();
        assert!(csv.starts_with("epoch,eta,objective,grad_norm\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
