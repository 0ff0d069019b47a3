//! Base losses, the three 0/1 multi-label measures and their convex surrogates.
//!
//! Scores are plain `&[f64]` slices of length `c`; labels are `&[i8]` slices
//! whose entries are exactly `-1` or `+1` (see [`LabelVector`] for a validated
//! owner). Every function here is pure.
//!
//! Ranking quantities are undefined for samples with no relevant or no
//! irrelevant label; those functions return `Ok(None)` for such samples.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, MlcError, Result};

/// A validated `{-1, +1}^c` label vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct LabelVector(Vec<i8>);

impl LabelVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.is_empty() {
            return Err(MlcError::invalid("label vector must have at least one entry"));
        }
        if let Some(bad) = entries.iter().find(|&&v| v != 1 && v != -1) {
            return Err(MlcError::invalid(format!("label entry {bad} is not -1 or +1")));
        }
        Ok(LabelVector(entries))
    }

    /// Builds a vector of length `c` with `+1` at the given ids.
    pub fn from_relevant(c: usize, relevant: &[usize]) -> Result<Self> {
        let mut v = vec![-1i8; c];
        for &j in relevant {
            if j >= c {
                return Err(MlcError::invalid(format!("label id {j} >= {c}")));
            }
            v[j] = 1;
        }
        LabelVector::new(v)
    }

    pub fn n_pos(&self) -> usize {
        count_pos(&self.0)
    }

    pub fn n_neg(&self) -> usize {
        self.0.len() - self.n_pos()
    }

    pub fn is_degenerate(&self) -> bool {
        is_degenerate(&self.0)
    }

    pub fn positives(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &v)| v > 0).map(|(j, _)| j)
    }

    pub fn negatives(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &v)| v < 0).map(|(j, _)| j)
    }

    pub fn into_inner(self) -> Vec<i8> {
        self.0
    }
}

impl Deref for LabelVector {
    type Target = [i8];
    fn deref(&self) -> &[i8] {
        &self.0
    }
}

impl TryFrom<Vec<i8>> for LabelVector {
    type Error = MlcError;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        LabelVector::new(v)
    }
}

impl From<LabelVector> for Vec<i8> {
    fn from(v: LabelVector) -> Vec<i8> {
        v.0
    }
}

pub(crate) fn count_pos(y: &[i8]) -> usize {
    y.iter().filter(|&&v| v > 0).count()
}

/// True when `y` has no relevant or no irrelevant label.
pub fn is_degenerate(y: &[i8]) -> bool {
    let pos = count_pos(y);
    pos == 0 || pos == y.len()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseLossKind {
    /// `max(0, 1 - u)`
    Hinge,
    /// `ln(1 + e^-u)`; does not upper-bound the 0/1 loss at `u = 0`.
    LogisticLn,
    /// `log2(1 + e^-u)`
    LogisticLog2,
}

impl fmt::Display for BaseLossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseLossKind::Hinge => "hinge",
            BaseLossKind::LogisticLn => "logistic_ln",
            BaseLossKind::LogisticLog2 => "logistic_log2",
        })
    }
}

impl FromStr for BaseLossKind {
    type Err = MlcError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hinge" => Ok(BaseLossKind::Hinge),
            "logistic_ln" | "logistic" => Ok(BaseLossKind::LogisticLn),
            "logistic_log2" => Ok(BaseLossKind::LogisticLog2),
            other => Err(MlcError::Unknown {
                what: "base loss",
                name: other.to_string(),
            }),
        }
    }
}

/// A pointwise margin loss `l(u)` with its Lipschitz constant and an optional
/// user-declared upper bound `B` on the evaluation domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseLoss {
    pub kind: BaseLossKind,
    pub bound: Option<f64>,
}

impl Default for BaseLoss {
    fn default() -> Self {
        BaseLoss::hinge()
    }
}

impl BaseLoss {
    pub const fn new(kind: BaseLossKind) -> Self {
        BaseLoss { kind, bound: None }
    }

    pub const fn hinge() -> Self {
        BaseLoss::new(BaseLossKind::Hinge)
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    /// Lipschitz constant of `l`.
    pub fn rho(&self) -> f64 {
        match self.kind {
            BaseLossKind::Hinge | BaseLossKind::LogisticLn => 1.0,
            BaseLossKind::LogisticLog2 => std::f64::consts::LOG2_E,
        }
    }

    /// Whether `l(u) >= [[sgn(u) != 1]]` for every `u`.
    pub fn dominates_zero_one(&self) -> bool {
        !matches!(self.kind, BaseLossKind::LogisticLn)
    }

    pub fn value(&self, u: f64) -> Result<f64> {
        finite(u)?;
        Ok(self.eval(u))
    }

    /// An element of the subdifferential at `u`. The hinge kink resolves to 0.
    pub fn subgrad(&self, u: f64) -> Result<f64> {
        finite(u)?;
        Ok(self.deriv(u))
    }

    #[inline]
    pub(crate) fn eval(&self, u: f64) -> f64 {
        match self.kind {
            BaseLossKind::Hinge => (1.0 - u).max(0.0),
            BaseLossKind::LogisticLn => softplus(-u),
            BaseLossKind::LogisticLog2 => softplus(-u) * std::f64::consts::LOG2_E,
        }
    }

    #[inline]
    pub(crate) fn deriv(&self, u: f64) -> f64 {
        match self.kind {
            BaseLossKind::Hinge => {
                if u < 1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            BaseLossKind::LogisticLn => -sigmoid(-u),
            BaseLossKind::LogisticLog2 => -sigmoid(-u) * std::f64::consts::LOG2_E,
        }
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn finite(u: f64) -> Result<()> {
    if u.is_finite() {
        Ok(())
    } else {
        Err(MlcError::invalid(format!("non-finite argument {u}")))
    }
}

fn check_scores(f: &[f64], y: &[i8]) -> Result<()> {
    check_len(y.len(), f.len())?;
    if y.is_empty() {
        return Err(MlcError::invalid("empty label vector"));
    }
    if let Some(v) = f.iter().find(|v| !v.is_finite()) {
        return Err(MlcError::invalid(format!("non-finite score {v}")));
    }
    Ok(())
}

fn check_labels(pred: &[i8], y: &[i8]) -> Result<()> {
    check_len(y.len(), pred.len())?;
    if y.is_empty() {
        return Err(MlcError::invalid("empty label vector"));
    }
    Ok(())
}

/// Fraction of mismatched labels.
pub fn hamming_loss_01(pred: &[i8], y: &[i8]) -> Result<f64> {
    check_labels(pred, y)?;
    let wrong = pred.iter().zip(y).filter(|(p, t)| p != t).count();
    Ok(wrong as f64 / y.len() as f64)
}

/// 1 if any label is mismatched, else 0. Subset accuracy is `1 - subset_loss_01`.
pub fn subset_loss_01(pred: &[i8], y: &[i8]) -> Result<f64> {
    check_labels(pred, y)?;
    Ok(if pred == y { 0.0 } else { 1.0 })
}

/// Fraction of (relevant, irrelevant) pairs with `f_p <= f_q`; ties count as
/// violations. `None` for degenerate label vectors.
pub fn ranking_loss_01(f: &[f64], y: &[i8]) -> Result<Option<f64>> {
    check_scores(f, y)?;
    let (np, nq) = cardinalities(y);
    if np == 0 || nq == 0 {
        return Ok(None);
    }
    let mut violated = 0usize;
    for (p, _) in y.iter().enumerate().filter(|(_, &v)| v > 0) {
        for (q, _) in y.iter().enumerate().filter(|(_, &v)| v < 0) {
            if f[p] <= f[q] {
                violated += 1;
            }
        }
    }
    Ok(Some(violated as f64 / (np * nq) as f64))
}

fn cardinalities(y: &[i8]) -> (usize, usize) {
    let np = count_pos(y);
    (np, y.len() - np)
}

/// `(1/c) * sum_j l(y_j f_j)`
pub fn surrogate_hamming(f: &[f64], y: &[i8], loss: &BaseLoss) -> Result<f64> {
    check_scores(f, y)?;
    Ok(hamming_unchecked(f, y, loss))
}

/// `max_j l(y_j f_j)`
pub fn surrogate_subset(f: &[f64], y: &[i8], loss: &BaseLoss) -> Result<f64> {
    check_scores(f, y)?;
    Ok(subset_unchecked(f, y, loss).0)
}

/// `(1/(|Y+||Y-|)) * sum_{p,q} l(f_p - f_q)`; `None` for degenerate labels.
pub fn surrogate_ranking(f: &[f64], y: &[i8], loss: &BaseLoss) -> Result<Option<f64>> {
    check_scores(f, y)?;
    Ok(ranking_unchecked(f, y, loss))
}

fn hamming_unchecked(f: &[f64], y: &[i8], loss: &BaseLoss) -> f64 {
    let sum: f64 = f
        .iter()
        .zip(y)
        .map(|(&fj, &yj)| loss.eval(f64::from(yj) * fj))
        .sum();
    sum / y.len() as f64
}

/// Returns the max and the first index attaining it.
fn subset_unchecked(f: &[f64], y: &[i8], loss: &BaseLoss) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (j, (&fj, &yj)) in f.iter().zip(y).enumerate() {
        let v = loss.eval(f64::from(yj) * fj);
        if v > best.0 {
            best = (v, j);
        }
    }
    best
}

fn ranking_unchecked(f: &[f64], y: &[i8], loss: &BaseLoss) -> Option<f64> {
    let (np, nq) = cardinalities(y);
    if np == 0 || nq == 0 {
        return None;
    }
    let mut sum = 0.0;
    for (p, _) in y.iter().enumerate().filter(|(_, &v)| v > 0) {
        for (q, _) in y.iter().enumerate().filter(|(_, &v)| v < 0) {
            sum += loss.eval(f[p] - f[q]);
        }
    }
    Some(sum / (np * nq) as f64)
}

/// Which surrogate (and which learner) is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surrogate {
    Hamming,
    Subset,
    Ranking,
}

impl Surrogate {
    pub const ALL: [Surrogate; 3] = [Surrogate::Hamming, Surrogate::Subset, Surrogate::Ranking];

    pub fn name(&self) -> &'static str {
        match self {
            Surrogate::Hamming => "hamming",
            Surrogate::Subset => "subset",
            Surrogate::Ranking => "ranking",
        }
    }
}

impl fmt::Display for Surrogate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Surrogate {
    type Err = MlcError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hamming" | "h" | "A_h" => Ok(Surrogate::Hamming),
            "subset" | "s" | "A_s" => Ok(Surrogate::Subset),
            "ranking" | "r" | "A_r" => Ok(Surrogate::Ranking),
            other => Err(MlcError::Unknown {
                what: "surrogate",
                name: other.to_string(),
            }),
        }
    }
}

/// Surrogate value; `None` only for a degenerate sample under `Ranking`.
pub fn surrogate_value(kind: Surrogate, f: &[f64], y: &[i8], loss: &BaseLoss) -> Result<Option<f64>> {
    check_scores(f, y)?;
    Ok(surrogate_value_unchecked(kind, f, y, loss))
}

pub(crate) fn surrogate_value_unchecked(
    kind: Surrogate,
    f: &[f64],
    y: &[i8],
    loss: &BaseLoss,
) -> Option<f64> {
    match kind {
        Surrogate::Hamming => Some(hamming_unchecked(f, y, loss)),
        Surrogate::Subset => Some(subset_unchecked(f, y, loss).0),
        Surrogate::Ranking => ranking_unchecked(f, y, loss),
    }
}

/// A subgradient of the chosen surrogate with respect to the scores.
pub fn surrogate_subgrad(kind: Surrogate, f: &[f64], y: &[i8], loss: &BaseLoss) -> Result<Vec<f64>> {
    let mut out = vec![0.0; f.len()];
    surrogate_subgrad_into(kind, f, y, loss, &mut out)?;
    Ok(out)
}

/// Writes the subgradient into `out` (overwriting it).
pub fn surrogate_subgrad_into(
    kind: Surrogate,
    f: &[f64],
    y: &[i8],
    loss: &BaseLoss,
    out: &mut [f64],
) -> Result<()> {
    check_scores(f, y)?;
    check_len(f.len(), out.len())?;
    if kind == Surrogate::Ranking && is_degenerate(y) {
        return Err(MlcError::Degenerate);
    }
    subgrad_unchecked(kind, f, y, loss, out);
    Ok(())
}

pub(crate) fn subgrad_unchecked(kind: Surrogate, f: &[f64], y: &[i8], loss: &BaseLoss, out: &mut [f64]) {
    out.iter_mut().for_each(|g| *g = 0.0);
    match kind {
        Surrogate::Hamming => {
            let inv_c = 1.0 / y.len() as f64;
            for ((g, &fj), &yj) in out.iter_mut().zip(f).zip(y) {
                let yj = f64::from(yj);
                *g = inv_c * yj * loss.deriv(yj * fj);
            }
        }
        Surrogate::Subset => {
            let (_, j) = subset_unchecked(f, y, loss);
            let yj = f64::from(y[j]);
            out[j] = yj * loss.deriv(yj * f[j]);
        }
        Surrogate::Ranking => {
            let (np, nq) = cardinalities(y);
            let w = 1.0 / (np * nq) as f64;
            for p in (0..y.len()).filter(|&j| y[j] > 0) {
                for q in (0..y.len()).filter(|&j| y[j] < 0) {
                    let d = w * loss.deriv(f[p] - f[q]);
                    out[p] += d;
                    out[q] -= d;
                }
            }
        }
    }
}
