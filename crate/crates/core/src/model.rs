//! Linear score function `f(x) = W^T x`, sign classification and the oracle
//! prefix threshold.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::SparseRow;
use crate::error::{check_len, MlcError, Result};
use crate::loss::{hamming_loss_01, LabelVector};

const MODEL_MAGIC: &str = "mlc-linear-model v1";

/// Weight matrix `W` of shape `rows x c`, stored row-major. With `bias` the
/// last row multiplies an implicit constant feature 1, so `rows = d + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    n_features: usize,
    n_labels: usize,
    bias: bool,
    weights: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(n_features: usize, n_labels: usize, bias: bool) -> Self {
        let rows = n_features + usize::from(bias);
        LinearModel {
            n_features,
            n_labels,
            bias,
            weights: vec![0.0; rows * n_labels],
        }
    }

    pub fn from_weights(n_features: usize, n_labels: usize, bias: bool, weights: Vec<f64>) -> Result<Self> {
        let rows = n_features + usize::from(bias);
        check_len(rows * n_labels, weights.len())?;
        if n_labels == 0 || n_features == 0 {
            return Err(MlcError::invalid("model needs at least one feature and one label"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(MlcError::invalid("non-finite weight"));
        }
        Ok(LinearModel {
            n_features,
            n_labels,
            bias,
            weights,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn bias(&self) -> bool {
        self.bias
    }

    /// Rows of `W`, including the bias row.
    pub fn n_rows(&self) -> usize {
        self.n_features + usize::from(self.bias)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }


    /// `(sum_j ||w_j||^2)^(1/2)`, the bias row included.
    pub fn frobenius_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn score(&self, x: SparseRow<'_>) -> Result<Vec<f64>> {
        if let Some(&last) = x.indices.last() {
            if last as usize >= self.n_features {
                return Err(MlcError::Dimension {
                    expected: self.n_features,
                    got: last as usize + 1,
                });
            }
        }
        let mut out = vec![0.0; self.n_labels];
        score_into(&self.weights, self.n_labels, self.n_features, self.bias, x, &mut out);
        Ok(out)
    }

    pub fn score_dense(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_features, x.len())?;
        let c = self.n_labels;
        let mut out = vec![0.0; c];
        for (k, &xk) in x.iter().enumerate() {
            if xk != 0.0 {
                let w = &self.weights[k * c..(k + 1) * c];
                out.iter_mut().zip(w).for_each(|(o, wj)| *o += xk * wj);
            }
        }
        if self.bias {
            let w = &self.weights[self.n_features * c..];
            out.iter_mut().zip(w).for_each(|(o, wj)| *o += wj);
        }
        Ok(out)
    }

    /// Text form: a header, the shape, then one line per row of `W`. Values
    /// use the shortest decimal that parses back to the same `f64`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MODEL_MAGIC}");
        let _ = writeln!(s, "d {}", self.n_features);
        let _ = writeln!(s, "c {}", self.n_labels);
        let _ = writeln!(s, "bias {}", u8::from(self.bias));
        for row in self.weights.chunks(self.n_labels) {
            let line: Vec<String> = row.iter().map(|w| format!("{w:?}")).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        let perr = |line: usize, msg: &str| MlcError::Parse {
            line,
            msg: msg.to_string(),
        };
        match lines.next() {
            Some((_, l)) if l == MODEL_MAGIC => {}
            _ => return Err(perr(1, "missing model header")),
        }
        let mut field = |name: &str| -> Result<usize> {
            let (ln, l) = lines.next().ok_or_else(|| perr(0, "truncated model"))?;
            l.strip_prefix(name)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| perr(ln, &format!("expected `{name} <int>`")))
        };
        let d = field("d ")?;
        let c = field("c ")?;
        let bias = match field("bias ")? {
            0 => false,
            1 => true,
            _ => return Err(perr(4, "bias must be 0 or 1")),
        };
        let mut weights = Vec::with_capacity((d + 1) * c);
        for (ln, l) in lines {
            if l.trim().is_empty() {
                continue;
            }
            let before = weights.len();
            for tok in l.split_whitespace() {
                weights.push(tok.parse::<f64>().map_err(|_| perr(ln, &format!("bad weight {tok:?}")))?);
            }
            if weights.len() - before != c {
                return Err(perr(ln, &format!("expected {c} weights per row")));
            }
        }
        LinearModel::from_weights(d, c, bias, weights)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        LinearModel::from_text(&fs::read_to_string(path)?)
    }
}

/// `out = W^T x` for a row-major `W` with `c` columns. Indices are assumed in range.
#[inline]
pub(crate) fn score_into(w: &[f64], c: usize, n_features: usize, bias: bool, x: SparseRow<'_>, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (k, xk) in x.iter() {
        let row = &w[k * c..(k + 1) * c];
        out.iter_mut().zip(row).for_each(|(o, wj)| *o += xk * wj);
    }
    if bias {
        let row = &w[n_features * c..(n_features + 1) * c];
        out.iter_mut().zip(row).for_each(|(o, wj)| *o += wj);
    }
}

/// `+1` where `f_j > 0`, else `-1` (so `sgn(0) = sgn(-0) = -1`).
pub fn classify_sign(f: &[f64]) -> Result<LabelVector> {
    if f.iter().any(|v| !v.is_finite()) {
        return Err(MlcError::invalid("non-finite score"));
    }
    LabelVector::new(sign_labels(f))
}

pub(crate) fn sign_labels(f: &[f64]) -> Vec<i8> {
    f.iter().map(|&v| if v > 0.0 { 1 } else { -1 }).collect()
}

/// The `k` top-scored labels (in `order`) are predicted relevant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdSplit {
    pub k: usize,
    pub order: Vec<usize>,
}

impl ThresholdSplit {
    pub fn prediction(&self) -> Vec<i8> {
        let mut pred = vec![-1i8; self.order.len()];
        for &j in &self.order[..self.k] {
            pred[j] = 1;
        }
        pred
    }
}

/// Label indices sorted by score, highest first; equal scores keep index order.
pub fn score_order(f: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&a, &b| f[b].total_cmp(&f[a]));
    order
}

/// Oracle threshold: the prefix split of the score order with the smallest
/// Hamming loss against the true labels (smallest `k` on ties). This reads
/// `y` and is an evaluation device only.
pub fn oracle_threshold(f: &[f64], y: &[i8]) -> Result<(ThresholdSplit, LabelVector, f64)> {
    check_len(y.len(), f.len())?;
    if f.iter().any(|v| !v.is_finite()) {
        return Err(MlcError::invalid("non-finite score"));
    }
    let (split, mismatches) = oracle_split(f, y);
    let pred = LabelVector::new(split.prediction())?;
    Ok((split, pred, mismatches as f64 / y.len() as f64))
}

/// Returns the best split and its mismatch count. One pass: moving label
/// `order[k]` into the relevant set flips exactly one prediction.
pub(crate) fn oracle_split(f: &[f64], y: &[i8]) -> (ThresholdSplit, usize) {
    let order = score_order(f);
    // k = 0 predicts everything irrelevant: every relevant label is wrong.
    let mut mismatches = y.iter().filter(|&&v| v > 0).count();
    let (mut best_k, mut best) = (0, mismatches);
    for (k, &j) in order.iter().enumerate() {
        if y[j] > 0 {
            mismatches -= 1;
        } else {
            mismatches += 1;
        }
        if mismatches < best {
            best = mismatches;
            best_k = k + 1;
        }
    }
    (ThresholdSplit { k: best_k, order }, best)
}

/// Hamming loss of an arbitrary prefix split, evaluated from scratch.
pub fn prefix_split_loss(order: &[usize], k: usize, y: &[i8]) -> Result<f64> {
    let split = ThresholdSplit {
        k,
        order: order.to_vec(),
    };
    hamming_loss_01(&split.prediction(), y)
}
