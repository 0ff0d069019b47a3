//! Dataset model, the two ingestion formats, z-score normalization and
//! seeded k-fold splitting.
//!
//! The sparse text format is one sample per line:
//!
//! ```text
//! [l1,l2,...] idx:val idx:val ...   # optional comment
//! ```
//!
//! The leading comma-separated integers are 0-based ids of the relevant
//! labels; the field may be empty (the line then starts with whitespace or
//! directly with a feature). Feature indices are used as given. A comment of
//! the form `# mlc n_labels=C n_features=D` declares the shape when the caller
//! does not.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MlcError, Result};

const SHAPE_HINT: &str = "# mlc ";

/// Borrowed view of one sparse row.
#[derive(Clone, Copy, Debug)]
pub struct SparseRow<'a> {
    pub indices: &'a [u32],
    pub values: &'a [f64],
}

impl SparseRow<'_> {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().map(|&i| i as usize).zip(self.values.iter().copied())
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Compressed sparse rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
    n_cols: usize,
}

impl SparseMatrix {
    /// Builds a matrix from per-row `(index, value)` lists. Rows are sorted,
    /// explicit zeros dropped; a repeated index is an error.
    pub fn from_rows(rows: Vec<Vec<(u32, f64)>>, n_cols: usize) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for (r, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(i, _)| i);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(MlcError::invalid(format!("row {r}: duplicate feature index {}", w[0].0)));
                }
            }
            for (i, v) in row {
                if i as usize >= n_cols {
                    return Err(MlcError::invalid(format!("row {r}: feature index {i} >= {n_cols}")));
                }
                if !v.is_finite() {
                    return Err(MlcError::invalid(format!("row {r}: non-finite value {v}")));
                }
                if v == 0.0 {
                    continue;
                }
                indices.push(i);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(SparseMatrix {
            indptr,
            indices,
            values,
            n_cols,
        })
    }

    pub fn from_dense(rows: &[Vec<f64>], n_cols: usize) -> Result<Self> {
        let sparse = rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(i, &v)| (i as u32, v))
                    .collect()
            })
            .collect();
        SparseMatrix::from_rows(sparse, n_cols)
    }

    pub fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> SparseRow<'_> {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        SparseRow {
            indices: &self.indices[a..b],
            values: &self.values[a..b],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = SparseRow<'_>> {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows()
            .map(|row| {
                let mut d = vec![0.0; self.n_cols];
                for (i, v) in row.iter() {
                    d[i] = v;
                }
                d
            })
            .collect()
    }
}

/// Where a dataset came from and what was done to it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub format: String,
    pub normalization: String,
}

/// Features (n x d, sparse) plus a dense n x c label matrix over {-1, +1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: SparseMatrix,
    labels: Vec<i8>,
    n_labels: usize,
    pub label_names: Option<Vec<String>>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(features: SparseMatrix, labels: Vec<i8>, n_labels: usize) -> Result<Self> {
        let n = features.n_rows();
        if n == 0 {
            return Err(MlcError::invalid("dataset has no samples"));
        }
        if features.n_cols() == 0 {
            return Err(MlcError::invalid("dataset has no features"));
        }
        if n_labels == 0 {
            return Err(MlcError::invalid("dataset has no labels"));
        }
        if labels.len() != n * n_labels {
            return Err(MlcError::Dimension {
                expected: n * n_labels,
                got: labels.len(),
            });
        }
        if let Some(bad) = labels.iter().find(|&&v| v != 1 && v != -1) {
            return Err(MlcError::invalid(format!("label entry {bad} is not -1 or +1")));
        }
        Ok(Dataset {
            features,
            labels,
            n_labels,
            label_names: None,
            provenance: Provenance::default(),
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn n_samples(&self) -> usize {
        self.features.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn features(&self) -> &SparseMatrix {
        &self.features
    }

    pub fn row(&self, i: usize) -> SparseRow<'_> {
        self.features.row(i)
    }

    pub fn labels_of(&self, i: usize) -> &[i8] {
        &self.labels[i * self.n_labels..(i + 1) * self.n_labels]
    }

    pub fn label_matrix(&self) -> &[i8] {
        &self.labels
    }

    /// Copies the listed rows, in order, into a new dataset.
    pub fn subset(&self, rows: &[usize]) -> Result<Dataset> {
        let mut sparse = Vec::with_capacity(rows.len());
        let mut labels = Vec::with_capacity(rows.len() * self.n_labels);
        for &i in rows {
            if i >= self.n_samples() {
                return Err(MlcError::invalid(format!("row {i} out of range")));
            }
            sparse.push(self.row(i).iter().map(|(j, v)| (j as u32, v)).collect());
            labels.extend_from_slice(self.labels_of(i));
        }
        let features = SparseMatrix::from_rows(sparse, self.n_features())?;
        let mut ds = Dataset::new(features, labels, self.n_labels)?;
        ds.label_names = self.label_names.clone();
        ds.provenance = self.provenance.clone();
        Ok(ds)
    }
}

/// Optional shape declarations for the sparse text format.
#[derive(Clone, Copy, Debug, Default)]
pub struct SvmOptions {
    pub n_labels: Option<usize>,
    pub n_features: Option<usize>,
}

pub fn load_multilabel_svm(path: impl AsRef<Path>, opts: SvmOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let ds = parse_multilabel_svm(&text, opts)?;
    Ok(ds.with_provenance(Provenance {
        source: path.display().to_string(),
        format: "svm".into(),
        normalization: "none".into(),
    }))
}

pub fn parse_multilabel_svm(text: &str, mut opts: SvmOptions) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut label_rows: Vec<Vec<usize>> = Vec::new();
    let mut max_label: Option<usize> = None;
    let mut max_feature: Option<u32> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if let Some(hint) = raw.strip_prefix(SHAPE_HINT) {
            apply_shape_hint(hint, &mut opts, lineno)?;
            continue;
        }
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace().peekable();
        let mut relevant = Vec::new();
        let starts_with_labels = !line.starts_with(char::is_whitespace)
            && tokens.peek().is_some_and(|t| !t.contains(':'));
        if starts_with_labels {
            let field = tokens.next().unwrap_or_default();
            for piece in field.split(',') {
                let id: usize = piece.parse().map_err(|_| MlcError::Parse {
                    line: lineno,
                    msg: format!("bad label id {piece:?}"),
                })?;
                if let Some(c) = opts.n_labels {
                    if id >= c {
                        return Err(MlcError::LabelRange {
                            line: lineno,
                            id,
                            n_labels: c,
                        });
                    }
                }
                max_label = Some(max_label.map_or(id, |m| m.max(id)));
                relevant.push(id);
            }
        }
        let mut feats = Vec::new();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| MlcError::Parse {
                line: lineno,
                msg: format!("expected idx:val, got {tok:?}"),
            })?;
            let idx: u32 = idx.parse().map_err(|_| MlcError::Parse {
                line: lineno,
                msg: format!("bad feature index {idx:?}"),
            })?;
            let val: f64 = val.parse().map_err(|_| MlcError::Parse {
                line: lineno,
                msg: format!("bad feature value {val:?}"),
            })?;
            if !val.is_finite() {
                return Err(MlcError::Parse {
                    line: lineno,
                    msg: format!("non-finite feature value {val}"),
                });
            }
            if let Some(d) = opts.n_features {
                if idx as usize >= d {
                    return Err(MlcError::Parse {
                        line: lineno,
                        msg: format!("feature index {idx} >= declared {d}"),
                    });
                }
            }
            max_feature = Some(max_feature.map_or(idx, |m| m.max(idx)));
            feats.push((idx, val));
        }
        feats.sort_by_key(|&(i, _)| i);
        if let Some(w) = feats.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(MlcError::Parse {
                line: lineno,
                msg: format!("duplicate feature index {}", w[0].0),
            });
        }
        rows.push(feats);
        label_rows.push(relevant);
    }

    if rows.is_empty() {
        return Err(MlcError::invalid("no samples in input"));
    }
    let c = opts
        .n_labels
        .or(max_label.map(|m| m + 1))
        .ok_or_else(|| MlcError::invalid("cannot infer label count: no labels present and none declared"))?;
    let d = opts
        .n_features
        .or(max_feature.map(|m| m as usize + 1))
        .ok_or_else(|| MlcError::invalid("cannot infer feature count: no features present and none declared"))?;

    let mut labels = vec![-1i8; rows.len() * c];
    for (i, rel) in label_rows.iter().enumerate() {
        for &j in rel {
            labels[i * c + j] = 1;
        }
    }
    let features = SparseMatrix::from_rows(rows, d)?;
    Dataset::new(features, labels, c)
}

fn apply_shape_hint(hint: &str, opts: &mut SvmOptions, line: usize) -> Result<()> {
    for kv in hint.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| MlcError::Parse {
            line,
            msg: format!("bad shape hint {kv:?}"),
        })?;
        let v: usize = v.parse().map_err(|_| MlcError::Parse {
            line,
            msg: format!("bad shape hint value {v:?}"),
        })?;
        match k {
            "n_labels" => {
                opts.n_labels.get_or_insert(v);
            }
            "n_features" => {
                opts.n_features.get_or_insert(v);
            }
            _ => {}
        }
    }
    Ok(())
}

/// Writes `ds` in the sparse text format, shape hint first. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_multilabel_svm<W: Write>(ds: &Dataset, mut out: W) -> io::Result<()> {
    writeln!(out, "{SHAPE_HINT}n_labels={} n_features={}", ds.n_labels(), ds.n_features())?;
    for i in 0..ds.n_samples() {
        let relevant: Vec<String> = ds
            .labels_of(i)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(j, _)| j.to_string())
            .collect();
        let mut line = relevant.join(",");
        for (j, v) in ds.row(i).iter() {
            line.push(' ');
            line.push_str(&format!("{j}:{v:?}"));
        }
        if relevant.is_empty() && !line.is_empty() {
            line.insert(0, ' ');
        } else if line.is_empty() {
            // a blank line would be skipped; an explicit zero keeps the sample
            line.push_str(" 0:0");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn save_multilabel_svm(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = io::BufWriter::new(file);
    write_multilabel_svm(ds, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Reads a headerless features CSV and a headerless labels CSV with the same
/// row count. Label cells must be -1 or +1 (or 1); with `map_zero_one` a 0
/// cell is read as -1.
pub fn load_dense_csv(
    features_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    map_zero_one: bool,
) -> Result<Dataset> {
    let features_path = features_path.as_ref();
    let x = read_numeric_csv(features_path)?;
    let y = read_numeric_csv(labels_path.as_ref())?;
    if x.len() != y.len() {
        return Err(MlcError::Dimension {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.is_empty() {
        return Err(MlcError::invalid("empty features file"));
    }
    let d = x[0].len();
    let c = y[0].len();
    let mut labels = Vec::with_capacity(y.len() * c);
    for (r, row) in y.iter().enumerate() {
        for &v in row {
            let l = match v {
                1.0 => 1,
                -1.0 => -1,
                v if v == 0.0 && map_zero_one => -1,
                v => {
                    return Err(MlcError::Parse {
                        line: r + 1,
                        msg: format!("label cell {v} not in {{-1, +1}}{}", if map_zero_one { " or {0, 1}" } else { "" }),
                    })
                }
            };
            labels.push(l);
        }
    }
    let features = SparseMatrix::from_dense(&x, d)?;
    Ok(Dataset::new(features, labels, c)?.with_provenance(Provenance {
        source: features_path.display().to_string(),
        format: "csv".into(),
        normalization: "none".into(),
    }))
}

fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|cell| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| MlcError::Parse {
                        line: r + 1,
                        msg: format!("non-numeric cell {cell:?} in {}", path.display()),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Per-feature mean and population standard deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZScoreStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Standard deviations below this leave the feature at 0 after centering.
pub const MIN_STD: f64 = 1e-12;

impl ZScoreStats {
    /// Statistics over every row of `ds`, implicit zeros included.
    pub fn fit(ds: &Dataset) -> Result<Self> {
        let n = ds.n_samples();
        if n < 2 {
            return Err(MlcError::invalid("normalization needs at least 2 samples"));
        }
        let d = ds.n_features();
        let mut sum = vec![0.0; d];
        let mut count = vec![0usize; d];
        for row in ds.features().rows() {
            for (j, v) in row.iter() {
                sum[j] += v;
                count[j] += 1;
            }
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
        let mut sq = vec![0.0; d];
        for row in ds.features().rows() {
            for (j, v) in row.iter() {
                let dv = v - mean[j];
                sq[j] += dv * dv;
            }
        }
        let std = (0..d)
            .map(|j| {
                let zeros = (n - count[j]) as f64;
                ((sq[j] + zeros * mean[j] * mean[j]) / n as f64).sqrt()
            })
            .collect();
        Ok(ZScoreStats { mean, std })
    }

    /// Applies `(x - mean) / std` to every entry (the result is dense).
    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        let d = ds.n_features();
        if self.mean.len() != d {
            return Err(MlcError::Dimension {
                expected: self.mean.len(),
                got: d,
            });
        }
        let mut dense = vec![0.0; d];
        let rows = ds
            .features()
            .rows()
            .map(|row| {
                dense.iter_mut().for_each(|v| *v = 0.0);
                for (j, v) in row.iter() {
                    dense[j] = v;
                }
                dense
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| (j as u32, self.transform(j, x)))
                    .filter(|&(_, v)| v != 0.0)
                    .collect()
            })
            .collect();
        let features = SparseMatrix::from_rows(rows, d)?;
        let mut out = Dataset::new(features, ds.label_matrix().to_vec(), ds.n_labels())?;
        out.label_names = ds.label_names.clone();
        out.provenance = ds.provenance.clone();
        out.provenance.normalization = "zscore".into();
        Ok(out)
    }

    #[inline]
    fn transform(&self, j: usize, x: f64) -> f64 {
        if self.std[j] < MIN_STD {
            0.0
        } else {
            (x - self.mean[j]) / self.std[j]
        }
    }
}

pub fn normalize_zscore(ds: &Dataset) -> Result<(Dataset, ZScoreStats)> {
    let stats = ZScoreStats::fit(ds)?;
    let out = stats.apply(ds)?;
    Ok((out, stats))
}

/// Assignment of each sample to one of `k` folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

/// Seeded shuffle followed by round-robin assignment.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(MlcError::invalid(format!("fold count {k} < 2")));
    }
    if k > n {
        return Err(MlcError::invalid(format!("fold count {k} exceeds sample count {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut assignments = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        assignments[i] = pos % k;
    }
    Ok(FoldPlan { k, assignments, seed })
}
