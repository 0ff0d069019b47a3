//! Experiment plumbing: single training runs, k-fold cross-validation over a
//! lambda grid, evaluation of saved models and bound sweeps. Reports carry
//! the fully resolved configuration so a run can be reproduced from its output.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{evaluate as evaluate_bound, BoundInputs, BoundName, BoundReport};
use crate::data::{make_folds, Dataset, FoldPlan, ZScoreStats};
use crate::error::{MlcError, Result};
use crate::loss::{hamming_loss_01, is_degenerate, ranking_loss_01, Surrogate};
use crate::model::{oracle_split, score_into, sign_labels, LinearModel};
use crate::optimizer::{objective, svrg_bb_train, TrainConfig, TrainTrace};

pub const DEFAULT_LAMBDA_GRID: [f64; 6] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationMode {
    None,
    /// z-score statistics fitted on each training fold only.
    #[default]
    PerFold,
    /// z-score statistics fitted once on the whole dataset before splitting.
    Global,
}

impl FromStr for NormalizationMode {
    type Err = MlcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(NormalizationMode::None),
            "per-fold" => Ok(NormalizationMode::PerFold),
            "global" => Ok(NormalizationMode::Global),
            _ => Err(MlcError::Unknown {
                what: "normalization mode",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Name written into every report row.
    pub dataset: String,
    pub lambda_grid: Vec<f64>,
    pub folds: usize,
    /// Seed of the fold assignment; the optimizer seed lives in `train`.
    pub seed: u64,
    /// Learner, base loss and optimizer settings; `lambda` is overridden per cell.
    pub train: TrainConfig,
    pub normalization: NormalizationMode,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            dataset: "dataset".into(),
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            folds: 3,
            seed: 0,
            train: TrainConfig::default(),
            normalization: NormalizationMode::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_grid.is_empty() {
            return Err(MlcError::invalid("lambda grid is empty"));
        }
        if let Some(bad) = self.lambda_grid.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(MlcError::invalid(format!("lambda {bad} must be finite and >= 0")));
        }
        if self.folds < 2 {
            return Err(MlcError::invalid(format!("fold count {} < 2", self.folds)));
        }
        self.train.validate()
    }

    fn config_for(&self, lambda: f64) -> TrainConfig {
        TrainConfig {
            lambda,
            ..self.train.clone()
        }
    }
}

/// Test-set measures of a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n_samples: usize,
    pub hamming: f64,
    pub subset_acc: f64,
    /// Mean over non-degenerate samples; `None` if every sample is degenerate.
    pub ranking: Option<f64>,
    /// Samples excluded from the ranking mean.
    pub degenerate_count: usize,
    /// Hamming loss under the per-sample oracle threshold, which reads the
    /// true labels. Diagnostic only.
    pub tstar_hamming: f64,
}

pub fn evaluate(model: &LinearModel, ds: &Dataset) -> Result<Metrics> {
    if model.n_features() != ds.n_features() || model.n_labels() != ds.n_labels() {
        return Err(MlcError::invalid(format!(
            "model expects d={}, c={} but data has d={}, c={}",
            model.n_features(),
            model.n_labels(),
            ds.n_features(),
            ds.n_labels()
        )));
    }
    let c = ds.n_labels();
    let mut f = vec![0.0; c];
    let (mut ham, mut exact, mut rank, mut tstar) = (0.0, 0usize, 0.0, 0.0);
    let (mut ranked, mut degenerate) = (0usize, 0usize);
    for i in 0..ds.n_samples() {
        score_into(model.weights(), c, model.n_features(), model.bias(), ds.row(i), &mut f);
        let y = ds.labels_of(i);
        let pred = sign_labels(&f);
        ham += hamming_loss_01(&pred, y)?;
        exact += usize::from(pred == y);
        match ranking_loss_01(&f, y)? {
            Some(r) => {
                rank += r;
                ranked += 1;
            }
            None => degenerate += 1,
        }
        tstar += oracle_split(&f, y).1 as f64 / c as f64;
    }
    let n = ds.n_samples() as f64;
    Ok(Metrics {
        n_samples: ds.n_samples(),
        hamming: ham / n,
        subset_acc: exact as f64 / n,
        ranking: (ranked > 0).then(|| rank / ranked as f64),
        degenerate_count: degenerate,
        tstar_hamming: tstar / n,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub model: LinearModel,
    pub trace: TrainTrace,
    /// Present when the spec asks for normalization; apply it to any data
    /// the model is later evaluated on.
    pub normalization: Option<ZScoreStats>,
    pub train_metrics: Metrics,
    pub test_metrics: Option<Metrics>,
}

/// Trains on all of `train` (normalized per `spec.normalization`, with
/// statistics from `train` only) and evaluates on `test` if given.
pub fn run_train(spec: &ExperimentSpec, lambda: f64, train: &Dataset, test: Option<&Dataset>) -> Result<TrainOutcome> {
    let cfg = spec.config_for(lambda);
    cfg.validate()?;
    let stats = match spec.normalization {
        NormalizationMode::None => None,
        _ => Some(ZScoreStats::fit(train)?),
    };
    let apply = |ds: &Dataset| -> Result<Dataset> {
        match &stats {
            Some(s) => s.apply(ds),
            None => Ok(ds.clone()),
        }
    };
    let train_n = apply(train)?;
    let (model, trace) = svrg_bb_train(&train_n, &cfg)?;
    let train_metrics = evaluate(&model, &train_n)?;
    let test_metrics = test.map(|t| apply(t).and_then(|t| evaluate(&model, &t))).transpose()?;
    Ok(TrainOutcome {
        model,
        trace,
        normalization: stats,
        train_metrics,
        test_metrics,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvCell {
    pub fold: usize,
    pub lambda: f64,
    pub train_objective: f64,
    pub hamming: f64,
    pub subset_acc: f64,
    pub ranking: Option<f64>,
    pub degenerate_count: usize,
}

/// Mean and population standard deviation over folds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    /// Folds that contributed (ranking skips folds with only degenerate samples).
    pub folds: usize,
}

impl MeanStd {
    fn of(values: &[f64]) -> Option<MeanStd> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(MeanStd {
            mean,
            std: var.sqrt(),
            folds: values.len(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSummary {
    pub lambda: f64,
    pub hamming: MeanStd,
    pub subset_acc: MeanStd,
    pub ranking: Option<MeanStd>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selected {
    pub lambda: f64,
    pub score: MeanStd,
}

/// Best lambda per measure by mean over folds (Hamming and ranking loss:
/// smallest; subset accuracy: largest; ties go to the smaller lambda).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub hamming: Selected,
    pub subset_acc: Selected,
    pub ranking: Option<Selected>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub config: ExperimentSpec,
    pub fold_sizes: Vec<usize>,
    /// Sorted by fold, then by position in the lambda grid.
    pub cells: Vec<CvCell>,
    /// One entry per grid value, in grid order.
    pub per_lambda: Vec<LambdaSummary>,
    pub selected: Selection,
}

pub const CV_CSV_HEADER: &str = "dataset,learner,lambda,fold,hamming,subset_acc,ranking,degenerate_count";

impl CvReport {
    /// Per-cell CSV. The first line is a `# config:` comment with the
    /// resolved experiment spec as JSON.
    pub fn to_csv(&self) -> Result<String> {
        let mut s = format!("# config: {}\n{CV_CSV_HEADER}\n", serde_json::to_string(&self.config)?);
        let learner = learner_label(self.config.train.learner);
        for cell in &self.cells {
            let ranking = cell.ranking.map(|r| format!("{r:?}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{:?},{},{:?},{:?},{},{}",
                csv_field(&self.config.dataset),
                learner,
                cell.lambda,
                cell.fold,
                cell.hamming,
                cell.subset_acc,
                ranking,
                cell.degenerate_count
            );
        }
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Plain-text summary: the per-measure selection and the fixed-lambda table.
    pub fn summary_table(&self) -> String {
        let mut s = String::new();
        let learner = learner_label(self.config.train.learner);
        let _ = writeln!(s, "{} / {} ({}-fold, seed {})", self.config.dataset, learner, self.config.folds, self.config.seed);
        let sel = &self.selected;
        let _ = writeln!(
            s,
            "selected: hamming {:.4} +- {:.4} (lambda {}), subset_acc {:.4} +- {:.4} (lambda {}){}",
            sel.hamming.score.mean,
            sel.hamming.score.std,
            sel.hamming.lambda,
            sel.subset_acc.score.mean,
            sel.subset_acc.score.std,
            sel.subset_acc.lambda,
            sel.ranking
                .as_ref()
                .map(|r| format!(", ranking {:.4} +- {:.4} (lambda {})", r.score.mean, r.score.std, r.lambda))
                .unwrap_or_default()
        );
        let _ = writeln!(s, "{:>10} {:>17} {:>17} {:>17}", "lambda", "hamming", "subset_acc", "ranking");
        for row in &self.per_lambda {
            let ranking = row
                .ranking
                .map(|r| format!("{:.4} +- {:.4}", r.mean, r.std))
                .unwrap_or_else(|| "n/a".into());
            let _ = writeln!(
                s,
                "{:>10} {:>17} {:>17} {:>17}",
                row.lambda,
                format!("{:.4} +- {:.4}", row.hamming.mean, row.hamming.std),
                format!("{:.4} +- {:.4}", row.subset_acc.mean, row.subset_acc.std),
                ranking
            );
        }
        s
    }
}

fn learner_label(s: Surrogate) -> &'static str {
    match s {
        Surrogate::Hamming => "A_h",
        Surrogate::Subset => "A_s",
        Surrogate::Ranking => "A_r",
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Train and test split of one fold, already normalized.
#[derive(Clone, Debug)]
pub struct FoldData {
    pub train: Dataset,
    pub test: Dataset,
    /// Statistics fitted on this fold's training rows (per-fold mode only).
    pub stats: Option<ZScoreStats>,
}

/// Splits `ds` per `plan` and normalizes per `spec.normalization`. In
/// per-fold mode the statistics never see the fold's test rows.
pub fn prepare_folds(spec: &ExperimentSpec, ds: &Dataset, plan: &FoldPlan) -> Result<Vec<FoldData>> {
    let base = match spec.normalization {
        NormalizationMode::Global => ZScoreStats::fit(ds)?.apply(ds)?,
        _ => ds.clone(),
    };
    (0..plan.k)
        .into_par_iter()
        .map(|fold| {
            let train_idx = plan.train_indices(fold);
            let test_idx = plan.test_indices(fold);
            if train_idx.is_empty() || test_idx.is_empty() {
                return Err(MlcError::invalid(format!("fold {fold} is too small to train and evaluate")));
            }
            let train = base.subset(&train_idx)?;
            let test = base.subset(&test_idx)?;
            Ok(match spec.normalization {
                NormalizationMode::PerFold => {
                    let stats = ZScoreStats::fit(&train)?;
                    FoldData {
                        train: stats.apply(&train)?,
                        test: stats.apply(&test)?,
                        stats: Some(stats),
                    }
                }
                _ => FoldData {
                    train,
                    test,
                    stats: None,
                },
            })
        })
        .collect()
}

/// k-fold cross-validation over the lambda grid. Cells run in parallel on
/// the current rayon pool; output does not depend on the worker count.
pub fn run_cv(spec: &ExperimentSpec, ds: &Dataset) -> Result<CvReport> {
    spec.validate()?;
    let plan = make_folds(ds.n_samples(), spec.folds, spec.seed)?;
    let folds = prepare_folds(spec, ds, &plan)?;
    let grid = &spec.lambda_grid;
    let jobs: Vec<(usize, usize)> = (0..plan.k).flat_map(|f| (0..grid.len()).map(move |l| (f, l))).collect();
    let cells: Vec<CvCell> = jobs
        .par_iter()
        .map(|&(fold, li)| {
            let cfg = spec.config_for(grid[li]);
            let data = &folds[fold];
            let (model, _) = svrg_bb_train(&data.train, &cfg)?;
            let m = evaluate(&model, &data.test)?;
            Ok(CvCell {
                fold,
                lambda: grid[li],
                train_objective: objective(&model, &data.train, &cfg)?,
                hamming: m.hamming,
                subset_acc: m.subset_acc,
                ranking: m.ranking,
                degenerate_count: m.degenerate_count,
            })
        })
        .collect::<Result<_>>()?;

    let per_lambda = summarize(grid, &cells);
    let selected = select(&per_lambda);
    Ok(CvReport {
        config: spec.clone(),
        fold_sizes: plan.sizes(),
        cells,
        per_lambda,
        selected,
    })
}

/// Aggregates cells (ordered fold-major, grid-minor) per grid value.
pub fn summarize(grid: &[f64], cells: &[CvCell]) -> Vec<LambdaSummary> {
    (0..grid.len())
        .map(|li| {
            let mine: Vec<&CvCell> = cells.iter().skip(li).step_by(grid.len()).collect();
            let collect = |g: fn(&CvCell) -> Option<f64>| mine.iter().filter_map(|c| g(c)).collect::<Vec<f64>>();
            LambdaSummary {
                lambda: grid[li],
                hamming: MeanStd::of(&collect(|c| Some(c.hamming))).expect("at least one fold"),
                subset_acc: MeanStd::of(&collect(|c| Some(c.subset_acc))).expect("at least one fold"),
                ranking: MeanStd::of(&collect(|c| c.ranking)),
            }
        })
        .collect()
}

/// Pure function of the per-lambda table.
pub fn select(rows: &[LambdaSummary]) -> Selection {
    fn best(rows: &[LambdaSummary], get: impl Fn(&LambdaSummary) -> Option<MeanStd>, larger: bool) -> Option<Selected> {
        let mut out: Option<Selected> = None;
        // Ascending lambda order so strict improvement keeps the smaller lambda on ties.
        let mut order: Vec<&LambdaSummary> = rows.iter().collect();
        order.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        for row in order {
            let Some(score) = get(row) else { continue };
            let better = match &out {
                None => true,
                Some(cur) if larger => score.mean > cur.score.mean,
                Some(cur) => score.mean < cur.score.mean,
            };
            if better {
                out = Some(Selected {
                    lambda: row.lambda,
                    score,
                });
            }
        }
        out
    }
    Selection {
        hamming: best(rows, |r| Some(r.hamming), false).expect("nonempty grid"),
        subset_acc: best(rows, |r| Some(r.subset_acc), true).expect("nonempty grid"),
        ranking: best(rows, |r| r.ranking, false),
    }
}

/// Fraction of samples whose labels are all -1; the subset accuracy of the
/// zero model.
pub fn all_negative_rate(ds: &Dataset) -> f64 {
    let k = (0..ds.n_samples())
        .filter(|&i| ds.labels_of(i).iter().all(|&v| v < 0))
        .count();
    k as f64 / ds.n_samples() as f64
}

/// Samples usable by the ranking measures.
pub fn non_degenerate_count(ds: &Dataset) -> usize {
    (0..ds.n_samples()).filter(|&i| !is_degenerate(ds.labels_of(i))).count()
}

/// One row of a bound sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub c: usize,
    pub n: usize,
    #[serde(flatten)]
    pub report: BoundReport,
}

/// Evaluates every bound in `names` on the grid `cs x ns`, other inputs
/// taken from `base`. Rows are ordered by name, then c, then n.
pub fn bound_sweep(names: &[BoundName], base: &BoundInputs, cs: &[usize], ns: &[usize]) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::with_capacity(names.len() * cs.len() * ns.len());
    for &name in names {
        for &c in cs {
            for &n in ns {
                let report = evaluate_bound(name, &BoundInputs { c, n, ..*base })?;
                rows.push(BoundRow { c, n, report });
            }
        }
    }
    Ok(rows)
}

pub const BOUND_CSV_HEADER: &str = "bound,c,n,risk_term,complexity_term,confidence_term,total,note";

pub fn bound_rows_csv(rows: &[BoundRow]) -> String {
    let mut s = format!("{BOUND_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:?},{:?},{:?},{:?},{}",
            r.report.bound_name,
            r.c,
            r.n,
            r.report.risk_term,
            r.report.complexity_term,
            r.report.confidence_term,
            r.report.total,
            r.report.note.as_deref().map(csv_field).unwrap_or_default()
        );
    }
    s
}
