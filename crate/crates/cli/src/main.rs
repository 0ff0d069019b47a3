//! `mlc`: train, evaluate and cross-validate multi-label linear learners,
//! print generalization bounds and run loss-inequality campaigns.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when a lemma
//! campaign or replay finds a violation. `MLC_WORKERS` sets the worker count.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mlc_core::bounds::{diagnostic_bound, BoundInputs, BoundName};
use mlc_core::data::{load_dense_csv, load_multilabel_svm, SvmOptions, ZScoreStats};
use mlc_core::harness::{
    bound_rows_csv, bound_sweep, evaluate, run_cv, run_train, BoundRow, ExperimentSpec, NormalizationMode,
    DEFAULT_LAMBDA_GRID,
};
use mlc_core::optimizer::BbScale;
use mlc_core::relations::{check_all, fuzz_campaign, CampaignConfig, CaseFailure, RelationCase, ScoreDist};
use mlc_core::{BaseLoss, BaseLossKind, Dataset, LinearModel, MlcError, TrainConfig};
use serde_json::{json, Value};

const EXIT_USAGE: u8 = 1;
const EXIT_VIOLATION: u8 = 2;

#[derive(Parser)]
#[command(name = "mlc", version, about = "Multi-label surrogate-loss learners, bounds and loss-inequality checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model on a dataset and report train (and test) metrics as JSON.
    Train(TrainArgs),
    /// Evaluate a saved model on a dataset and print metrics as JSON.
    Eval(EvalArgs),
    /// k-fold cross-validation over a lambda grid.
    Cv(CvArgs),
    /// Evaluate named generalization bounds, optionally sweeping c and n.
    Bounds(BoundsArgs),
    /// Check the inequalities between the losses on random or replayed cases.
    VerifyLemmas(VerifyArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Multi-label sparse text file (`l1,l2 idx:val ...`).
    #[arg(long, conflicts_with_all = ["features", "labels"])]
    data: Option<PathBuf>,
    /// Headerless dense features CSV; needs --labels.
    #[arg(long, requires = "labels")]
    features: Option<PathBuf>,
    /// Headerless dense labels CSV with -1/+1 cells.
    #[arg(long, requires = "features")]
    labels: Option<PathBuf>,
    /// Read 0 label cells in the labels CSV as -1.
    #[arg(long)]
    zero_one: bool,
    /// Declared label count for the sparse format.
    #[arg(long)]
    n_labels: Option<usize>,
    /// Declared feature count for the sparse format.
    #[arg(long)]
    n_features: Option<usize>,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset, CliError> {
        match (&self.data, &self.features, &self.labels) {
            (Some(p), _, _) => Ok(load_svm(p, self.n_labels, self.n_features)?),
            (None, Some(x), Some(y)) => Ok(load_dense_csv(x, y, self.zero_one)?),
            _ => Err(CliError::usage("give --data or --features with --labels")),
        }
    }

    fn name(&self) -> String {
        self.data
            .as_ref()
            .or(self.features.as_ref())
            .and_then(|p| p.file_stem())
            .map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned())
    }
}

fn load_svm(path: &Path, n_labels: Option<usize>, n_features: Option<usize>) -> mlc_core::Result<Dataset> {
    load_multilabel_svm(path, SvmOptions { n_labels, n_features })
}

#[derive(Args)]
struct LearnerArgs {
    /// Learner: hamming (A_h), subset (A_s) or ranking (A_r).
    #[arg(long, default_value = "hamming")]
    learner: String,
    /// Base loss: hinge, logistic_ln or logistic_log2.
    #[arg(long, default_value = "hinge")]
    loss: String,
    /// Initial SVRG-BB step size.
    #[arg(long, default_value_t = 0.05)]
    eta0: f64,
    /// Outer epochs.
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    /// Inner-loop length (default: twice the effective sample count).
    #[arg(long)]
    inner_len: Option<usize>,
    /// Optimizer seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append a constant-1 feature.
    #[arg(long)]
    bias: bool,
    /// Stop when the full gradient norm drops below 1e-6.
    #[arg(long)]
    early_stop: bool,
    /// Divisor of the Barzilai-Borwein step: inner-len or rows.
    #[arg(long, default_value = "inner-len")]
    bb_scale: String,
    /// z-score normalization: none, per-fold or global.
    #[arg(long, default_value = "per-fold")]
    normalization: String,
    /// Normalize the whole dataset once before splitting (same as --normalization global).
    #[arg(long)]
    paper_mode: bool,
}

impl LearnerArgs {
    fn config(&self, lambda: f64) -> Result<TrainConfig, CliError> {
        Ok(TrainConfig {
            learner: self.learner.parse()?,
            lambda,
            eta0: self.eta0,
            inner_len: self.inner_len,
            outer_epochs: self.epochs,
            seed: self.seed,
            base_loss: BaseLoss::new(self.loss.parse()?),
            bias: self.bias,
            early_stop: self.early_stop,
            bb_scale: self.bb_scale.parse::<BbScale>()?,
        })
    }

    fn normalization(&self) -> Result<NormalizationMode, CliError> {
        if self.paper_mode {
            return Ok(NormalizationMode::Global);
        }
        Ok(self.normalization.parse()?)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    learner: LearnerArgs,
    /// Regularization weight.
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    /// Held-out sparse text file, normalized with the training statistics.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Where to save the model; normalization statistics go to `<path>.norm.json`.
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Per-epoch trace as CSV.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Model file written by `train`.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Normalization statistics to apply first (default: `<model>.norm.json` if present).
    #[arg(long)]
    norm: Option<PathBuf>,
    /// Evaluate the raw features even if statistics exist.
    #[arg(long, conflicts_with = "norm")]
    no_norm: bool,
}

#[derive(Args)]
struct CvArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    learner: LearnerArgs,
    /// Comma-separated lambda grid.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LAMBDA_GRID.to_vec())]
    lambda_grid: Vec<f64>,
    /// Number of folds.
    #[arg(long, default_value_t = 3)]
    folds: usize,
    /// Seed of the fold assignment.
    #[arg(long, default_value_t = 0)]
    fold_seed: u64,
    /// Dataset name written into the report (default: file stem).
    #[arg(long)]
    name: Option<String>,
    /// Per-cell CSV report.
    #[arg(long)]
    csv_out: Option<PathBuf>,
    /// Full JSON report.
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Bound name, repeatable (default: all).
    #[arg(long = "name")]
    names: Vec<String>,
    /// Base loss supplying rho when --rho is absent.
    #[arg(long, default_value = "hinge")]
    loss: String,
    /// Lipschitz constant of the base loss.
    #[arg(long)]
    rho: Option<f64>,
    /// Bound B of the base loss on the hypothesis class.
    #[arg(long)]
    b: f64,
    /// Number of labels.
    #[arg(long, default_value_t = 1)]
    c: usize,
    /// Sample size.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Norm bound Lambda of the weights.
    #[arg(long = "norm-bound", default_value_t = 1.0)]
    norm_bound: f64,
    /// Bound r on the feature norm.
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Failure probability.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Empirical surrogate risk.
    #[arg(long, default_value_t = 0.0)]
    risk: f64,
    /// `c=A..B`, `n=A..B` or comma lists such as `n=100,1000`; repeatable.
    #[arg(long)]
    sweep: Vec<String>,
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Take Lambda and r from this trained model on --data (diagnostic only).
    #[arg(long, requires = "data")]
    model: Option<PathBuf>,
    /// Dataset for diagnostic mode.
    #[arg(long, requires = "model")]
    data: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Number of random cases.
    #[arg(long, default_value_t = 1_000_000)]
    cases: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Score distribution: normal, near-zero, ties or mixed.
    #[arg(long, default_value = "normal")]
    dist: String,
    #[arg(long, default_value_t = 1)]
    c_min: usize,
    #[arg(long, default_value_t = 12)]
    c_max: usize,
    /// Base loss: hinge or logistic_log2 (logistic_ln needs --allow-non-dominating).
    #[arg(long, default_value = "hinge")]
    loss: String,
    /// Accept base losses that do not upper-bound the 0/1 loss.
    #[arg(long)]
    allow_non_dominating: bool,
    #[arg(long, default_value_t = 10_000)]
    chunk_size: u64,
    /// Replay cases from a JSON file instead of sampling.
    #[arg(long)]
    repro: Option<PathBuf>,
    /// Write failing cases as JSON for --repro.
    #[arg(long)]
    failures_out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(MlcError),
    Violation(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<MlcError> for CliError {
    fn from(e: MlcError) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("json: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = init_workers() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Cv(a) => cv(a),
        Command::Bounds(a) => bounds(a),
        Command::VerifyLemmas(a) => verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(EXIT_VIOLATION)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn init_workers() -> Result<(), String> {
    let Ok(raw) = std::env::var("MLC_WORKERS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("MLC_WORKERS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

/// Writes to stdout; a reader that closed the pipe early is not an error.
fn emit(text: &str) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json(v: &Value) -> Result<(), CliError> {
    emit(&(serde_json::to_string_pretty(v)? + "\n"))
}

fn norm_path(model: &Path) -> PathBuf {
    let mut s = model.as_os_str().to_owned();
    s.push(".norm.json");
    PathBuf::from(s)
}

fn train(a: TrainArgs) -> Result<(), CliError> {
    let ds = a.data.load()?;
    let test = a
        .test
        .as_ref()
        .map(|p| load_svm(p, Some(ds.n_labels()), Some(ds.n_features())))
        .transpose()?;
    let spec = ExperimentSpec {
        dataset: a.data.name(),
        lambda_grid: vec![a.lambda],
        folds: 2,
        seed: 0,
        train: a.learner.config(a.lambda)?,
        normalization: a.learner.normalization()?,
    };
    let out = run_train(&spec, a.lambda, &ds, test.as_ref())?;
    if let Some(p) = &a.model_out {
        out.model.save(p)?;
        if let Some(stats) = &out.normalization {
            fs::write(norm_path(p), serde_json::to_string(stats)?)?;
        }
    }
    if let Some(p) = &a.trace_out {
        fs::write(p, out.trace.to_csv())?;
    }
    print_json(&json!({
        "config": spec.train,
        "dataset": spec.dataset,
        "normalization": spec.normalization,
        "final_objective": out.trace.final_objective,
        "epochs": out.trace.records.len(),
        "weight_norm": out.model.frobenius_norm(),
        "train": out.train_metrics,
        "test": out.test_metrics,
    }))
}

fn eval(a: EvalArgs) -> Result<(), CliError> {
    let model = LinearModel::load(&a.model)?;
    let ds = a.data.load()?;
    let stats_path = match (&a.norm, a.no_norm) {
        (Some(p), _) => Some(p.clone()),
        (None, false) => Some(norm_path(&a.model)).filter(|p| p.exists()),
        (None, true) => None,
    };
    let ds = match &stats_path {
        Some(p) => serde_json::from_str::<ZScoreStats>(&fs::read_to_string(p)?)?.apply(&ds)?,
        None => ds,
    };
    let metrics = evaluate(&model, &ds)?;
    print_json(&json!({
        "model": a.model,
        "dataset": a.data.name(),
        "normalization": stats_path,
        "metrics": metrics,
    }))
}

fn cv(a: CvArgs) -> Result<(), CliError> {
    let ds = a.data.load()?;
    let spec = ExperimentSpec {
        dataset: a.name.clone().unwrap_or_else(|| a.data.name()),
        lambda_grid: a.lambda_grid.clone(),
        folds: a.folds,
        seed: a.fold_seed,
        train: a.learner.config(0.0)?,
        normalization: a.learner.normalization()?,
    };
    spec.validate()?;
    let report = run_cv(&spec, &ds)?;
    if let Some(p) = &a.csv_out {
        fs::write(p, report.to_csv()?)?;
    }
    if let Some(p) = &a.json_out {
        fs::write(p, report.to_json()?)?;
    }
    emit(&report.summary_table())
}

/// Parses `c=1..200`, `n=100,1000` into the swept parameter and its values.
fn parse_sweep(s: &str) -> Result<(char, Vec<usize>), CliError> {
    let bad = || CliError::usage(format!("bad sweep {s:?}; expected c=A..B, n=A..B or a comma list"));
    let (key, range) = s.split_once('=').ok_or_else(bad)?;
    let key = match key.trim() {
        "c" => 'c',
        "n" => 'n',
        _ => return Err(bad()),
    };
    let values: Vec<usize> = if let Some((lo, hi)) = range.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        (lo..=hi).collect()
    } else {
        range
            .split(',')
            .map(|v| v.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok((key, values))
}

fn bounds(a: BoundsArgs) -> Result<(), CliError> {
    let names: Vec<BoundName> = if a.names.is_empty() {
        BoundName::ALL.to_vec()
    } else {
        a.names.iter().map(|n| n.parse()).collect::<Result<_, _>>()?
    };
    let rho = match a.rho {
        Some(r) => r,
        None => BaseLoss::new(a.loss.parse::<BaseLossKind>()?).rho(),
    };
    if !matches!(a.format.as_str(), "csv" | "json") {
        return Err(CliError::usage(format!("unknown format {:?}; use csv or json", a.format)));
    }

    if let (Some(model_path), Some(data_path)) = (&a.model, &a.data) {
        if !a.sweep.is_empty() {
            return Err(CliError::usage("--sweep does not apply to diagnostic bounds"));
        }
        let model = LinearModel::load(model_path)?;
        let ds = load_svm(data_path, Some(model.n_labels()), Some(model.n_features()))?;
        let reports = names
            .iter()
            .map(|&name| diagnostic_bound(name, &model, &ds, rho, a.b, a.delta, a.risk))
            .collect::<mlc_core::Result<Vec<_>>>()?;
        let rows: Vec<_> = reports
            .into_iter()
            .map(|report| BoundRow {
                c: ds.n_labels(),
                n: ds.n_samples(),
                report,
            })
            .collect();
        return emit_bounds(&a.format, &rows);
    }

    let mut cs = vec![a.c];
    let mut ns = vec![a.n];
    for s in &a.sweep {
        match parse_sweep(s)? {
            ('c', v) => cs = v,
            (_, v) => ns = v,
        }
    }
    let base = BoundInputs {
        rho,
        b: a.b,
        c: a.c,
        n: a.n,
        lambda: a.norm_bound,
        r: a.r,
        delta: a.delta,
        empirical_risk: a.risk,
    };
    let rows = bound_sweep(&names, &base, &cs, &ns)?;
    emit_bounds(&a.format, &rows)
}

fn emit_bounds(format: &str, rows: &[BoundRow]) -> Result<(), CliError> {
    if format == "json" {
        emit(&(serde_json::to_string_pretty(rows)? + "\n"))
    } else {
        emit(&bound_rows_csv(rows))
    }
}

/// Accepts a case, a recorded failure, or an array of either.
fn read_cases(path: &Path) -> Result<Vec<RelationCase>, CliError> {
    let v: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let one = |v: Value| -> Result<RelationCase, CliError> {
        if v.get("case").is_some() {
            Ok(serde_json::from_value::<CaseFailure>(v)?.case)
        } else {
            Ok(serde_json::from_value(v)?)
        }
    };
    match v {
        Value::Array(items) => items.into_iter().map(one).collect(),
        v => Ok(vec![one(v)?]),
    }
}

fn verify(a: VerifyArgs) -> Result<(), CliError> {
    if let Some(path) = &a.repro {
        let cases = read_cases(path)?;
        let mut violated = 0;
        let mut out = Vec::with_capacity(cases.len());
        for case in &cases {
            let verdicts = check_all(case);
            violated += usize::from(verdicts.iter().any(|v| !v.holds));
            out.push(json!({ "case": case, "verdicts": verdicts }));
        }
        print_json(&json!({ "replayed": cases.len(), "violating_cases": violated, "results": out }))?;
        return if violated > 0 {
            Err(CliError::Violation(format!("{violated} of {} replayed cases", cases.len())))
        } else {
            Ok(())
        };
    }
    let cfg = CampaignConfig {
        cases: a.cases,
        c_min: a.c_min,
        c_max: a.c_max,
        dist: a.dist.parse::<ScoreDist>()?,
        seed: a.seed,
        base_loss: BaseLoss::new(a.loss.parse()?),
        allow_non_dominating: a.allow_non_dominating,
        chunk_size: a.chunk_size,
        ..CampaignConfig::default()
    };
    let summary = fuzz_campaign(&cfg)?;
    if let Some(p) = &a.failures_out {
        fs::write(p, serde_json::to_string_pretty(&summary.failures)?)?;
    }
    print_json(&serde_json::to_value(&summary)?)?;
    if summary.violations > 0 {
        return Err(CliError::Violation(format!("{} of {} cases", summary.violations, summary.cases)));
    }
    Ok(())
}
