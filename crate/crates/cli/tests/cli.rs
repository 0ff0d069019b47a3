use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mlc_core::harness::{all_negative_rate, CV_CSV_HEADER};
use mlc_core::relations::CaseFailure;
use mlc_core::{BaseLoss, LinearModel};
use serde_json::Value;

fn mlc(args: &[&str]) -> Output {
    mlc_env(args, &[])
}

fn mlc_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mlc"));
    cmd.args(args).env_remove("MLC_WORKERS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn toy() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/toy.svm")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn named_bound_matches_hand_composition() {
    let o = mlc(&[
        "bounds", "--name", "Ah_subset", "--b", "2", "--c", "4", "--n", "250", "--norm-bound", "1.5", "--r", "0.5",
        "--delta", "0.1", "--risk", "0.05", "--format", "json",
    ]);
    assert!(o.status.success());
    let rows = json(&o);
    let row = &rows[0];
    assert_eq!(row["bound_name"], "Ah_subset");
    // mu = rho sqrt(c), M = B c, multiplier c, with rho = 1 for hinge.
    let (c, n, b) = (4.0f64, 250.0f64, 2.0);
    let risk = c * 0.05;
    let complexity = 2.0 * 2f64.sqrt() * c.sqrt() * (c * 1.5f64.powi(2) * 0.25 / n).sqrt();
    let confidence = 3.0 * b * c * ((2.0f64 / 0.1).ln() / (2.0 * n)).sqrt();
    for (key, want) in [("risk_term", risk), ("complexity_term", complexity), ("confidence_term", confidence)] {
        let got = row[key].as_f64().unwrap();
        assert!((got - want).abs() <= 1e-12 * want.abs(), "{key}: {got} vs {want}");
    }
    let total = row["total"].as_f64().unwrap();
    assert!((total - (risk + complexity + confidence)).abs() < 1e-12);
}

#[test]
fn rho_follows_the_base_loss() {
    let run = |loss: &str| {
        let o = mlc(&["bounds", "--name", "As_ranking", "--b", "1", "--loss", loss, "--format", "json"]);
        json(&o)[0]["complexity_term"].as_f64().unwrap()
    };
    let ratio = run("logistic_log2") / run("hinge");
    assert!((ratio - std::f64::consts::LOG2_E).abs() < 1e-12);
}

#[test]
fn sweep_over_c_is_monotone_for_every_bound() {
    let o = mlc(&["bounds", "--b", "1", "--sweep", "c=1..200", "--sweep", "n=50,500"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(mlc_core::harness::BOUND_CSV_HEADER));
    let rows: Vec<(String, usize, usize, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[4].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 10 * 200 * 2);
    for w in rows.windows(2) {
        let ((na, ca, a_n, a), (nb, cb, b_n, b)) = (&w[0], &w[1]);
        // Rows are ordered by name, then c, then n.
        if na == nb && a_n == b_n && cb == &(ca + 1) {
            assert!(*b >= a * (1.0 - 1e-12), "{na} complexity drops from c={ca} to c={cb}");
        }
    }
}

#[test]
fn bad_bound_arguments_are_usage_errors() {
    assert_eq!(mlc(&["bounds", "--b", "1", "--name", "nope"]).status.code(), Some(1));
    assert_eq!(mlc(&["bounds", "--b", "1", "--sweep", "d=1..3"]).status.code(), Some(1));
    assert_eq!(mlc(&["bounds", "--b", "1", "--format", "xml"]).status.code(), Some(1));
    assert_eq!(mlc(&["bounds", "--b", "1", "--delta", "2"]).status.code(), Some(1));
    assert_eq!(mlc(&["bounds"]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(mlc(&[]).status.code(), Some(1));
    assert_eq!(mlc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mlc(&["train", "--data", p(&toy()), "--learner", "nope"]).status.code(), Some(1));
    assert_eq!(mlc(&["train", "--data", "/nonexistent.svm"]).status.code(), Some(1));
    assert_eq!(mlc(&["cv", "--data", p(&toy()), "--folds", "1"]).status.code(), Some(1));
    assert_eq!(mlc_env(&["bounds", "--b", "1"], &[("MLC_WORKERS", "zero")]).status.code(), Some(1));
    let help = mlc(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    for sub in ["train", "eval", "cv", "bounds", "verify-lemmas"] {
        assert!(stdout(&help).contains(sub), "{sub}");
    }
    let sub_help = stdout(&mlc(&["cv", "--help"]));
    assert!(sub_help.contains("[default: 3]"), "{sub_help}");
}

#[test]
fn lemma_campaign_is_clean_and_worker_independent() {
    let args = ["verify-lemmas", "--cases", "30000", "--seed", "7", "--dist", "mixed", "--chunk-size", "1000"];
    let one = mlc_env(&args, &[("MLC_WORKERS", "1")]);
    let many = mlc_env(&args, &[("MLC_WORKERS", "4")]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    let s = json(&one);
    assert_eq!(s["violations"], 0);
    assert_eq!(s["cases"], 30000);
    assert_eq!(s["config"]["seed"], 7);
}

#[test]
fn violations_exit_two_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let failures = dir.path().join("failures.json");
    // The natural-log logistic loss sits below the 0/1 loss at margin 0.
    let o = mlc(&[
        "verify-lemmas", "--cases", "2000", "--loss", "logistic_ln", "--allow-non-dominating", "--failures-out",
        p(&failures),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(json(&o)["violations"].as_u64().unwrap() > 0);
    let recorded: Vec<CaseFailure> = serde_json::from_str(&fs::read_to_string(&failures).unwrap()).unwrap();
    assert!(!recorded.is_empty());

    let replay = mlc(&["verify-lemmas", "--repro", p(&failures)]);
    assert_eq!(replay.status.code(), Some(2));
    assert_eq!(json(&replay)["violating_cases"].as_u64().unwrap() as usize, recorded.len());

    // Without the override the loss is rejected outright.
    let refused = mlc(&["verify-lemmas", "--cases", "10", "--loss", "logistic_ln"]);
    assert_eq!(refused.status.code(), Some(1));
}

#[test]
fn replaying_a_valid_case_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let case = dir.path().join("case.json");
    fs::write(&case, r#"{"f": [0.3, -1.0, 0.0], "y": [1, -1, 1], "base_loss": {"kind": "hinge", "bound": null}}"#)
        .unwrap();
    let o = mlc(&["verify-lemmas", "--repro", p(&case)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["replayed"], 1);
    assert_eq!(v["violating_cases"], 0);
    assert!(v["results"][0]["verdicts"].as_array().unwrap().iter().all(|x| x["holds"] == true));
}

#[test]
fn train_then_eval_reproduces_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.txt");
    let trace = dir.path().join("trace.csv");
    let o = mlc(&[
        "train", "--data", p(&toy()), "--learner", "ranking", "--lambda", "0.1", "--bias", "--model-out", p(&model),
        "--trace-out", p(&trace),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = json(&o);
    assert_eq!(t["config"]["learner"], "ranking");
    assert_eq!(t["config"]["bb_scale"], "inner-len");
    assert_eq!(t["config"]["outer_epochs"], 30);
    assert!(model.exists());
    assert!(dir.path().join("model.txt.norm.json").exists());
    assert_eq!(fs::read_to_string(&trace).unwrap().lines().count(), 31);

    let e = mlc(&["eval", "--model", p(&model), "--data", p(&toy())]);
    assert!(e.status.success());
    assert_eq!(json(&e)["metrics"], t["train"]);

    // Same seed, same bytes.
    let again = mlc(&[
        "train", "--data", p(&toy()), "--learner", "ranking", "--lambda", "0.1", "--bias", "--model-out",
        p(&dir.path().join("again.txt")),
    ]);
    assert_eq!(again.stdout, o.stdout);
    assert_eq!(fs::read(&model).unwrap(), fs::read(dir.path().join("again.txt")).unwrap());
}

#[test]
fn zero_model_subset_accuracy_is_the_all_negative_rate() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("zero.txt");
    LinearModel::zeros(5, 3, false).save(&model).unwrap();
    let o = mlc(&["eval", "--model", p(&model), "--data", p(&toy())]);
    assert!(o.status.success());
    let ds = mlc_core::data::load_multilabel_svm(toy(), Default::default()).unwrap();
    let sa = json(&o)["metrics"]["subset_acc"].as_f64().unwrap();
    assert_eq!(sa, all_negative_rate(&ds));
    assert_eq!(sa, 0.2);
}

#[test]
fn eval_rejects_mismatched_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.txt");
    LinearModel::zeros(2, 3, false).save(&model).unwrap();
    assert_eq!(mlc(&["eval", "--model", p(&model), "--data", p(&toy())]).status.code(), Some(1));
}

#[test]
fn cv_reports_are_deterministic_and_carry_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str, workers: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let json_path = dir.path().join(format!("{tag}.json"));
        let o = mlc_env(
            &[
                "cv", "--data", p(&toy()), "--folds", "2", "--lambda-grid", "0.01,1", "--learner", "subset", "--csv-out",
                p(&csv), "--json-out", p(&json_path),
            ],
            &[("MLC_WORKERS", workers)],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (fs::read_to_string(csv).unwrap(), fs::read_to_string(json_path).unwrap(), stdout(&o))
    };
    let a = run("a", "1");
    let b = run("b", "3");
    assert_eq!(a, b);
    let mut lines = a.0.lines();
    let config: Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# config: ").unwrap()).unwrap();
    assert_eq!(config["folds"], 2);
    assert_eq!(config["normalization"], "per-fold");
    assert_eq!(config["train"]["learner"], "subset");
    assert_eq!(lines.next(), Some(CV_CSV_HEADER));
    assert_eq!(lines.count(), 4);
    assert!(a.2.contains("selected:"));
}

#[test]
fn paper_mode_selects_global_normalization() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cv.csv");
    let o = mlc(&["cv", "--data", p(&toy()), "--folds", "2", "--lambda-grid", "1", "--paper-mode", "--csv-out", p(&csv)]);
    assert!(o.status.success());
    assert!(fs::read_to_string(csv).unwrap().contains(r#""normalization":"global""#));
}

#[test]
fn dense_csv_input() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.csv");
    let y = dir.path().join("y.csv");
    fs::write(&x, "1,0\n-1,0\n2,1\n-2,1\n").unwrap();
    fs::write(&y, "1,0\n0,1\n1,0\n0,1\n").unwrap();
    let o = mlc(&[
        "train", "--features", p(&x), "--labels", p(&y), "--zero-one", "--normalization", "none", "--lambda", "0.001",
        "--epochs", "100",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["dataset"], "x");
    assert_eq!(v["train"]["subset_acc"], 1.0);
    // Without --zero-one a 0 label cell is rejected.
    assert_eq!(mlc(&["train", "--features", p(&x), "--labels", p(&y)]).status.code(), Some(1));
}

#[test]
fn diagnostic_bounds_use_the_trained_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.txt");
    let w = vec![0.5, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    LinearModel::from_weights(5, 3, false, w).unwrap().save(&model).unwrap();
    let o = mlc(&[
        "bounds", "--name", "Ah_hamming", "--b", "1", "--model", p(&model), "--data", p(&toy()), "--format", "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let row = &json(&o)[0];
    assert_eq!(row["note"], mlc_core::bounds::DIAGNOSTIC_LABEL);
    assert_eq!((row["c"].as_u64(), row["n"].as_u64()), (Some(3), Some(5)));
    // ||W|| = sqrt(5.25); the largest squared row norm in the fixture is 0.25 + 49.
    let (lam, r2, c, n): (f64, f64, f64, f64) = (5.25f64.sqrt(), 49.25, 3.0, 5.0);
    let rho = BaseLoss::hinge().rho();
    let want = 2.0 * 2f64.sqrt() * (rho / c.sqrt()) * (c * lam * lam * r2 / n).sqrt();
    let got = row["complexity_term"].as_f64().unwrap();
    assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
    assert_eq!(mlc(&["bounds", "--b", "1", "--model", p(&model)]).status.code(), Some(1));
}
