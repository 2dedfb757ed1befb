use std::path::{Path, PathBuf};
use std::process::Command;

use blamescope_cli::{run, CliError};
use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn data(name: &str) -> String {
    root().join("data").join(name).display().to_string()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn report(args: &[&str]) -> Value {
    let text = run(std::iter::once("blamescope").chain(args.iter().copied())).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn failure(args: &[&str]) -> CliError {
    run(std::iter::once("blamescope").chain(args.iter().copied())).unwrap_err()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn validate_bundled_files() {
    let r = report(&["validate", "--scm", &data("xor.json"), "--cases", &data("synthetic_200.csv")]);
    assert_eq!(r["schema"], "blamescope/report/1");
    let files = r["result"]["files"].as_array().unwrap();
    assert!(files.iter().all(|f| f["status"] == "ok"));
    assert_eq!(files[1]["rows"], 200);
}

#[test]
fn validate_reports_missing_column_and_cycle() {
    let e = failure(&["validate", "--cases", &fixture("missing_truth.csv")]);
    assert_eq!((e.exit_code(), e.type_.as_str()), (3, "MissingColumn"));
    assert!(e.message.contains("truth"));

    let e = failure(&["validate", "--scm", &fixture("cyclic.json")]);
    assert_eq!((e.exit_code(), e.type_.as_str()), (4, "CyclicGraph"));
    assert!(e.message.contains("A, B"));

    let e = failure(&["validate", "--cases", &fixture("bad_confidence.csv")]);
    assert_eq!(e.exit_code(), 3);
    assert!(e.message.contains("line 3"));
}

#[test]
fn prob_exact_and_monte_carlo() {
    let exact = report(&["prob", "--scm", &data("xor.json"), "--outcome", "y1"]);
    assert_eq!(f(&exact["result"]["probability"]), 0.5);
    let mc = report(&["prob", "--scm", &data("xor.json"), "--outcome", "y1", "--samples", "100000", "--seed", "7"]);
    assert!((f(&mc["result"]["probability"]) - 0.5).abs() < 0.01);
    assert_eq!(mc["config"]["estimator"]["mode"], "monte_carlo");

    let e = failure(&["prob", "--scm", &data("xor.json"), "--outcome", "nope"]);
    assert_eq!((e.exit_code(), e.type_.as_str()), (2, "UnknownOutcome"));
}

#[test]
fn prob_with_action_and_intervention() {
    let r = report(&["prob", "--scm", &data("xor.json"), "--outcome", "y1", "--action", "noise_only"]);
    assert!((f(&r["result"]["probability"]) - 0.3).abs() < 1e-12);
    // do(X=1): Y = 1 xor E2, so P(Y=1) = P(E2=0).
    let r = report(&["prob", "--scm", &data("xor.json"), "--outcome", "y1", "--do", "X=1"]);
    assert!((f(&r["result"]["probability"]) - 0.7).abs() < 1e-12);
}

#[test]
fn counterfactual_worked_example() {
    let r = report(&[
        "counterfactual",
        "--scm",
        &data("xor.json"),
        "--outcome",
        "y1",
        "--observe",
        "X=1,Y=0",
        "--do",
        "X=0",
    ]);
    assert_eq!(f(&r["result"]["probability"]), 1.0);
    assert_eq!(r["result"]["posterior_support"], 1);
    assert_eq!(r["result"]["posterior"][0]["noise"]["E2"], "1");
}

#[test]
fn counterfactual_collapses_to_prob() {
    for outcome in ["y1", "x1_or_y1"] {
        let cf = report(&["counterfactual", "--scm", &data("xor.json"), "--outcome", outcome]);
        let p = report(&["prob", "--scm", &data("xor.json"), "--outcome", outcome]);
        assert_eq!(cf["result"]["probability"], p["result"]["probability"]);
    }
}

#[test]
fn impossible_observation_is_a_structured_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_blamescope"))
        .args(["counterfactual", "--scm", &fixture("stuck_noise.json"), "--outcome", "y1", "--observe", "X=1,Y=0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(out.stdout.is_empty());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["type"], "ZeroProbabilityObservation");
    assert!(err["error"]["message"].as_str().unwrap().contains("X=1, Y=0"));
}

#[test]
fn blame_scenario() {
    let scenario = data("blame_scenario.json");
    let base = ["blame", "--scm", scenario.as_str(), "--outcome", "harm", "--cost", "ops"];
    let r = report(&[&base[..], &["--action", "ai_policy", "--baseline", "human_policy"]].concat());
    let res = &r["result"];
    assert!((f(&res["delta"]) - 0.2).abs() < 1e-12);
    assert_eq!(f(&res["gamma"]), 0.25);
    assert!((f(&res["db"]) - 0.05).abs() < 1e-12);

    let same = report(&[&base[..], &["--action", "ai_policy", "--baseline", "ai_policy"]].concat());
    assert_eq!(f(&same["result"]["delta"]), 0.0);
    assert_eq!(f(&same["result"]["db"]), 0.0);

    let unit =
        report(&[&base[..], &["--action", "ai_policy", "--baseline", "human_policy", "--discount", "unit"]].concat());
    assert_eq!(unit["result"]["db"], unit["result"]["delta"]);
}

#[test]
fn blame_without_cost_under_cost_ratio_is_a_config_error() {
    let e = failure(&[
        "blame",
        "--scm",
        &data("blame_scenario.json"),
        "--outcome",
        "harm",
        "--action",
        "ai_policy",
        "--baseline",
        "human_policy",
    ]);
    assert_eq!((e.exit_code(), e.type_.as_str()), (2, "MissingCostModel"));
    let e = failure(&[
        "blame",
        "--scm",
        &data("blame_scenario.json"),
        "--outcome",
        "harm",
        "--action",
        "nope",
        "--baseline",
        "human_policy",
        "--cost",
        "ops",
    ]);
    assert_eq!((e.exit_code(), e.type_.as_str()), (2, "UnknownAction"));
}

#[test]
fn hitl_flag_everything() {
    let r = report(&["hitl", "--cases", &data("synthetic_200.csv"), "--l", "0", "--u", "1"]);
    assert_eq!(f(&r["result"]["blame"]["delta"]), 0.0);
    assert_eq!(r["result"]["attribution"]["summary"]["avoidable"], 0);
    assert_eq!(r["result"]["blame"]["measure"], "empirical");
}

/// Flags and error classes recounted from the CSV text.
fn recount(csv: &str, l: f64, u: f64) -> (usize, usize, usize, [usize; 3]) {
    let (mut flagged, mut hitl_err, mut human_err, mut classes) = (0, 0, 0, [0; 3]);
    for line in csv.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        let p: f64 = c[1].parse().unwrap();
        let flag = l <= p && p <= u;
        flagged += usize::from(flag);
        let fin = if flag { c[3] } else { c[2] };
        human_err += usize::from(c[3] != c[4]);
        if fin != c[4] {
            hitl_err += 1;
            let class = if c[3] == c[4] {
                0
            } else if flag {
                1
            } else {
                2
            };
            classes[class] += 1;
        }
    }
    (flagged, hitl_err, human_err, classes)
}

#[test]
fn hitl_on_bundled_log_matches_recount() {
    let (l, u, ai, human) = (0.3, 0.7, 1.0, 4.0);
    let r = report(&[
        "hitl",
        "--cases",
        &data("synthetic_200.csv"),
        "--l",
        "0.3",
        "--u",
        "0.7",
        "--ai-cost",
        "1",
        "--human-cost",
        "4",
        "--exact",
    ]);
    let csv = std::fs::read_to_string(data("synthetic_200.csv")).unwrap();
    let (flagged, hitl_err, human_err, classes) = recount(&csv, l, u);
    let n = 200.0;
    let delta = ((hitl_err as f64 - human_err as f64) / n).max(0.0);
    let cost_a = (flagged as f64 * human + (200 - flagged) as f64 * ai) / n;
    let gamma = (cost_a / human).min(1.0);
    let b = &r["result"]["blame"];
    assert_eq!(b["n_flagged"], flagged);
    assert_eq!(b["errors_hitl"], hitl_err);
    assert_eq!(b["errors_human_only"], human_err);
    assert!((f(&b["delta"]) - delta).abs() < 1e-12);
    assert!((f(&b["db"]) - gamma * delta).abs() < 1e-12);
    assert!((f(&r["result"]["exact"]["delta"]) - delta).abs() < 1e-12);
    let s = &r["result"]["attribution"]["summary"];
    assert_eq!(
        [s["avoidable"].clone(), s["inevitable_flagged"].clone(), s["inevitable_unflagged"].clone()],
        classes.map(Value::from)
    );
    assert_eq!(r["result"]["attribution"]["per_case"].as_array().unwrap().len(), hitl_err);
}

#[test]
fn hitl_rejects_inverted_thresholds() {
    let e = failure(&["hitl", "--cases", "/does/not/matter.csv", "--l", "0.8", "--u", "0.2"]);
    assert_eq!((e.exit_code(), e.type_.as_str()), (2, "InvalidPolicy"));
}

#[test]
fn metrics_conversions() {
    let r = report(&["metrics", "--kappa", "0.478"]);
    assert!((f(&r["result"]["blame"]) - 0.522).abs() < 1e-12);
    let r = report(&["metrics", "--f1-hitl", "0.831", "--f1-human", "0.896"]);
    assert!((f(&r["result"]["blame"]) - 0.065).abs() < 1e-12);
    let e = failure(&["metrics", "--kappa", "0.5", "--f1-hitl", "0.1", "--f1-human", "0.2"]);
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn metrics_from_ratings() {
    let dir = tempfile::tempdir().unwrap();
    let same = dir.path().join("same.csv");
    std::fs::write(&same, "case_id,rater_a,rater_b\na,1,1\nb,2,2\nc,3,3\nd,2,2\n").unwrap();
    let r = report(&["metrics", "--ratings", same.to_str().unwrap()]);
    assert_eq!(f(&r["result"]["kappa"]), 1.0);
    assert_eq!(f(&r["result"]["blame"]), 0.0);

    let r = report(&["metrics", "--ratings", &data("ratings_example.csv")]);
    assert!((f(&r["result"]["kappa"]) - 2.0 / 3.0).abs() < 1e-11);

    let e = failure(&["metrics", "--ratings", &fixture("constant_ratings.csv")]);
    assert_eq!((e.exit_code(), e.type_.as_str()), (3, "DegenerateMarginals"));
}

#[test]
fn metrics_from_case_log() {
    let r = report(&["metrics", "--cases", &data("synthetic_200.csv"), "--l", "0.3", "--u", "0.7"]);
    let res = &r["result"];
    let total =
        |side: &str| -> u64 { ["tp", "fp", "fn", "tn"].iter().map(|k| res[side]["counts"][k].as_u64().unwrap()).sum() };
    assert_eq!(total("hitl"), 200);
    assert_eq!(total("human_only"), 200);
    let expected = (f(&res["human_only"]["f1"]) - f(&res["hitl"]["f1"])).clamp(0.0, 1.0);
    assert!((f(&res["blame"]) - expected).abs() < 1e-11);
}

#[test]
fn gen_is_deterministic_and_matches_bundled_log() {
    let a = run(["blamescope", "gen", "--seed", "42", "--n", "200"]).unwrap();
    let b = run(["blamescope", "gen", "--seed", "42", "--n", "200"]).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, std::fs::read_to_string(data("synthetic_200.csv")).unwrap());
    let parsed = blamescope::caselog::read_cases(a.as_bytes()).unwrap();
    assert_eq!(blamescope::caselog::cases_to_csv(&parsed), a);
}

#[test]
fn gen_perfect_ai_and_perfect_human() {
    let dir = tempfile::tempdir().unwrap();
    let csv = run(["blamescope", "gen", "--seed", "5", "--n", "300", "--ai-accuracy", "1"]).unwrap();
    assert!(csv.lines().skip(1).all(|l| {
        let c: Vec<&str> = l.split(',').collect();
        c[2] == c[4]
    }));

    let path = dir.path().join("perfect_human.csv");
    let csv = run(["blamescope", "gen", "--seed", "5", "--n", "300", "--human-accuracy", "1", "--ai-accuracy", "0.6"])
        .unwrap();
    std::fs::write(&path, csv).unwrap();
    let r = report(&["hitl", "--cases", path.to_str().unwrap(), "--l", "0.3", "--u", "0.7"]);
    let s = &r["result"]["attribution"]["summary"];
    assert!(s["total_errors"].as_u64().unwrap() > 0);
    assert_eq!(s["avoidable"], s["total_errors"]);
    assert_eq!(s["inevitable_flagged"], 0);
    assert_eq!(s["inevitable_unflagged"], 0);

    let e = failure(&["gen", "--ai-accuracy", "1.5"]);
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let status = Command::new(env!("CARGO_BIN_EXE_blamescope"))
        .args(["prob", "--scm", &data("xor.json"), "--outcome", "y1", "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(r["command"], "prob");
}

#[test]
fn usage_errors_exit_with_code_2() {
    let out = Command::new(env!("CARGO_BIN_EXE_blamescope")).args(["prob", "--samples", "many"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    let out = Command::new(env!("CARGO_BIN_EXE_blamescope")).arg("--help").output().unwrap();
    assert!(out.status.success());
}
