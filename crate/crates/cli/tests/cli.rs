use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn run(args: &[&str], config: Option<&Value>) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rcircular"));
    cmd.args(args);
    if let Some(c) = config {
        let path = dir.path().join("config.json");
        std::fs::write(&path, serde_json::to_string(c).unwrap()).unwrap();
        cmd.arg("--config").arg(&path);
    }
    (cmd.output().unwrap(), dir)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad report: {e}\nstdout: {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn letter(p: u64, q: u64, star: bool) -> Value {
    json!({"p": p, "q": q, "star": star})
}

fn two_index_config() -> Value {
    json!({
        "spec": {"b": [[[0, 2], [3, 0]]]},
        "words": [
            {"letters": [letter(1, 2, true), letter(1, 2, false), letter(1, 2, true), letter(1, 2, false)], "state": 2},
            {"letters": [letter(1, 2, false), letter(1, 2, true), letter(1, 2, false)], "state": 2}
        ]
    })
}

#[test]
fn crossval_reports_both_engines() {
    let (out, _d) = run(&["crossval"], Some(&two_index_config()));
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["pass"], json!(true));
    assert_eq!(
        r["results"][0]["combinatorial"],
        json!({"num": 10, "den": 1})
    );
    assert_eq!(r["results"][0]["fock"], json!({"num": 10, "den": 1}));
    assert_eq!(r["results"][0]["diff"], json!({"num": 0, "den": 1}));
    assert_eq!(r["provenance"]["engines"], json!(["combinatorial", "fock"]));
    assert_eq!(r["config"], two_index_config());
}

#[test]
fn odd_word_has_no_contributions() {
    let (out, _d) = run(&["moment"], Some(&two_index_config()));
    let r = report(&out);
    assert_eq!(r["results"][1]["value"], json!({"num": 0, "den": 1}));
    assert_eq!(r["results"][1]["contributions"], json!([]));
    assert_eq!(
        r["results"][0]["contributions"].as_array().unwrap().len(),
        2
    );
}

#[test]
fn rtransform_is_quadratic() {
    let cfg = json!({"spec": {"b": [[[1, {"num": 1, "den": 2}], [3, 0]], [[0, 1], [2, 5]]]}});
    let (out, _d) = run(&["rtransform", "--cap", "4"], Some(&cfg));
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["summary"]["nonzero_degrees"], json!([2]));
    assert!(r["results"]
        .as_array()
        .unwrap()
        .iter()
        .all(|row| row["degree"] == json!(2)));
}

#[test]
fn series_checks_pass() {
    let cfg = json!({
        "spec": {"b": [[[{"num": 1, "den": 3}, {"num": 1, "den": 3}], [{"num": 2, "den": 3}, {"num": 2, "den": 3}]]]},
        "array_state": {"mixture": [{"num": 1, "den": 3}, {"num": 2, "den": 3}]}
    });
    let (out, _d) = run(&["series", "--cap", "6"], Some(&cfg));
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["summary"]["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn diagnostics_and_exit_codes() {
    let degenerate = json!({"meixner": {"beta1": 0, "beta2": 0, "alpha2": 1}});
    let (out, _d) = run(&["meixner"], Some(&degenerate));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta1 = 0 requires alpha2 = 0"));

    let negative = json!({"spec": {"b": [[[1, -1], [1, 1]]]}, "words": []});
    let (out, _d) = run(&["moment"], Some(&negative));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("negative"));

    let (out, _d) = run(&["series", "--cap", "12"], Some(&two_index_config()));
    assert_eq!(out.status.code(), Some(3));

    let float = json!({"spec": {"b": [[[0.5]]]}});
    let (out, _d) = run(&["rtransform"], Some(&float));
    assert_eq!(out.status.code(), Some(2));

    let (out, _d) = run(&["moment"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ck_check_flags() {
    let (out, _d) = run(&["ck-check", "--r", "2", "--depth", "6"], None);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(
        r["summary"]["relation_matrix"]["matrix"],
        json!([[1, 1, 0, 0], [0, 0, 1, 1], [1, 1, 0, 0], [0, 0, 1, 1]])
    );

    let (out, _d) = run(
        &[
            "ck-check",
            "--r",
            "3",
            "--labels",
            "2",
            "--depth",
            "4",
            "--pairs",
            "1,2;2,2;3,1",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));

    let (out, _d) = run(&["ck-check", "--r", "2", "--depth", "2"], None);
    assert_eq!(out.status.code(), Some(2));

    let nonstandard = json!({"spec": {"b": [[[1, 2], [1, 1]]]}, "ck": {"r": 2, "depth": 4}});
    let (out, _d) = run(&["ck-check"], Some(&nonstandard));
    assert_eq!(out.status.code(), Some(2));
}

fn simulate_config() -> Value {
    json!({
        "model": {"sizes": [6, 10], "variances": [[[1, 2], [2, 1]]]},
        "matrix_words": [
            {"letters": [{"kind": "block", "p": 1, "q": 2, "star": true}, {"kind": "block", "p": 1, "q": 2}], "state": 2},
            {"letters": [{"kind": "full", "star": true}, {"kind": "full"}, {"kind": "full", "star": true}, {"kind": "full"}], "state": 1}
        ],
        "trials": 40
    })
}

#[test]
fn report_config_reruns_identically() {
    let (out, dir) = run(
        &["simulate", "--seed", "9", "--tolerance-z", "6"],
        Some(&simulate_config()),
    );
    let first = report(&out);
    let embedded = first["config"].clone();
    assert_eq!(embedded["seed"], json!(9));
    let path = dir.path().join("rerun.json");
    std::fs::write(&path, serde_json::to_string(&embedded).unwrap()).unwrap();
    let again = Command::new(env!("CARGO_BIN_EXE_rcircular"))
        .args(["simulate", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    let second = report(&again);
    assert_eq!(first["results"], second["results"]);
    assert_eq!(out.status.code(), again.status.code());
}

#[test]
fn asymmetric_model_is_a_config_error() {
    let mut cfg = simulate_config();
    cfg["model"]["variances"] = json!([[[1, 2], [1, 1]]]);
    let (out, _d) = run(&["simulate"], Some(&cfg));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("symmetric"));
}

#[test]
fn failing_check_exits_one() {
    let (out, _d) = run(
        &["simulate", "--tolerance-rel", "0", "--tolerance-z", "0"],
        Some(&simulate_config()),
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["pass"], json!(false));
}

#[test]
fn kesten_with_monte_carlo_and_csv() {
    let cfg = json!({"kesten": {"beta1": 1, "beta2": 4}, "eps_words": ["*1", "*1*1"], "n": 64, "trials": 200});
    let (out, dir) = run(&["kesten", "--format", "csv", "--out", "k.csv"], Some(&cfg));
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
    let _ = dir;
    let text = std::fs::read_to_string(Path::new("k.csv")).unwrap();
    std::fs::remove_file("k.csv").unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.contains("closed_form") && header.contains("estimate"));
    assert!(lines.next().unwrap().contains(",1,"));
}

#[test]
fn meixner_closed_form_matches_fock() {
    let cfg = json!({
        "meixner": {"beta1": 1, "beta2": 2, "alpha1": {"re": 1, "im": -1}, "alpha2": {"re": {"num": 1, "den": 2}, "im": 0}}
    });
    let (out, _d) = run(&["meixner", "--cap", "6"], Some(&cfg));
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"].as_array().unwrap().len(), 126);
}

#[test]
fn cumulants_of_order_four_vanish() {
    let mut cfg = two_index_config();
    cfg["words"].as_array_mut().unwrap().truncate(1);
    let (out, _d) = run(&["cumulant"], Some(&cfg));
    let r = report(&out);
    assert_eq!(r["results"][0]["value"], json!({"num": 0, "den": 1}));
}
