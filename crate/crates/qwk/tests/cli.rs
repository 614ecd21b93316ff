use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qwk::prices::save_prices;
use qwk_testkit::{regime_shift_prices, RegimeShift};

fn qwk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwk"))
        .args(args)
        .env_remove("QWK_CONFIG")
        .env_remove("QWK_WORKERS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = qwk(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn mutag() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/MUTAG").display().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_prices(dir: &Path) -> PathBuf {
    let p = regime_shift_prices(&RegimeShift { tickers: 8, days: 40, shift_day: 20, ..RegimeShift::default() });
    let path = dir.join("prices.csv");
    save_prices(&p.tickers, &p.dates, &p.closes, &path).unwrap();
    path
}

#[test]
fn every_command_has_help() {
    ok(&["--help"]);
    for cmd in ["ingest-prices", "gram", "kpca", "entropy", "sparsify", "classify-smoke"] {
        let out = ok(&[cmd, "--help"]);
        assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"));
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    assert_eq!(qwk(&["gram", "--input", &mutag(), "--kernel", "rbf", "--out", s(&out)]).status.code(), Some(2));
    assert!(!out.exists());
    assert_eq!(qwk(&["frobnicate"]).status.code(), Some(2));
    let prices = small_prices(dir.path());
    let nets = dir.path().join("nets");
    let res = qwk(&["ingest-prices", "--csv", s(&prices), "--window", "1", "--out", s(&nets)]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("window"));
    assert!(!nets.exists());
}

#[test]
fn missing_input_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let res = qwk(&["ingest-prices", "--csv", "/no/such/file.csv", "--out", s(&dir.path().join("n"))]);
    assert!(!res.status.success());
    assert!(!res.stderr.is_empty());
}

#[test]
fn corrupt_data_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{").unwrap();
    let res = qwk(&["gram", "--input", s(&bad), "--out", s(&dir.path().join("g.csv"))]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn gram_is_deterministic_and_feeds_the_other_commands() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let svm = dir.path().join("k.svm");
    let labels = dir.path().join("y.txt");
    ok(&["gram", "--input", &mutag(), "--kernel", "js", "--horizon", "25", "--wl", "0:3", "--out", s(&a),
        "--svm", s(&svm), "--labels-out", s(&labels)]);
    ok(&["--workers", "3", "gram", "--input", &mutag(), "--kernel", "js", "--out", s(&b)]);
    let (ta, tb) = (fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    // Only the input path could differ; here it is the same.
    assert_eq!(ta, tb);
    let body: Vec<&str> = ta.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 189);
    assert_eq!(body[0].split(',').count(), 189);
    assert!(ta.lines().any(|l| l.starts_with("# qwk ")));
    assert!(ta.contains("kernel=js horizon=25 wl=0:3"));
    assert_eq!(fs::read_to_string(&svm).unwrap().lines().count(), 188);

    let emb = dir.path().join("emb.csv");
    ok(&["kpca", "--gram", s(&a), "--dims", "3", "--out", s(&emb)]);
    let text = fs::read_to_string(&emb).unwrap();
    assert_eq!(text.lines().count(), 189);
    assert!(text.starts_with("id,x1,x2,x3\n"));
    assert_eq!(qwk(&["kpca", "--gram", s(&a), "--dims", "500", "--out", s(&emb)]).status.code(), Some(2));

    let smoke = |seed: &str| {
        let out = ok(&["classify-smoke", "--gram", s(&a), "--labels", s(&labels), "--folds", "10", "--seed", seed]);
        String::from_utf8(out.stdout).unwrap()
    };
    let first = smoke("7");
    assert_eq!(first, smoke("7"));
    assert_eq!(first.lines().filter(|l| l.starts_with("fold")).count(), 10);
    assert!(first.contains("±"));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("qwk.toml");
    fs::write(&cfg, "kernel = \"dp\"\nhorizon = 5\n").unwrap();
    let out = dir.path().join("g.csv");
    ok(&["--config", s(&cfg), "gram", "--input", &mutag(), "--horizon", "7", "--out", s(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("kernel=dp horizon=7"), "{}", text.lines().nth(1).unwrap());

    fs::write(&cfg, "colour = 1\n").unwrap();
    assert_eq!(qwk(&["--config", s(&cfg), "gram", "--input", &mutag(), "--out", s(&out)]).status.code(), Some(2));
}

#[test]
fn price_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let prices = small_prices(dir.path());
    let nets = dir.path().join("nets");
    ok(&["ingest-prices", "--csv", s(&prices), "--window", "10", "--mode", "correlation", "--out", s(&nets)]);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(nets.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["networks"].as_array().unwrap().len(), 31);
    assert_eq!(manifest["mode"], "correlation");

    let h = dir.path().join("h.csv");
    ok(&["entropy", "--nets", s(&nets), "--horizon", "25", "--out", s(&h)]);
    let text = fs::read_to_string(&h).unwrap();
    assert_eq!(text.lines().count(), 32);
    assert!(text.starts_with("date,entropy\n"));

    let trees = dir.path().join("trees.json");
    let out = ok(&["sparsify", "--input", s(&nets), "--out", s(&trees)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("31 spanning trees"));
    let g = qwk::json::load_weighted_json(&trees).unwrap();
    assert!(g.graphs().iter().all(|t| t.edge_count() == t.n() - 1));
}
