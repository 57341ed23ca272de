use std::path::Path;
use std::process::{Command, Output};

use rlqaoa::logs::{read_csv, ResultRow, ScanRow};
use rlqaoa::run::Summary;

const QUICK: [&str; 14] = [
    "--override",
    "rl.iterations=6",
    "--override",
    "rl.batch_size=8",
    "--override",
    "rl.hidden=[8, 8]",
    "--override",
    "cd.ppo.iterations=2",
    "--override",
    "cd.ppo.batch_size=4",
    "--override",
    "pg.iterations=6",
    "--override",
    "qaoa.search.restarts=1",
];

fn rlqaoa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlqaoa")).args(args).env("RLQAOA_LOG", "warn").output().expect("binary runs")
}

fn train(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["train", "--out", out.to_str().unwrap()];
    args.extend_from_slice(&QUICK);
    args.extend_from_slice(extra);
    rlqaoa(&args)
}

#[test]
fn train_writes_artifacts_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(train(&a, &["--seed", "5"]).status.success());
    assert!(train(&b, &["--seed", "5"]).status.success());
    for f in ["train_log.csv", "summary.json", "checkpoint_best.json", "config.toml"] {
        assert!(a.join(f).exists(), "{f} missing");
    }
    let log = std::fs::read(a.join("train_log.csv")).unwrap();
    assert_eq!(log, std::fs::read(b.join("train_log.csv")).unwrap());
    assert_eq!(String::from_utf8(log).unwrap().lines().count(), 7);

    let summary = Summary::load(&a.join("summary.json")).unwrap();
    assert_eq!(summary.seed, 5);
    assert_eq!(summary.best_protocol.len(), 8);
    assert!((summary.best_protocol.iter().map(|s| s.duration).sum::<f64>() - 10.0).abs() < 1e-9);

    // A different output directory and seed changes the numbers only through the seed.
    let c = dir.path().join("c");
    assert!(train(&c, &["--seed", "6"]).status.success());
    assert_ne!(std::fs::read(a.join("train_log.csv")).unwrap(), std::fs::read(c.join("train_log.csv")).unwrap());

    let out = rlqaoa(&["evaluate", "--checkpoint", a.join("checkpoint_best.json").to_str().unwrap()]);
    assert!(out.status.success());
    let eval: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((eval["clean_ratio"].as_f64().unwrap() - summary.best_clean_ratio).abs() < 1e-12);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "seed = 3\n[env]\nsteps = 8\ntotl_t = 10.0\n").unwrap();
    let out = rlqaoa(&["train", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("totl_t") && err.contains("line 4"), "{err}");

    assert_eq!(rlqaoa(&["train", "--override", "rl.lr=-1"]).status.code(), Some(1));
    assert_eq!(rlqaoa(&["train", "--bogus"]).status.code(), Some(1));
    let missing = rlqaoa(&["evaluate", "--checkpoint", dir.path().join("none.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn verify_reports_planted_fault() {
    let out = rlqaoa(&["verify", "--inject-fault", "mask"]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("FAIL  policy-net"), "{text}");
    assert!(text.contains("failing modules: policy-net"));
}

#[test]
fn sweep_covers_the_grid_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        r#"
[qaoa.search]
restarts = 1

[sweep]
algorithms = ["qaoa", "adiabatic"]
n_sites = [2]
total_t = [1.0]
seeds = [0, 1, 2]
noise = [
    { kind = "none", strengths = [0.0] },
    { kind = "classical_gaussian", strengths = [0.1, 0.3] },
]
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let args = ["sweep", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--workers", "2"];
    let out = rlqaoa(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<ResultRow> = read_csv(&out_dir.join("results.csv")).unwrap();
    assert_eq!(rows.len(), 2 * 3 * 3);
    assert!(rows.iter().all(|r| r.status == "ok" && r.best_clean_ratio.is_some()));

    // Drop one cell and rerun: only that cell is recomputed, no rows are duplicated.
    let cell = out_dir.join("cells").join("qaoa_n2_t1_classical_gaussian_0.3_s1");
    let before = std::fs::read(cell.join("summary.json")).unwrap();
    std::fs::remove_file(cell.join("summary.json")).unwrap();
    let untouched = out_dir.join("cells").join("qaoa_n2_t1_none_0_s0").join("summary.json");
    let stamp = std::fs::metadata(&untouched).unwrap().modified().unwrap();
    assert!(rlqaoa(&args).status.success());
    let again: Vec<ResultRow> = read_csv(&out_dir.join("results.csv")).unwrap();
    assert_eq!(again, rows);
    assert_eq!(std::fs::metadata(&untouched).unwrap().modified().unwrap(), stamp);
    let after: Summary = Summary::load(&cell.join("summary.json")).unwrap();
    let before: Summary = serde_json::from_slice(&before).unwrap();
    assert_eq!(after.best_clean_ratio, before.best_clean_ratio);
}

#[test]
fn adiabatic_scan_emits_three_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan");
    let o = rlqaoa(&[
        "adiabatic-scan",
        "--out",
        out.to_str().unwrap(),
        "--override",
        "env.ising.n_sites=2",
        "--override",
        "env.steps=4",
        "--override",
        "adiabatic.dt=0.01",
        "--override",
        "cd.ppo.iterations=2",
        "--override",
        "cd.ppo.batch_size=4",
        "--override",
        "qaoa.search.restarts=1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<ScanRow> = read_csv(&out.join("adiabatic_scan.csv")).unwrap();
    assert_eq!(rows.len(), 5 * 3);
    let adiabatic: Vec<f64> = rows.iter().filter(|r| r.method == "adiabatic").map(|r| r.ratio).collect();
    assert!(adiabatic[4] > adiabatic[0]);
}
