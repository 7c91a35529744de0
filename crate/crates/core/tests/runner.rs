use std::path::Path;

use brw_fpt::runner::{
    self, derive_replica_seed, parse_config_str, ExperimentKind, ExtinctionPolicy, Overrides, OUTPUT_DIR_ENV,
};
use brw_fpt::Error;

fn gaussian_sweep(extra: &str) -> String {
    format!(
        r#"
seed = 99
samples = 40
x_values = [4.0, 6.0]
q_c = 200
{extra}

[model]
kind = "gaussian"
d = 3
covariance = [1, 0, 0, 0, 1, 0, 0, 0, 1]

[offspring]
p1 = 0.5
p3 = 0.5
"#
    )
}

fn plan_in(dir: &Path, text: &str) -> runner::ExperimentPlan {
    let mut plan = parse_config_str(text, Path::new("sweep.toml")).unwrap();
    plan.output = dir.join("sweep");
    plan
}

fn csv_body(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn theory_only_reports_unit_constants_at_sqrt_e() {
    let text = r#"
kind = "theory_only"
seed = 0
x_values = [10.0]

[model]
kind = "gaussian"
d = 3
covariance = [1, 0, 0, 0, 1, 0, 0, 0, 1]

[offspring]
p1 = 0.6756393646499359
p3 = 0.3243606353500641
"#;
    let dir = tempfile::tempdir().unwrap();
    let plan = plan_in(dir.path(), text);
    let res = runner::run_experiment(&plan).unwrap();
    let t = res.theory.unwrap();
    assert!((t.c1_hat - 1.0).abs() < 1e-9);
    assert!((t.c2_vec[0] - 1.0).abs() < 1e-9);
    assert!(t.c2_vec[1].abs() < 1e-12 && t.c2_vec[2].abs() < 1e-12);
    assert!(res.records.is_empty());
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("sweep.json")).unwrap()).unwrap();
    assert!((json["theory"]["c1_hat"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn certain_death_fails_every_replica() {
    let text = gaussian_sweep("max_restarts = 5").replace("p1 = 0.5\np3 = 0.5", "p0 = 1.0");
    let text = text.replace("samples = 40", "samples = 1");
    let dir = tempfile::tempdir().unwrap();
    let plan = plan_in(dir.path(), &text);
    let res = runner::run_experiment(&plan).unwrap();
    assert!(!res.succeeded());
    let conditioning: Vec<_> = res
        .errors
        .iter()
        .filter(|e| e.kind == "SurvivalConditioningFailed")
        .collect();
    assert_eq!(conditioning.len(), 2);
    assert_eq!(conditioning[0].restart, Some(5));
    assert_eq!(conditioning[0].seed, Some(derive_replica_seed(99, 0, 0, 5)));
    assert!(res.summaries.iter().all(|s| s.n_extinct == 1 && s.n_hits == 0));
    let body = String::from_utf8(csv_body(&dir.path().join("sweep.csv"))).unwrap();
    assert!(body.lines().nth(1).unwrap().contains(",failed,"));
}

#[test]
fn failed_replica_replays_from_its_record() {
    let text = gaussian_sweep("max_restarts = 2").replace("p1 = 0.5\np3 = 0.5", "p0 = 1.0");
    let dir = tempfile::tempdir().unwrap();
    let plan = plan_in(dir.path(), &text);
    let res = runner::run_experiment(&plan).unwrap();
    let e = res.errors.iter().find(|e| e.replica.is_some()).unwrap();
    let outcome = runner::replay(&plan, e.x_index.unwrap(), e.replica.unwrap(), e.restart.unwrap()).unwrap();
    assert!(outcome.is_extinct());
    assert_eq!(outcome.replica_seed, e.seed.unwrap());
}

#[test]
fn rerun_is_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = plan_in(dir.path(), &gaussian_sweep(""));
    plan.workers = Some(1);
    runner::run_experiment(&plan).unwrap();
    let one = csv_body(&dir.path().join("sweep.csv"));
    let one_summary = csv_body(&dir.path().join("sweep_summary.csv"));
    plan.workers = Some(4);
    runner::run_experiment(&plan).unwrap();
    assert_eq!(one, csv_body(&dir.path().join("sweep.csv")));
    assert_eq!(one_summary, csv_body(&dir.path().join("sweep_summary.csv")));
    assert!(!one.contains(&b'\r'));
}

#[test]
fn replay_matches_sweep_rows() {
    let dir = tempfile::tempdir().unwrap();
    let plan = plan_in(dir.path(), &gaussian_sweep(""));
    let res = runner::run_experiment(&plan).unwrap();
    assert!(res.succeeded());
    for rec in res.records.iter().step_by(7) {
        let out = rec.outcome.as_ref().unwrap();
        let again = runner::replay(&plan, rec.x_index, rec.replica, out.restarts).unwrap();
        assert_eq!(&again, out);
    }
}

#[test]
fn csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let plan = plan_in(dir.path(), &gaussian_sweep(""));
    runner::run_experiment(&plan).unwrap();
    let body = String::from_utf8(csv_body(&dir.path().join("sweep.csv"))).unwrap();
    let mut lines = body.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x,replica,tau,status,peak_size,purge_events,restarts"
    );
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 80);
    assert!(rows[0].starts_with("4.0,0,"));
    assert!(rows[40].starts_with("6.0,0,"));
    let parsed = runner::read_replica_csv(&dir.path().join("sweep.csv")).unwrap();
    assert_eq!(parsed.len(), 80);
    // a small purged front can overshoot the target ball and time out
    assert!(parsed.iter().all(|r| (r.status == "hit") == r.tau.is_some()));
    assert!(parsed.iter().all(|r| r.status == "hit" || r.status == "timeout"));
    assert!(parsed.iter().filter(|r| r.status == "hit").count() > 70);
}

#[test]
fn sidecar_records_provenance_and_policy() {
    let dir = tempfile::tempdir().unwrap();
    let plan = plan_in(dir.path(), &gaussian_sweep("extinction = \"discard\""));
    assert_eq!(plan.extinction, ExtinctionPolicy::Discard);
    runner::run_experiment(&plan).unwrap();
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("sweep.json")).unwrap()).unwrap();
    assert_eq!(json["extinction"], "discard");
    assert_eq!(json["provenance"]["master_seed"], 99);
    assert_eq!(json["provenance"]["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(json["summaries"].as_array().unwrap().len(), 2);
    assert!(json["theory"]["predictions"][1]["total"].as_f64().unwrap() > 6.0);
}

#[test]
fn fit_reads_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let text = gaussian_sweep("").replace("[4.0, 6.0]", "[4.0, 6.0, 8.0, 10.0]");
    let plan = plan_in(dir.path(), &text);
    runner::run_experiment(&plan).unwrap();
    let fit = runner::fit_csv_files(&[dir.path().join("sweep.csv")]).unwrap();
    assert!(fit.c1_hat_empirical > 0.5 && fit.c1_hat_empirical < 3.0, "{fit:?}");
    assert!(fit.residual_rms >= 0.0);
}

#[test]
fn fit_of_malformed_csv_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "x,replica\n1,2\n").unwrap();
    assert!(matches!(runner::fit_csv_files(&[path]), Err(Error::Parse { .. })));
}

#[test]
fn frontier_experiment_writes_counts() {
    let text = r#"
kind = "frontier_count"
seed = 1

[model]
kind = "product"
marginals = [{ kind = "uniform", half_width = 1.0 }]

[offspring]
p1 = 0.9
p3 = 0.1

[frontier]
steps = 36
offsets = [2.0, 4.0, 6.0]
replicas = 5
"#;
    let dir = tempfile::tempdir().unwrap();
    let plan = plan_in(dir.path(), text);
    assert_eq!(plan.kind, ExperimentKind::FrontierCount);
    let res = runner::run_experiment(&plan).unwrap();
    let f = res.frontier.unwrap();
    assert_eq!(f.replicas.len(), 5);
    assert_eq!(f.mean_counts.len(), 3);
    let body = String::from_utf8(csv_body(&dir.path().join("sweep.csv"))).unwrap();
    assert_eq!(body.lines().count(), 1 + 15);
}

#[test]
fn frontier_offsets_are_validated() {
    let text = r#"
kind = "frontier_count"
seed = 1

[model]
kind = "product"
marginals = [{ kind = "uniform", half_width = 1.0 }]

[offspring]
p1 = 0.9
p3 = 0.1

[frontier]
steps = 36
offsets = [1.0, 7.0]
"#;
    match parse_config_str(text, Path::new("f.toml")) {
        Err(Error::Validation(p)) => assert_eq!(p.len(), 2, "{p:?}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn overrides_take_precedence() {
    let mut plan = parse_config_str(&gaussian_sweep("output = \"a/b/run1\""), Path::new("s.toml")).unwrap();
    std::env::set_var(OUTPUT_DIR_ENV, "/tmp/from-env");
    let mut from_env = plan.clone();
    Overrides::default().apply(&mut from_env);
    assert_eq!(from_env.output, Path::new("/tmp/from-env/run1"));
    Overrides {
        seed: Some(5),
        workers: Some(3),
        out_dir: Some("/tmp/from-flag".into()),
    }
    .apply(&mut plan);
    std::env::remove_var(OUTPUT_DIR_ENV);
    assert_eq!(plan.output, Path::new("/tmp/from-flag/run1"));
    assert_eq!(plan.master_seed, 5);
    assert_eq!(plan.workers, Some(3));
}

#[test]
fn cli_reports_errors_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, gaussian_sweep("").replace("p3 = 0.5", "p3 = 0.4")).unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_fpt"))
        .args(["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "ValidationError");
}

#[test]
fn cli_theory_and_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    std::fs::write(&cfg, gaussian_sweep("")).unwrap();
    let bin = env!("CARGO_BIN_EXE_fpt");
    let out_dir = dir.path().join("out");
    let theory = std::process::Command::new(bin)
        .args(["theory", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(theory.status.success());
    assert!(out_dir.join("s_theory.csv").exists());
    let run = std::process::Command::new(bin)
        .args(["run", cfg.to_str().unwrap(), "--seed", "3", "--workers", "2"])
        .env(OUTPUT_DIR_ENV, &out_dir)
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(out_dir.join("s.csv").exists());
    let fit = std::process::Command::new(bin)
        .args(["fit", out_dir.join("s.csv").to_str().unwrap()])
        .output()
        .unwrap();
    // two x values cannot determine three coefficients
    assert!(!fit.status.success());
}
