use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sardelay_cli::commands::{DatasetRecord, DecisionRecord};
use sardelay_cli::RunConfig;

fn sardelay(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sardelay"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn config_round_trips_through_toml() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(
        &path,
        "[scene]\nzeta_max = 62.83185307179586\nkappa = 0.4\n\n[harness]\nn_img = 50\ntrue_model = \"s-model\"\n",
    )
    .unwrap();
    let cfg = RunConfig::load(Some(&path), &["scene.n_hom=3".into(), "output.dir=elsewhere".into()]).unwrap();
    assert_eq!(cfg.scene.kappa, 0.4);
    assert_eq!(cfg.scene.n_hom, 3);
    assert_eq!(cfg.harness.n_img, 50);
    let again = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
    assert_eq!(again, cfg);

    let shown = ok(&sardelay(dir.path(), &["--config", "run.toml", "--seed", "7", "show-config"]));
    let parsed = RunConfig::from_toml(&shown).unwrap();
    assert_eq!(parsed.harness.master_seed, 7);
    assert_eq!(parsed.scene, RunConfig::load(Some(&path), &[]).unwrap().scene);
}

#[test]
fn phi_table_has_requested_grid() {
    let dir = tempfile::tempdir().unwrap();
    ok(&sardelay(dir.path(), &["phi-table", "--v1-steps", "4", "--v2-steps", "5", "--out", "phi.csv"]));
    let text = fs::read_to_string(dir.path().join("phi.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("v1,v2,abs_phi,re_phi,im_phi"));
    assert_eq!(lines.count(), 20);
}

#[test]
fn profile_target_columns_follow_phi() {
    let dir = tempfile::tempdir().unwrap();
    ok(&sardelay(dir.path(), &["profile", "--steps", "7"]));
    let mut rdr = csv::Reader::from_path(dir.path().join("sardelay-out/profile.csv")).unwrap();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let col = |i: usize| rec[i].parse::<f64>().unwrap();
        let zeta = col(0);
        // delayed target: |S|²/|T|² on the streak is |Φ(0, κζ)|² with κ = 1
        let phi = sardelay::specfun::phi(0.0, zeta).unwrap().norm_sqr();
        assert!((col(7) / col(8) - phi).abs() <= 1e-9, "ζ = {zeta}");
        rows += 1;
    }
    assert_eq!(rows, 7);
}

#[test]
fn simulate_then_discriminate() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&sardelay(dir.path(), &["--set", "scene.q_st=0.8", "simulate", "--count", "4", "--model", "t-model"]));
    assert!(out.contains("4 t-model datasets"));
    let text = fs::read_to_string(dir.path().join("sardelay-out/datasets.jsonl")).unwrap();
    let records: Vec<DatasetRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 4);
    assert!(records.iter().all(|r| r.dataset.pairs.len() == 25 && r.dataset.meta.q_st == 0.8));

    ok(&sardelay(dir.path(), &["discriminate", "--input", "sardelay-out/datasets.jsonl", "--out", "dec.jsonl"]));
    let text = fs::read_to_string(dir.path().join("dec.jsonl")).unwrap();
    let decisions: Vec<DecisionRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(decisions.len(), 4);
    for (d, r) in decisions.iter().zip(&records) {
        assert_eq!(d.seed, r.seed);
        assert!(d.decision.fit_s.converged && d.decision.fit_t.converged);
    }
}

#[test]
fn montecarlo_json_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let args = |t: &'static str, out: &'static str| {
        ["--threads", t, "--set", "harness.n_img=30", "--set", "scene.zeta_max=20.0", "montecarlo", "--out", out]
    };
    ok(&sardelay(dir.path(), &args("1", "one.json")));
    ok(&sardelay(dir.path(), &args("4", "four.json")));
    let one = fs::read(dir.path().join("one.json")).unwrap();
    assert_eq!(one, fs::read(dir.path().join("four.json")).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&one).unwrap();
    assert_eq!(report["table"]["n_img"], 30);
}

#[test]
fn sweep_writes_trend_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&sardelay(
        dir.path(),
        &["--set", "harness.n_img=10", "sweep", "--parameter", "zeta-min", "--values", "3pi,8pi"],
    ));
    assert!(out.contains("r_s"));
    let text = fs::read_to_string(dir.path().join("sardelay-out/sweep.csv")).unwrap();
    assert!(text.starts_with("param_value,r_s,r_t,metric,std\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["--set", "scene.kapa=1", "show-config"][..],
        &["--set", "scene.q_st=1.5", "show-config"],
        &["--config", "missing.toml", "show-config"],
        &["--threads", "0", "show-config"],
        &["sweep", "--parameter", "zeta-max", "--values", "lots"],
        &["discriminate", "--input", "missing.jsonl"],
        &["no-such-command"],
    ] {
        let out = sardelay(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn numerical_failures_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = sardelay(
        dir.path(),
        &["--set", "quadrature.tolerance=1e-30", "--set", "quadrature.max_panels=16", "moments", "--steps", "2"],
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("quadrature"));
}
