use std::process::{Command, Output};

fn modtop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modtop")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn modular_flags_print_a_finite_verdict() {
    let out = modtop(&["modular", "--seq", "runs=[(1..2,0.5)];tail=zero", "--exp", "identity"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["result"]["modular"]["verdict"], "finite");
    assert_eq!(r["result"]["modular"]["value"], 0.75);
}

#[test]
fn boundary_counterexample_writes_its_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = modtop(&["counterexample", "--name", "lux-boundary-p-reciprocal", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let r: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!((r["result"]["numbers"]["rho_one"]["value"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert!((r["result"]["numbers"]["norm_one"].as_f64().unwrap() - 1.0).abs() < 1e-4);
    assert_eq!(r["result"]["numbers"]["rho_scaled_1.5"]["value"], "inf");
    assert_eq!(r["result"]["numbers"]["rho_scaled_1.5"]["certificate"]["kind"], "analytic-comparison");
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(modtop(&["--config", empty.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(modtop(&[]).status.code(), Some(2));
    assert_eq!(modtop(&["nonsense"]).status.code(), Some(2));
    assert_eq!(modtop(&["delta2", "--exp", "identity", "--seq", "tail=zero"]).status.code(), Some(2));
    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"command":"suite","colour":"red"}"#).unwrap();
    assert_eq!(modtop(&["--config", unknown.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn suite_with_an_unknown_name_is_partial() {
    let out = modtop(&["suite", "--names", "separability,missing"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["result"]["entries"][0]["passed"], true);
    assert!(r["result"]["entries"][1]["error"].as_str().unwrap().contains("missing"));
}

#[test]
fn config_reruns_are_byte_identical_up_to_the_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"command":"suite","params":{"names":["finite-dim-delta2","prop-norm-relations"],"parallel":2},"seed":5}"#)
        .unwrap();
    let strip = |o: Output| {
        let mut v = json(&o);
        v["timestamp"] = 0.into();
        serde_json::to_string(&v).unwrap()
    };
    let a = modtop(&["--config", cfg.to_str().unwrap()]);
    let b = modtop(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(strip(a), strip(b));
}

#[test]
fn dirichlet_config_writes_trace_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("d.json");
    std::fs::write(
        &cfg,
        r#"{"command":"dirichlet","params":{"n":32,"exponent":"affine:2,2","phi":"linear"},"tolerances":{"tol":1e-9}}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = modtop(&["--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("dirichlet_trace.csv")).unwrap();
    assert!(csv.starts_with("iteration,energy,grad_inf,step,modular_distance\n"));
    assert!(csv.lines().count() > 2);
}

#[test]
fn overflow_cap_comes_from_the_environment() {
    let bad = Command::new(env!("CARGO_BIN_EXE_modtop"))
        .args(["modular", "--seq", "tail=zero", "--exp", "identity"])
        .env("MODTOP_CAP", "lots")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let ok = Command::new(env!("CARGO_BIN_EXE_modtop"))
        .args(["modular", "--seq", "runs=[(1..1,100)]", "--exp", "table:200"])
        .env("MODTOP_CAP", "100")
        .output()
        .unwrap();
    let r = json(&ok);
    assert_eq!(r["result"]["modular"]["certificate"]["kind"], "overflow-cap");
}
