use std::process::{Command, Output};

fn krylov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krylov"))
        .args(args)
        .env_remove("KRYLOV_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn even_rows(csv: &str) -> Vec<(usize, String)> {
    csv.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('m'))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].to_string())
        })
        .filter(|(m, _)| m % 2 == 0 && *m > 0)
        .collect()
}

#[test]
fn krawtchouk_single_site_moments_are_half() {
    let o = krylov(&[
        "moments",
        "--system",
        "krawtchouk",
        "-N",
        "1",
        "--param",
        "p=1/2",
        "--mode",
        "exact",
        "-K",
        "6",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = even_rows(&stdout(&o));
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|(_, v)| v == "1/2"));
}

#[test]
fn krawtchouk_n6_moments_are_constant() {
    let o = krylov(&[
        "moments",
        "--system",
        "krawtchouk",
        "-N",
        "6",
        "--param",
        "p=1/2",
        "--mode",
        "exact",
        "-K",
        "6",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = even_rows(&stdout(&o));
    assert_eq!(rows.len(), 6);
    // 2p(1-p)(N+2)/(2N+1) at N = 6
    assert!(rows.iter().all(|(_, v)| v == "4/13"), "{rows:?}");
}

#[test]
fn exact_mode_rejected_for_infinite() {
    let o = krylov(&["moments", "--system", "hermite", "--mode", "exact"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mode=exact requires a finite discrete system"));
}

#[test]
fn exact_mode_rejected_for_complexity() {
    let o = krylov(&["complexity", "--system", "krawtchouk", "--mode", "exact"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("invalid mode"));
}

#[test]
fn hermite_verify_passes() {
    let o = krylov(&["verify", "--system", "hermite", "--beta", "1", "--precision", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("b2_is_zero")).expect("b2 row");
    assert!(line.ends_with("PASS"));
    assert!(!out.contains("FAIL"));
}

#[test]
fn beta_rules_name_the_field() {
    let o = krylov(&["moments", "--system", "charlier"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("invalid beta"));
    let o = krylov(&["moments", "--system", "hahn", "--beta", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("invalid beta"));
    let o = krylov(&["moments", "--system", "charlier", "--beta", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_name_the_field() {
    for (args, field) in [
        (vec!["moments", "--system", "nosuch"], "invalid system"),
        (
            vec!["moments", "--system", "krawtchouk", "--param", "z=1"],
            "invalid param",
        ),
        (
            vec!["moments", "--system", "krawtchouk", "--param", "p=2"],
            "invalid param",
        ),
        (
            vec!["moments", "--system", "hermite", "--beta", "1", "-N", "3"],
            "invalid N",
        ),
        (
            vec!["moments", "--system", "krawtchouk", "--mode", "fast"],
            "invalid mode",
        ),
        (
            vec!["complexity", "--system", "krawtchouk", "--t-grid", "0:1"],
            "invalid t-grid",
        ),
        (
            vec!["moments", "--system", "krawtchouk", "--precision", "5"],
            "invalid precision",
        ),
        (vec!["moments", "--system", "krawtchouk", "-K", "0"], "invalid K"),
    ] {
        let o = krylov(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains(field), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn reports_are_deterministic_and_embed_config() {
    let args = [
        "lanczos",
        "--system",
        "meixner",
        "--beta",
        "1",
        "--format",
        "json",
        "--precision",
        "40",
    ];
    let a = krylov(&args);
    let b = krylov(&args);
    assert_eq!(a.stdout, b.stdout);
    let j: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(j["config"]["system"], "meixner");
    assert_eq!(j["config"]["precision"], 40);
    assert_eq!(j["config"]["params"]["c"], "1/2");
    assert_eq!(j["lanczos"]["classification"], "StopsAtO2");
}

#[test]
fn krawtchouk_chain_stops_at_two() {
    let o = krylov(&["lanczos", "--system", "krawtchouk", "--mode", "exact"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("# classification=StopsAtO2"));
    assert!(out.contains("\n1,7/22\n2,15/22\n"), "{out}");
}

#[test]
fn precision_env_sets_default() {
    let o = Command::new(env!("CARGO_BIN_EXE_krylov"))
        .args(["moments", "--system", "hahn", "--format", "json"])
        .env("KRYLOV_PRECISION", "33")
        .output()
        .unwrap();
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["config"]["precision"], 33);
}

#[test]
fn complexity_profile_is_normalized() {
    let o = krylov(&[
        "complexity",
        "--system",
        "krawtchouk",
        "-N",
        "3",
        "--t-grid",
        "0:4:5",
        "--format",
        "json",
        "--precision",
        "40",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let norms = j["profile"]["norm"].as_array().unwrap();
    assert_eq!(norms.len(), 5);
    for n in norms {
        let v: f64 = n.as_str().unwrap().parse().unwrap();
        assert!((v - 1.0).abs() < 1e-25);
    }
    let seq = krylov(&[
        "complexity",
        "--system",
        "krawtchouk",
        "-N",
        "3",
        "--t-grid",
        "0:4:5",
        "--format",
        "json",
        "--precision",
        "40",
        "--sequential",
    ]);
    assert_eq!(seq.stdout, o.stdout);
}

#[test]
fn heisenberg_check_passes_for_finite_and_infinite() {
    let o = krylov(&["heisenberg-check", "--system", "q_hahn", "--t-grid", "0:3:4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = krylov(&[
        "heisenberg-check",
        "--system",
        "laguerre",
        "--beta",
        "1",
        "--t-grid",
        "0:3:4",
        "--n-max",
        "15",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn system_file_and_output() {
    let dir = tempfile::tempdir().unwrap();
    let def = dir.path().join("sys.json");
    std::fs::write(
        &def,
        r#"{"kind":"dual_hahn","N":4,"params":{"a":"1","b":"2"},"mode":"exact"}"#,
    )
    .unwrap();
    let out = dir.path().join("mu.csv");
    let o = krylov(&[
        "moments",
        "--system-file",
        def.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("dual_hahn(N=4, a=1, b=2)"));
    assert_eq!(even_rows(&text)[0].1, "154/437");
}

#[test]
fn list_systems_has_sixteen() {
    let o = krylov(&["list-systems", "--format", "json"]);
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j.as_array().unwrap().len(), 16);
}

#[test]
fn verify_all_rejects_system() {
    let o = krylov(&["verify", "--all", "--system", "hahn"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn slow_thermal_tail_is_a_runtime_error() {
    // ratio of consecutive terms tends to e^{-1/2} > 1/2
    let o = krylov(&["moments", "--system", "meixner", "--beta", "1/2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("tail"));
}
