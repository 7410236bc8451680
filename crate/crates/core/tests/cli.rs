use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shallow-ident"))
}

#[test]
fn help_exits_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("plan-analytic"));
}

#[test]
fn missing_argument_is_a_usage_error() {
    let out = bin().args(["check"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "usage");
}

#[test]
fn malformed_network_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("net.json");
    std::fs::write(
        &f,
        r#"{"activation":"relu","d":2,"neurons":[{"a":[1],"b":0,"s":1}],"c":0}"#,
    )
    .unwrap();
    let out = bin().args(["check", "--net"]).arg(&f).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["message"].as_str().unwrap().contains("neurons[0].a"));
}

#[test]
fn round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let net = r#"{"activation":"relu","d":2,"neurons":[
        {"a":[1,0.5],"b":0.2,"s":1.5},{"a":[-0.3,1],"b":-0.4,"s":-1},{"a":[0.7,-0.7],"b":0.1,"s":0.8}],"c":0.25}"#;
    std::fs::write(dir.path().join("net.json"), net).unwrap();
    let run = |args: &[&str]| {
        let out = bin().args(args).current_dir(dir.path()).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    let s = run(&["plan-relu", "--net", "net.json", "--out", "plan.json"]);
    assert!(s.contains("points: 48"), "{s}");
    run(&[
        "sample",
        "--net",
        "net.json",
        "--plan",
        "plan.json",
        "--out",
        "data.json",
    ]);
    let s = run(&[
        "reconstruct",
        "--data",
        "data.json",
        "--out",
        "back.json",
        "--reference",
        "net.json",
    ]);
    assert!(s.contains("equivalence certificate: found"), "{s}");
    let s = run(&["equiv", "--net1", "net.json", "--net2", "back.json"]);
    assert!(s.contains("equivalence certificate: found"), "{s}");
}

#[test]
fn inadmissible_relu_is_reported_reducible() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("net.json");
    std::fs::write(
        &f,
        r#"{"activation":"relu","d":1,"neurons":[{"a":[1],"b":0,"s":1},{"a":[2],"b":0,"s":1}],"c":0}"#,
    )
    .unwrap();
    let out = bin().args(["check", "--net"]).arg(&f).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("reducible"));
}
