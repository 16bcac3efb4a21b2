use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_toric-complexity"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn resolve_prints_rays() {
    let (code, out, _) = run(&["fan", "resolve", "--rays", "[[0,1],[-2,-1],[2,-1]]"]);
    assert_eq!(code, 0);
    for r in ["(1,0)", "(1,-1)", "(0,-1)", "(-1,-1)", "(-1,0)"] {
        assert!(out.contains(r), "{r} missing from {out}");
    }
}

#[test]
fn malformed_json_is_a_usage_error() {
    let (code, _, err) = run(&["fan", "info", "--rays", "[[1,0],[0,1]"]);
    assert_eq!(code, 2);
    assert!(err.contains("malformed fan JSON at line 1, column"), "{err}");
}

#[test]
fn unknown_case_is_a_usage_error() {
    assert_eq!(run(&["verify", "case", "9.9"]).0, 2);
}

#[test]
fn verification_exit_codes() {
    let (code, out, _) = run(&["--json", "verify", "case", "4.2"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["status"], "PASS");
    assert!(v.get("runtime_ms").is_none());

    let small = ["verify", "theorem31", "--coord-bound", "1", "--ray-bound", "4", "--denom-bound", "2"];
    assert_eq!(run(&small).0, 0);
    let mut faulty = small.to_vec();
    faulty.push("--inject-fault");
    let (code, out, _) = run(&faulty);
    assert_eq!(code, 1);
    assert!(out.contains("FAIL"));
}

#[test]
fn complexity_search_json() {
    let (code, out, _) = run(&["--json", "complexity", "search", "--pair", "fn-3"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["best"]["orbifold_value"], "0");
    assert_eq!(v["best"]["norm"], "3");
}
