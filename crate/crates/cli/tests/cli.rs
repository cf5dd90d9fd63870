use std::process::{Command, Output};

const X2: &str = include_str!("../../core/fixtures/x2.wdvv");

fn qmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmf")).args(args).env_remove("QMF_CACHE_DIR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = qmf(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

fn code(args: &[&str]) -> Option<i32> {
    qmf(args).status.code()
}

#[test]
fn expand_ei2_json_is_divisor_sums() {
    let v: serde_json::Value = serde_json::from_str(&ok(&["expand", "Ei2", "--order", "5", "--format", "json"])).unwrap();
    let series = &v["series"];
    assert_eq!(series["grid_denominator"], 1);
    assert_eq!(series["trunc"], 5);
    let coeffs: Vec<(i64, String)> = serde_json::from_value(series["coeffs"].clone()).unwrap();
    let want: Vec<(i64, String)> = [1, -24, -72, -96, -168].iter().enumerate().map(|(k, c)| (k as i64, format!("{c}/1"))).collect();
    assert_eq!(coeffs, want);
}

#[test]
fn expand_text() {
    assert_eq!(ok(&["expand", "Ei2", "--order", "5"]), "Ei2 = 1 - 24*Q^1 - 72*Q^2 - 96*Q^3 - 168*Q^4 + O(Q^5)\n");
    assert!(ok(&["expand", "C@3", "--order", "3"]).starts_with("C@3 = 3*Q^(1/3) + "));
}

#[test]
fn decimal_is_marked_and_text_only() {
    let out = ok(&["expand", "Ei2", "--order", "2", "--decimal"]);
    assert!(out.contains("decimal approximation (not exact)"));
    assert_eq!(code(&["expand", "Ei2", "--format", "json", "--decimal"]), Some(2));
    assert_eq!(code(&["table", "--orbifold", "X2", "--correlator", "X", "--max-degree", "3", "--decimal"]), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&["expand", "bogus"]), Some(2));
    assert_eq!(code(&["expand", "Ei2", "--order", "0"]), Some(2));
    assert_eq!(code(&["solve", "--orbifold", "X1"]), Some(2));
    assert_eq!(code(&["solve", "--orbifold", "X5"]), Some(2));
    assert_eq!(code(&["verify", "--suite", "nonsense"]), Some(2));
    assert_eq!(code(&["table", "--orbifold", "X2", "--correlator", "X", "--max-degree", "-1"]), Some(2));
    assert_eq!(code(&["table", "--orbifold", "X2", "--correlator", "Z99", "--max-degree", "2"]), Some(2));
}

#[test]
fn solve_x2() {
    let out = ok(&["solve", "--orbifold", "X2", "--order", "10"]);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("X = q^1 + 4*q^3 + "), "{out}");
    assert!(lines[1].starts_with("Y = -1/4 + "), "{out}");
    assert!(lines[2].starts_with("Z = 2*q^2 + "), "{out}");
    assert!(out.contains("O(q^10)"));
}

#[test]
fn solve_x3_minimal_json() {
    let v: serde_json::Value =
        serde_json::from_str(&ok(&["solve", "--orbifold", "X3", "--variant", "minimal", "--order", "20", "--format", "json"])).unwrap();
    assert_eq!(v["variable"], "q");
    let z1 = &v["series"]["Z1"]["coeffs"];
    assert_eq!(z1[0], serde_json::json!([0, "1/3"]));
    assert_eq!(v["series"]["Z4"]["coeffs"][0], serde_json::json!([1, "1/1"]));
    assert_eq!(v["series"]["Z3"]["coeffs"][0][0], 0);
}

#[test]
fn solve_resonance_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x2.wdvv");
    std::fs::write(&path, X2.replace("seed X = q + O(q^2)", "seed X = O(q)")).unwrap();
    let o = qmf(&["solve", "--orbifold", "X2", "--fixture", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("q^1"));
}

#[test]
fn verify_suites_pass() {
    let v: serde_json::Value = serde_json::from_str(&ok(&["verify", "--suite", "ramanujan"])).unwrap();
    assert_eq!(v["suite"], "ramanujan");
    assert_eq!(v["trunc"], 50);
    assert_eq!(v["checks"].as_array().unwrap().len(), 16);
    let v: serde_json::Value = serde_json::from_str(&ok(&["verify", "--suite", "wdvv", "--order", "40"])).unwrap();
    for c in v["checks"].as_array().unwrap() {
        assert_ne!(c["status"], "fail", "{c}");
        for key in ["id", "paper_ref", "status", "detail"] {
            assert!(c.get(key).is_some());
        }
    }
}

#[test]
fn verify_perturbed_fixture_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x2.wdvv");
    let from = "solve e3: theta_q Z = 4*X^2 - 4*Z^2";
    assert!(X2.contains(from));
    std::fs::write(&path, X2.replace(from, "solve e3: theta_q Z = 4*X^2 - 3*Z^2")).unwrap();
    let o = qmf(&["verify", "--fixture", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["status"] == "fail"));

    std::fs::write(&path, X2).unwrap();
    ok(&["verify", "--fixture", path.to_str().unwrap()]);
}

#[test]
fn tables() {
    assert_eq!(
        ok(&["table", "--orbifold", "X2", "--correlator", "X", "--max-degree", "3"]),
        "degree,invariant\n0,0\n1,1\n2,0\n3,4\n"
    );
    let v: serde_json::Value =
        serde_json::from_str(&ok(&["table", "--orbifold", "X3", "--correlator", "Z4", "--max-degree", "1", "--format", "json"])).unwrap();
    assert_eq!(v["invariants"], serde_json::json!(["0", "1"]));
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["verify", "--suite", "theta", "--order", "20"][..],
        &["solve", "--orbifold", "X6", "--order", "12", "--format", "json"],
        &["expand", "A@4(Q^2)", "--order", "12", "--format", "json"],
    ] {
        assert_eq!(stdout(&qmf(args)), stdout(&qmf(args)), "{args:?}");
    }
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        let o = Command::new(env!("CARGO_BIN_EXE_qmf"))
            .args(["expand", "B@3", "--order", "8", "--format", "json"])
            .env("QMF_CACHE_DIR", dir.path())
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        stdout(&o)
    };
    let first = run();
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
    assert_eq!(run(), first);
    assert_eq!(first, ok(&["expand", "B@3", "--order", "8", "--format", "json"]));
}
