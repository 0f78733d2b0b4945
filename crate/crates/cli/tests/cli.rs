use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_advrisk"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

const LINE3: &str = r#"{"schema_version":1,"space":{"kind":"grid-1d","n":3},
    "p0":[1,0,0],"p1":[0,0,1],"T":1,"epsilon":1}"#;

#[test]
fn nash_on_three_points() {
    let v = json(&run(&["nash"], LINE3));
    assert_eq!(v["value"], "1/2");
    assert_eq!(v["p0_star"], serde_json::json!(["0", "1", "0"]));
    assert_eq!(v["p1_star"], serde_json::json!(["0", "1", "0"]));
    assert_eq!(v["delta"], "0");
    assert_eq!(v["midpoint_complete"], true);
}

#[test]
fn optimal_risk_and_game_agree() {
    let opt = json(&run(&["optimal-risk"], LINE3));
    let game = json(&run(&["game"], LINE3));
    assert_eq!(opt["value"], "1/2");
    assert_eq!(game["supinf"]["value"], opt["value"]);
    assert_eq!(game["infsup"]["value"], opt["value"]);
}

#[test]
fn risk_needs_a_region() {
    let out = run(&["risk"], LINE3);
    assert_eq!(out.status.code(), Some(2));
    let with = LINE3.replace("\"epsilon\":1", "\"epsilon\":1,\"region\":[2]");
    let v = json(&run(&["risk"], &with));
    assert_eq!(v["risks"]["standard"], "0");
    assert_eq!(v["risks"]["expansion"], "1/2");
    assert_eq!(v["risks"]["winf_ball"], "1/2");
}

#[test]
fn invalid_input_exits_with_validation_code() {
    let negative = LINE3.replace("\"p0\":[1,0,0]", "\"p0\":[2,-1,0]");
    let out = run(&["nash"], &negative);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p0"));
    let unnormalized = LINE3.replace("\"p0\":[1,0,0]", "\"p0\":[1,1,0]");
    assert_eq!(run(&["optimal-risk"], &unnormalized).status.code(), Some(2));
    assert_eq!(run(&["game"], "not json").status.code(), Some(2));
    let bad_eps = LINE3.replace("\"epsilon\":1", "\"epsilon\":-1");
    assert_eq!(run(&["game"], &bad_eps).status.code(), Some(2));
}

#[test]
fn float_mode_accepts_rounded_masses() {
    let rounded = LINE3.replace("\"p0\":[1,0,0]", "\"p0\":[0.3333333333,0.3333333333,0.3333333334]");
    assert_eq!(run(&["optimal-risk"], &rounded).status.code(), Some(0));
    let off = LINE3.replace("\"p0\":[1,0,0]", "\"p0\":[0.333,0.333,0.333]");
    assert_eq!(run(&["optimal-risk"], &off).status.code(), Some(2));
    let v = json(&run(&["optimal-risk", "--mode", "float", "--tolerance", "0.01"], &off));
    assert!(v["value"].is_number());
}

#[test]
fn probe_finds_the_gap() {
    let s = r#"{"schema_version":1,"space":{"kind":"grid-1d","n":4},
        "p0":[0,0,0,1],"p1":[1,0,0,0],"T":1,"epsilon":"3/2"}"#;
    let v = json(&run(&["probe"], s));
    assert_eq!(v["gap"]["minkowski_form"], "1");
    assert_eq!(v["gap"]["strassen_lhs"], "0");
    assert_eq!(v["midpoint_complete"], false);
    let v = json(&run(&["probe"], &s.replace("\"3/2\"", "1")));
    assert!(v["gap"].is_null());
}

#[test]
fn csv_output_is_flat() {
    let text = String::from_utf8(run(&["nash", "--format", "csv"], LINE3).stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("key,value"));
    assert!(text.lines().any(|l| l == "value,1/2"));
    assert!(text.lines().any(|l| l == "p0_star,0 1 0"));
}

#[test]
fn unknown_check_is_rejected() {
    assert_eq!(run(&["verify", "--suite", "nope", "--count", "1"], "").status.code(), Some(2));
}

#[test]
fn verify_single_check_is_reproducible() {
    let a = json(&run(&["verify", "--suite", "minimax", "--seed", "3", "--count", "20", "--jobs", "1"], ""));
    let b = json(&run(&["verify", "--suite", "minimax", "--seed", "3", "--count", "20", "--jobs", "3"], ""));
    assert_eq!(a, b);
    assert_eq!(a["status"], "pass");
}

#[test]
fn input_file_is_read_and_validated() {
    let dir = std::env::temp_dir().join(format!("advrisk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("good.json");
    let bad = dir.join("bad.json");
    std::fs::write(&good, LINE3.replace("\"epsilon\":1", "\"epsilon\":1,\"region\":[2]")).unwrap();
    std::fs::write(&bad, LINE3.replace("\"p1\":[0,0,1]", "\"p1\":[0,-1,2]")).unwrap();
    let v = json(&run(&["risk", "--input", good.to_str().unwrap()], ""));
    assert_eq!(v["risks"]["transport_maps"], "1/2");
    let out = run(&["risk", "--input", bad.to_str().unwrap()], "");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p1: negative mass"));
    let missing = run(&["risk", "--input", dir.join("absent.json").to_str().unwrap()], "");
    assert_eq!(missing.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn shipped_scenarios_run() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let path = path.to_str().unwrap();
        for command in ["optimal-risk", "game", "nash", "probe"] {
            let out = run(&[command, "--input", path], "");
            assert!(out.status.success(), "{command} {path}: {}", String::from_utf8_lossy(&out.stderr));
        }
        seen += 1;
    }
    assert!(seen >= 4);
}
