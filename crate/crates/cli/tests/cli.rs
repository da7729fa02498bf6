mod common;

use common::*;
use serde_json::Value;
use stml::c::parser::parse_c;
use stml::c::printer::print_c;

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr_json(o: &std::process::Output) -> Value {
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_valid("error", &v);
    v
}

#[test]
fn transform_fusion_scripted() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.c");
    let script = format!("scripted:{}", corpus("fusion.script").display());
    let o = stml(&[
        "transform",
        corpus("fusion_step0.c").to_str().unwrap(),
        "--oracle",
        &script,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let code = std::fs::read_to_string(&out).unwrap();
    let want = print_c(&parse_c(&corpus_text("fusion_step5.c")).unwrap());
    let fresh = code
        .lines()
        .nth(1)
        .unwrap()
        .split(' ')
        .next()
        .unwrap()
        .to_string();
    assert_eq!(code.replace(&fresh, "k"), want);
    let report: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out.c.report.json")).unwrap(),
    )
    .unwrap();
    assert_valid("report", &report);
    assert_eq!(report["steps"].as_array().unwrap().len(), 5);
    assert_eq!(report["outcome"], "final");
}

#[test]
fn transform_without_matches_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.c");
    let src = "float x, y;\nx = y;\n";
    std::fs::write(&input, src).unwrap();
    let o = stml(&["transform", input.to_str().unwrap(), "--oracle", "greedy"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), src);
}

#[test]
fn unreadable_rules_file() {
    let o = stml(&[
        "transform",
        corpus("fusion_step0.c").to_str().unwrap(),
        "--rules",
        "/no/such/rules.stml",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"], "FileError");
}

#[test]
fn budget_exhaustion_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let script = format!("scripted:{}", corpus("fusion.script").display());
    let o = stml(&[
        "transform",
        corpus("fusion_step0.c").to_str().unwrap(),
        "--oracle",
        &script,
        "--budget",
        "2",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_valid("report", &r);
    assert_eq!(r["outcome"], "budget_exhausted");
    assert_eq!(r["steps"].as_array().unwrap().len(), 2);
}

#[test]
fn bad_oracle_spec() {
    let o = stml(&[
        "transform",
        corpus("fusion_step0.c").to_str().unwrap(),
        "--oracle",
        "psychic",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"], "OracleSpecError");
}

#[test]
fn rule_path_env() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("only.stml"),
        "ZeroAdd {\n  pattern: { cexpr(e) + 0 }\n  generate: { cexpr(e) }\n}\n",
    )
    .unwrap();
    let input = dir.path().join("in.c");
    std::fs::write(&input, "float x, y;\nx = y + 0;\n").unwrap();
    let o = std::process::Command::new(env!("CARGO_BIN_EXE_stml"))
        .args(["matches", input.to_str().unwrap()])
        .env("STML_RULE_PATH", dir.path())
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rules: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["rule"].as_str().unwrap())
        .collect();
    assert_eq!(rules, ["ZeroAdd"]);
}

#[test]
fn lower_skeletons_gives_lowered_form() {
    let o = stml(&["lower", corpus("skeletons.c").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let squash = |s: &str| s.split_whitespace().collect::<String>();
    assert_eq!(
        squash(&stdout(&o)),
        squash(&corpus_text("skeletons_lowered.c"))
    );
}

#[test]
fn lower_leaves_stml_only_input_alone() {
    let o = stml(&["lower", corpus("skeletons_lowered.c").to_str().unwrap()]);
    let squash = |s: &str| s.split_whitespace().collect::<String>();
    assert_eq!(
        squash(&stdout(&o)),
        squash(&corpus_text("skeletons_lowered.c"))
    );
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.c");
    let src = "float x[N];\n#pragma stml iteration_independent\nfor (int i = 0; i < N; i++)\n    x[i] = 0;\n";
    std::fs::write(&input, src).unwrap();
    assert_eq!(stdout(&stml(&["lower", input.to_str().unwrap()])), src);
}

#[test]
fn lower_bad_arity() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.c");
    std::fs::write(
        &input,
        "#pragma polca map F v\nfor (int i = 0; i < N; i++) w[i] = v[i];\n",
    )
    .unwrap();
    let o = stml(&["lower", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"], "LoweringError");
}

#[test]
fn matches_lists_fusion_on_step0() {
    let o = stml(&["matches", corpus("fusion_step0.c").to_str().unwrap()]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_valid("matches", &v);
    assert!(v
        .as_array()
        .unwrap()
        .iter()
        .any(|m| m["rule"] == "For-LoopFusion" && m["certainty"] == "Proven"));
}

#[test]
fn matches_on_empty_program() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.c");
    std::fs::write(&input, "").unwrap();
    let o = stml(&["matches", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        serde_json::from_slice::<Value>(&o.stdout).unwrap(),
        Value::Array(vec![])
    );
}

#[test]
fn matches_include_unknown_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("u.c");
    std::fs::write(&input, UNKNOWN_FUSION).unwrap();
    let v: Value =
        serde_json::from_slice(&stml(&["matches", input.to_str().unwrap()]).stdout).unwrap();
    assert_valid("matches", &v);
    let m = &v[0];
    assert_eq!(m["certainty"], "Unknown-conditions");
    assert!(!m["unknown_conditions"].as_array().unwrap().is_empty());
}

#[test]
fn sidecar_properties_flag() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("u.c");
    std::fs::write(&input, "x = F(a); x = x + G(b);\n").unwrap();
    let side = dir.path().join("facts.txt");
    std::fs::write(
        &side,
        "u.c:1: #pragma stml pure F\nu.c:1: #pragma stml pure G\n",
    )
    .unwrap();
    let v: Value = serde_json::from_slice(
        &stml(&[
            "matches",
            input.to_str().unwrap(),
            "--properties",
            side.to_str().unwrap(),
        ])
        .stdout,
    )
    .unwrap();
    let j = v
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["rule"] == "JoinAssignments")
        .unwrap();
    assert_eq!(j["certainty"], "Proven", "{j:#}");
}
