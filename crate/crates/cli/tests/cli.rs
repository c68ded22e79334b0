use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SOURCE: &str = include_str!("../../core/tests/fixtures/Inventory.java");

fn pepr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pepr"))
        .current_dir(dir)
        .env_remove("PEPR_WORKSPACE")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = pepr(dir, args);
    assert!(
        out.status.success(),
        "pepr {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(dir: &Path, args: &[&str]) -> String {
    let out = pepr(dir, args);
    assert_eq!(out.status.code(), Some(2), "pepr {args:?} should exit 2");
    String::from_utf8(out.stderr).unwrap()
}

/// A workspace with the fixture source and four registered tools.
fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("Inventory.java"), SOURCE).unwrap();
    for tool in ["AVATAR", "ACS", "Arja", "Recoder"] {
        ok(dir.path(), &["tool", "add", tool]);
    }
    dir
}

fn ranking(stdout: &str) -> Vec<(String, f64)> {
    let v: Value = serde_json::from_str(stdout).unwrap();
    v["ranking"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["tool"].as_str().unwrap().to_string(), e["score"].as_f64().unwrap()))
        .collect()
}

#[test]
fn rank_limits_to_top_k() {
    let dir = setup();
    let out = ok(
        dir.path(),
        &["rank", "--bug", "Inventory.java", "--lines", "22,24", "--top-k", "3"],
    );
    let r = ranking(&out);
    assert_eq!(r.len(), 3);
    // Nothing recorded yet: every score is 0 and registration order decides.
    assert!(r.iter().all(|(_, s)| *s == 0.0));
    assert_eq!(
        r.iter().map(|(t, _)| t.as_str()).collect::<Vec<_>>(),
        ["AVATAR", "ACS", "Arja"]
    );
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["bug"]["lines"][0]["bf1"], "Invocation");
    assert_eq!(v["bug"]["lines"][1]["bf1"], "LocalVariable");
}

#[test]
fn report_feeds_the_ranking() {
    let dir = setup();
    let bug = [
        "--bug",
        "Inventory.java",
        "--lines",
        "24",
        "--error-type",
        "java.lang.ClassCastException",
    ];
    let report = |tool: &str, status: &str| {
        let mut args = vec!["report", "--tool", tool, "--status", status];
        args.extend(bug);
        ok(dir.path(), &args);
    };
    report("Arja", "correct");
    report("Arja", "correct");
    report("Recoder", "overfit");

    let shown = ok(dir.path(), &["history", "show", "--tool", "Arja"]);
    let records: Vec<Value> = shown.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| r["correct"] == 2 && r["fail"] == 0));
    let recoder = ok(dir.path(), &["history", "show", "--tool", "Recoder"]);
    assert!(recoder
        .lines()
        .all(|l| l.contains("\"fail\":1") && l.contains("\"overfit\":1")));

    let mut args = vec!["rank"];
    args.extend(bug);
    let r = ranking(&ok(dir.path(), &args));
    assert_eq!(r[0], ("Arja".to_string(), 2.0));
}

#[test]
fn em_alpha_zero_removes_the_bonus() {
    let dir = setup();
    let bug = [
        "--bug",
        "Inventory.java",
        "--lines",
        "24",
        "--error-type",
        "java.lang.ClassCastException",
    ];
    for tool in ["AVATAR", "Arja"] {
        let mut args = vec!["report", "--tool", tool, "--status", "correct"];
        args.extend(bug);
        ok(dir.path(), &args);
    }
    let mut args = vec!["rank"];
    args.extend(bug);
    let with_bonus = ranking(&ok(dir.path(), &args));
    // AVATAR implements the cast checker that matches line 24.
    assert_eq!(with_bonus[0], ("AVATAR".to_string(), 3.0));
    args.extend(["--em-alpha", "0"]);
    let without = ranking(&ok(dir.path(), &args));
    assert_eq!(without[0], ("AVATAR".to_string(), 2.0));
    assert_eq!(without[1], ("Arja".to_string(), 2.0));
}

#[test]
fn input_errors_exit_2() {
    let dir = setup();
    fails(dir.path(), &["rank", "--bug", "Missing.java", "--lines", "3"]);
    let err = fails(dir.path(), &["rank", "--bug", "Inventory.java", "--lines", "10"]);
    assert!(err.lines().any(|l| l.starts_with("error:")), "{err}");
    fails(
        dir.path(),
        &["rank", "--bug", "Inventory.java", "--lines", "22", "--em-alpha", "-1"],
    );
    fails(
        dir.path(),
        &[
            "report",
            "--tool",
            "Arja",
            "--status",
            "maybe",
            "--bug",
            "Inventory.java",
            "--lines",
            "22",
        ],
    );
    fails(
        dir.path(),
        &[
            "report",
            "--tool",
            "Nobody",
            "--status",
            "fail",
            "--bug",
            "Inventory.java",
            "--lines",
            "22",
        ],
    );
    fails(dir.path(), &["tool", "add", "Arja"]);
    fails(dir.path(), &["tool", "add", "New", "--patterns", "P2"]);
    fails(dir.path(), &["history", "show", "--tool", "Nobody"]);
}

#[test]
fn tool_add_with_patterns_and_cold_start() {
    let dir = setup();
    ok(dir.path(), &["tool", "add", "Fresh", "--patterns", "P1,P4"]);
    let tools: Value = serde_json::from_str(&ok(dir.path(), &["tool", "list"])).unwrap();
    let fresh = tools.as_array().unwrap().iter().find(|t| t["name"] == "Fresh").unwrap();
    assert_eq!(fresh["patterns"], serde_json::json!(["P1", "P4"]));

    let r = ranking(&ok(dir.path(), &["rank", "--bug", "Inventory.java", "--lines", "24"]));
    assert_eq!(r.last().unwrap(), &("Fresh".to_string(), 0.0));

    let ws = dir.path().join("pepr.toml");
    fs::write(&ws, "tie_break = [\"Fresh\"]\n").unwrap();
    let r = ranking(&ok(dir.path(), &["rank", "--bug", "Inventory.java", "--lines", "24"]));
    assert_eq!(r[0].0, "Fresh");
}

#[test]
fn tool_add_imports_history() {
    let dir = setup();
    let records = [
        r#"{"bug_id": "b1", "lines": [{"line_id": 3, "bf1": "Return"}], "tool": "Late", "status": "correct"}"#,
        r#"{"bug_id": "b2", "source_path": "Inventory.java", "lines": [60], "tool": "Late", "status": "fail"}"#,
        r#"{"bug_id": "b3", "lines": [{"line_id": 3, "bf1": "If"}], "tool": "Other", "status": "correct"}"#,
    ];
    fs::write(dir.path().join("late.jsonl"), records.join("\n")).unwrap();
    ok(dir.path(), &["tool", "add", "Late", "--history", "late.jsonl"]);
    let shown = ok(dir.path(), &["history", "show", "--tool", "Late"]);
    let ret: Value = serde_json::from_str(shown.lines().next().unwrap()).unwrap();
    assert_eq!(
        (ret["value"].as_str(), ret["correct"].as_u64(), ret["fail"].as_u64()),
        (Some("Return"), Some(1), Some(1))
    );
    let tools = ok(dir.path(), &["tool", "list"]);
    assert!(tools.contains("\"Other\""));
}

#[test]
fn history_export_and_import_round_trip() {
    let dir = setup();
    ok(
        dir.path(),
        &[
            "report",
            "--tool",
            "ACS",
            "--status",
            "fail",
            "--bug",
            "Inventory.java",
            "--lines",
            "29",
        ],
    );
    let exported = ok(dir.path(), &["history", "export"]);
    let stored = fs::read_to_string(dir.path().join("pepr-history.json")).unwrap();
    let a: Value = serde_json::from_str(&exported).unwrap();
    let b: Value = serde_json::from_str(&stored).unwrap();
    assert_eq!(a, b);
    assert_eq!(a["schema_version"], 1);

    let other = tempfile::tempdir().unwrap();
    fs::write(other.path().join("pepr-history.json"), exported).unwrap();
    assert_eq!(
        ok(other.path(), &["history", "show"]),
        ok(dir.path(), &["history", "show"])
    );

    let records = r#"{"bug_id": "x", "lines": [{"line_id": 1, "bf1": "Throw"}], "tool": "ACS", "status": "correct"}"#;
    fs::write(dir.path().join("more.jsonl"), records).unwrap();
    ok(dir.path(), &["history", "import", "more.jsonl"]);
    let shown = ok(dir.path(), &["history", "show", "--tool", "ACS"]);
    assert!(shown.contains(r#""value":"Throw","fail":1,"correct":1"#), "{shown}");
}

#[test]
fn pattern_list_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let list = ok(dir.path(), &["pattern", "list"]);
    let ids: Vec<&str> = list.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(ids, ["P1", "P3", "P4"]);

    let exported = ok(dir.path(), &["pattern", "export"]);
    fs::write(dir.path().join("patterns.json"), &exported).unwrap();
    fs::write(dir.path().join("pepr.toml"), "patterns = \"patterns.json\"\n").unwrap();
    assert_eq!(ok(dir.path(), &["pattern", "export"]), exported);
}

#[test]
fn custom_pattern_config_drives_the_bonus() {
    let dir = setup();
    let config = r#"{"include_builtins": false, "patterns": [
        {"id": "P6", "name": "Return fixer", "feature_kind": "BF1",
         "predicate": {"kind": "statement_type_in", "args": ["Return"]},
         "implementers": ["Arja"]}
    ]}"#;
    fs::write(dir.path().join("patterns.json"), config).unwrap();
    fs::write(dir.path().join("pepr.toml"), "patterns = \"patterns.json\"\n").unwrap();
    let list = ok(dir.path(), &["pattern", "list"]);
    assert!(list.starts_with("P6\t"), "{list}");
    for tool in ["Arja", "Recoder"] {
        ok(
            dir.path(),
            &[
                "report",
                "--tool",
                tool,
                "--status",
                "correct",
                "--bug",
                "Inventory.java",
                "--lines",
                "60",
            ],
        );
    }
    let r = ranking(&ok(dir.path(), &["rank", "--bug", "Inventory.java", "--lines", "60"]));
    assert_eq!(r[0], ("Arja".to_string(), 1.5));
    assert_eq!(r[1], ("Recoder".to_string(), 1.0));

    fs::write(dir.path().join("patterns.json"), r#"[{"id": "P2"}]"#).unwrap();
    fails(dir.path(), &["pattern", "list"]);
}

fn write_dataset(dir: &Path) {
    let features = r#"[
        {"bug_id": "b1", "lines": [{"line_id": 1, "bf1": "Invocation"}]},
        {"bug_id": "b2", "lines": [{"line_id": 1, "bf1": "Invocation", "bf2": ["Cast"]}]},
        {"bug_id": "b3", "source_path": "Inventory.java", "lines": [24], "error_type": "java.lang.ClassCastException"},
        {"bug_id": "b4", "lines": [{"line_id": 1, "bf1": "Return"}]}
    ]"#;
    fs::write(dir.join("features.json"), features).unwrap();
    let outcomes = [
        ("b1", "A", "correct"),
        ("b1", "B", "overfit"),
        ("b2", "B", "correct"),
        ("b2", "C", "overfit"),
        ("b3", "C", "correct"),
        ("b4", "A", "overfit"),
    ];
    let lines: String = outcomes
        .iter()
        .map(|(b, t, o)| format!("{{\"bug_id\":\"{b}\",\"tool\":\"{t}\",\"outcome\":\"{o}\"}}\n"))
        .collect();
    fs::write(dir.join("outcomes.jsonl"), lines).unwrap();
}

#[test]
fn simulate_reports_every_k_and_the_baseline() {
    let dir = setup();
    write_dataset(dir.path());
    let args = [
        "simulate",
        "--outcomes",
        "outcomes.jsonl",
        "--features",
        "features.json",
        "--strategy",
        "optimal",
        "--top-k",
        "1,2,3",
    ];
    let csv = ok(dir.path(), &args);
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(
        rows[0],
        [
            "strategy",
            "k",
            "correct",
            "plausible",
            "patches",
            "tit",
            "hvt",
            "tisp",
            "hvsp"
        ]
    );
    assert_eq!(rows.len(), 5);
    // Three tools and four bugs. Optimal k=1 saves invocations but no validations here.
    assert_eq!(
        rows[1],
        ["optimal", "1", "3", "4", "4", "4", "4", "0.666667", "0.000000"]
    );
    assert_eq!(rows[4][..7], ["all", "3", "3", "4", "6", "12", "4"]);
    assert_eq!(rows[4][7..], ["0.000000", "0.000000"]);
    assert_eq!(ok(dir.path(), &args), csv);
}

#[test]
fn simulate_writes_files_and_honors_order() {
    let dir = setup();
    write_dataset(dir.path());
    fs::write(dir.path().join("order.txt"), "b4\nb3\nb2\nb1\n").unwrap();
    ok(
        dir.path(),
        &[
            "simulate",
            "--outcomes",
            "outcomes.jsonl",
            "--features",
            "features.json",
            "--order-file",
            "order.txt",
            "--csv",
            "out.csv",
            "--json",
            "out.json",
        ],
    );
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert!(csv.starts_with("strategy,k,"));
    let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out.json")).unwrap()).unwrap();
    assert_eq!(json["bugs"], 4);
    assert_eq!(json["rows"][0]["strategy"], "pepr");

    fs::write(dir.path().join("order.txt"), "b4\nb3\n").unwrap();
    fails(
        dir.path(),
        &[
            "simulate",
            "--outcomes",
            "outcomes.jsonl",
            "--features",
            "features.json",
            "--order-file",
            "order.txt",
        ],
    );
    fails(
        dir.path(),
        &[
            "simulate",
            "--outcomes",
            "outcomes.jsonl",
            "--features",
            "features.json",
            "--strategy",
            "greedy",
        ],
    );
}

#[test]
fn workspace_from_environment() {
    let dir = setup();
    let ws_dir = tempfile::tempdir().unwrap();
    fs::write(ws_dir.path().join("ws.toml"), "history = \"h.json\"\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pepr"))
        .current_dir(dir.path())
        .env("PEPR_WORKSPACE", ws_dir.path().join("ws.toml"))
        .args(["tool", "add", "Solo"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let saved = fs::read_to_string(ws_dir.path().join("h.json")).unwrap();
    assert!(saved.contains("Solo") && !saved.contains("AVATAR"));
}
