use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_opbac"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("opbac-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const SMALL: &str = "NAME : small
TYPE : OP
DIMENSION : 5
COST_LIMIT : 30
EDGE_WEIGHT_TYPE : EUC_2D
NODE_COORD_SECTION
1 0 0
2 5 0
3 5 5
4 0 5
5 40 40
NODE_SCORE_SECTION
1 0
2 3
3 4
4 5
5 100
DEPOT_SECTION
1
-1
EOF
";

#[test]
fn solve_prints_summary() {
    let inst = scratch("small.oplib", SMALL);
    let out = bin().arg("solve").arg(&inst).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("OPTIMAL LB=12 UB=12"), "{stdout}");
}

#[test]
fn json_report_has_documented_fields() {
    let inst = scratch("small-json.oplib", SMALL);
    let out = bin().args(["solve", "--json", "--seed", "5"]).arg(&inst).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["instance", "lb", "ub", "gap", "status", "tour", "time_s", "stats"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["status"], "Optimal");
    assert_eq!(v["lb"], 12);
    assert_eq!(v["gap"], 0.0);
    assert_eq!(v["tour"][0], 1);
    assert!(v["stats"]["cuts_by_family"].is_object());
    assert!(v["stats"]["pricing"]["rounds"].is_number());
    assert!(v["stats"]["nodes"].as_u64().unwrap() >= 1);
}

#[test]
fn berlin52_gen1_with_ablation_flags() {
    let out = bin()
        .args(["solve", "--shrink", "none", "--no-eph", "--sep-subloops", "2", "--branch-heur", "pb"])
        .arg(data("berlin52-gen1.oplib"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("OPTIMAL LB=37 UB=37"));
}

#[test]
fn time_limit_reports_consistent_bounds() {
    let out = bin().args(["solve", "--json", "--time-limit", "0"]).arg(data("berlin52-gen2.oplib")).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "TimeLimit");
    assert!(v["lb"].as_i64().unwrap() <= v["ub"].as_i64().unwrap());
}

#[test]
fn trace_and_lp_dump_are_written() {
    let inst = scratch("small-trace.oplib", SMALL);
    let trace = inst.with_extension("jsonl");
    let lp = inst.with_extension("lp");
    let out = bin().arg("solve").arg(&inst).arg("--trace").arg(&trace).arg("--lp-dump").arg(&lp).output().unwrap();
    assert!(out.status.success());
    let events: Vec<serde_json::Value> =
        std::fs::read_to_string(&trace).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(events.first().unwrap()["event"], "start");
    assert_eq!(events.last().unwrap()["event"], "end");
    assert!(std::fs::metadata(&lp).unwrap().len() > 0);
}

#[test]
fn missing_instance_exits_2() {
    let out = bin().args(["solve", "definitely-missing.oplib"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_instance_exits_2() {
    let inst = scratch("bad.oplib", "NAME : bad\nDIMENSION : x\nEOF\n");
    let out = bin().arg("solve").arg(&inst).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_verdicts() {
    let inst = scratch("small-val.oplib", SMALL);
    let ok = scratch("ok.tour", "1 2 3 4\n");
    let out = bin().arg("validate").arg(&inst).arg(&ok).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "FEASIBLE score=12 length=20 budget=30");

    let tsplib = scratch("ok2.tour", "NAME : t\nTYPE : TOUR\nTOUR_SECTION\n1\n4\n3\n2\n-1\nEOF\n");
    assert!(bin().arg("validate").arg(&inst).arg(&tsplib).output().unwrap().status.success());

    let far = scratch("far.tour", "1 2 5\n");
    let out = bin().args(["validate", "--json"]).arg(&inst).arg(&far).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["feasible"], false);
    assert!(v["reason"].as_str().unwrap().contains("exceeds the budget"));

    for (name, body, reason) in [
        ("empty.tour", "", "at least 3"),
        ("nodepot.tour", "2 3 4", "depot"),
        ("repeat.tour", "1 2 3 2", "twice"),
        ("range.tour", "1 2 9", "out of range"),
    ] {
        let t = scratch(name, body);
        let out = bin().arg("validate").arg(&inst).arg(&t).output().unwrap();
        assert_eq!(out.status.code(), Some(1), "{name}");
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.starts_with("INVALID") && text.contains(reason), "{name}: {text}");
    }
}
