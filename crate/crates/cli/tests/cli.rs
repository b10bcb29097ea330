use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn snewton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snewton"))
        .args(args)
        .env_remove("SNEWTON_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid json")
}

fn tmp(name: &str, body: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::write(&p, body).unwrap();
    p
}

const RUNNING: [&str; 6] = [
    "refine",
    "--catalog",
    "running-example",
    "--x0",
    "1.001,0.999,1.001",
    "--tol",
];

#[test]
fn refine_running_example_converges() {
    let o = snewton(&[&RUNNING[..], &["0.1", "--format", "json"]].concat());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v = json(&o);
    assert_eq!(v["schema"], 1);
    assert!(v["trace"]["final_residual"].as_f64().unwrap() <= 1e-10);
    let last = v["trace"]["iterations"]
        .as_array()
        .unwrap()
        .last()
        .unwrap()
        .clone();
    assert!(last["error"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["trace"]["stop"], "converged");
}

#[test]
fn json_and_table_agree() {
    let j = json(&snewton(
        &[&RUNNING[..], &["0.1", "--format", "json"]].concat(),
    ));
    let t = stdout(&snewton(&[&RUNNING[..], &["0.1"]].concat()));
    let rows: Vec<&str> = t
        .lines()
        .filter(|l| l.starts_with(char::is_numeric))
        .collect();
    let its = j["trace"]["iterations"].as_array().unwrap();
    assert_eq!(rows.len(), its.len());
    for (row, it) in rows.iter().zip(its) {
        let cells: Vec<&str> = row.split('\t').collect();
        assert_eq!(cells[0], it["iter"].to_string());
        assert_eq!(
            cells[1],
            format!("{:.6e}", it["residual"].as_f64().unwrap())
        );
        assert_eq!(cells[4], format!("{:.6e}", it["error"].as_f64().unwrap()));
    }
}

#[test]
fn dimension_mismatch_is_a_usage_error() {
    let o = snewton(&["refine", "--catalog", "running-example", "--x0", "1,1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("3 variables"));
}

#[test]
fn unknown_catalog_entry_lists_names() {
    let o = snewton(&["analyze", "--catalog", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("running-example"));
}

#[test]
fn iteration_cap_exits_two() {
    let o = snewton(&[&RUNNING[..], &["0.1", "--iters", "1", "--stop", "1e-300"]].concat());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_reports_structure() {
    let v = json(&snewton(&[
        "analyze",
        "--catalog",
        "running-example",
        "--format",
        "json",
    ]));
    let r = &v["report"];
    assert_eq!(
        (
            r["breadth"].as_u64(),
            r["depth"].as_u64(),
            r["multiplicity"].as_u64()
        ),
        (Some(2), Some(2), Some(4))
    );
    assert_eq!(v["regular"], false);

    let v = json(&snewton(&[
        "analyze",
        "--catalog",
        "x2-z3xy-y2",
        "--format",
        "json",
    ]));
    let r = &v["report"];
    assert_eq!(
        (
            r["breadth"].as_u64(),
            r["depth"].as_u64(),
            r["multiplicity"].as_u64()
        ),
        (Some(3), Some(5), Some(12))
    );
}

#[test]
fn analyze_flags_regular_zeros() {
    let f = tmp("regular.txt", "x^2 - 1\ny - 2\n");
    let o = snewton(&[
        "analyze",
        "--file",
        f.to_str().unwrap(),
        "--vars",
        "x,y",
        "--x0",
        "1,2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let t = stdout(&o);
    assert!(t.contains("regular zero"), "{t}");
    assert!(t.contains("multiplicity: 1"), "{t}");
}

#[test]
fn check_verdicts() {
    let t = stdout(&snewton(&["check", "--catalog", "x2-z3xy-y2"]));
    assert!(
        t.contains("necessary: pass, sufficient: FAIL: not deflation-one"),
        "{t}"
    );

    let t = stdout(&snewton(&["check", "--catalog", "running-example"]));
    assert!(
        t.contains("necessary: pass, sufficient: pass: deflation-one"),
        "{t}"
    );

    let f = tmp(
        "regular-check.json",
        r#"{"vars": ["x", "y"], "polys": ["x - 1", "y + x"]}"#,
    );
    let o = snewton(&["check", "--file", f.to_str().unwrap(), "--x0", "1,-1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("regular"));
}

#[test]
fn file_inputs_json_and_text() {
    let j = tmp(
        "sys.json",
        r#"{"vars": ["x", "y"], "polys": ["x^2", "y - x"]}"#,
    );
    let o = snewton(&[
        "refine",
        "--file",
        j.to_str().unwrap(),
        "--x0",
        "0.01,0.01",
        "--tol",
        "auto",
        "--format",
        "json",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v = json(&o);
    assert!(v["trace"]["iterations"][0]
        .get("error")
        .map_or(true, Value::is_null));

    let t = tmp("sys.txt", "x^2\ny - x\n");
    let o = snewton(&[
        "refine",
        "--file",
        t.to_str().unwrap(),
        "--vars",
        "x,y",
        "--x0",
        "0.01,0.01",
        "--reference",
        "0,0",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("exponent"));

    let o = snewton(&["refine", "--file", t.to_str().unwrap(), "--x0", "0,0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = snewton(&["refine", "--file", t.to_str().unwrap(), "--vars", "x,y"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bench_robustness_and_efficiency() {
    let o = snewton(&["bench", "robustness"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("stationary"));

    let o = snewton(&[
        "bench",
        "efficiency",
        "--sizes",
        "10:2",
        "--iters",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["report"]["rows"].as_array().unwrap().len(), 1);

    assert_eq!(
        snewton(&["bench", "efficiency", "--sizes", "3:5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(snewton(&["bench", "table9"]).status.code(), Some(1));
}

#[test]
fn same_seed_same_bytes() {
    let args = ["bench", "table1", "--format", "json", "--seed", "7"];
    assert_eq!(snewton(&args).stdout, snewton(&args).stdout);
    let args = [&RUNNING[..], &["0.1", "--format", "json", "--seed", "3"]].concat();
    assert_eq!(snewton(&args).stdout, snewton(&args).stdout);
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_snewton"));
        c.args(["refine", "--catalog", "running-example", "--format", "json"]);
        match env {
            Some(s) => c.env("SNEWTON_SEED", s),
            None => c.env_remove("SNEWTON_SEED"),
        };
        json(&c.output().unwrap())["seed"].clone()
    };
    assert_eq!(run(Some("42")), 42);
    assert_eq!(run(None), 0);
}

#[test]
fn help_exits_zero() {
    let o = snewton(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("refine"));
    assert_eq!(snewton(&[]).status.code(), Some(1));
}
