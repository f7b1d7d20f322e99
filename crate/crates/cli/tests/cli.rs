use std::process::{Command, Output};

fn programs() -> String {
    format!("{}/../../programs", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    let dir = programs();
    let args: Vec<String> = args
        .iter()
        .map(|a| {
            if a.ends_with(".prog") || a.ends_with(".json") {
                format!("{dir}/{a}")
            } else {
                a.to_string()
            }
        })
        .collect();
    Command::new(env!("CARGO_BIN_EXE_responsibility"))
        .args(&args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn analyze_access_control_json() {
    let o = run(&[
        "analyze",
        "--program",
        "access_control.prog",
        "--spec",
        "access_control.json",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.trim_start().starts_with('['));
    assert!(out.contains(r#""r_event": "i1=0""#));
    assert!(out.contains(r#""r_index": 1"#));
    assert!(out.contains(r#""r_event": "typ=2""#));
}

#[test]
fn analyze_table_lists_house_fire_variants() {
    let o = run(&[
        "analyze",
        "--program",
        "house_fire.prog",
        "--spec",
        "house_fire.json",
        "--format",
        "table",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 8);
    assert!(out.lines().next().unwrap().starts_with("observer"));
    assert!(out.contains("A=1 ▷ B=0 ▷ D=2 ▷ H=0 ▷ H=1/0"));
}

#[test]
fn abstract_difference_is_definite() {
    let o = run(&[
        "abstract",
        "--program",
        "diff.prog",
        "--spec",
        "diff.json",
        "--behavior",
        "bug",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("definite: b = input_2()"));
    let o = run(&[
        "abstract",
        "--program",
        "diff.prog",
        "--spec",
        "diff.json",
        "--behavior",
        "bug",
        "--no-oracle",
    ]);
    assert!(stdout(&o).contains("potential: {a = input_1(), b = input_2()}"));
}

#[test]
fn abstract_json_rows() {
    let o = run(&[
        "abstract",
        "--program",
        "diff.prog",
        "--spec",
        "diff.json",
        "--behavior",
        "bug",
        "--format",
        "json",
    ]);
    let out = stdout(&o);
    assert!(out.contains(r#""variant": "abstract""#));
    assert!(out.contains(r#""classification": "definite""#));
}

#[test]
fn semantics_of_empty_program() {
    let o = run(&["semantics", "--program", "empty.prog"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "T1: ε\n");
}

#[test]
fn empty_behaviour_warns() {
    let o = run(&["analyze", "--program", "empty.prog", "--spec", "empty.json"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "[]");
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn bad_inputs_exit_with_one() {
    let o = run(&[
        "analyze",
        "--program",
        "access_control.prog",
        "--spec",
        "diff.json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&[
        "analyze",
        "--program",
        "missing.prog",
        "--spec",
        "diff.json",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_passes_on_bundled_instance_and_corpus() {
    let o = run(&[
        "check",
        "--program",
        "negative_balance.prog",
        "--spec",
        "negative_balance.json",
        "--seed",
        "3",
        "--programs",
        "20",
    ]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert!(out.contains("instance: ok"));
    assert!(out.contains("abstract corpus: ok"));
}

#[test]
fn output_is_deterministic() {
    let args = [
        "analyze",
        "--program",
        "access_control.prog",
        "--spec",
        "access_control.json",
        "--format",
        "table",
    ];
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
}
