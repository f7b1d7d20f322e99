use std::collections::BTreeSet;

use responsibility::abstract_analysis::{
    abstract_observation, analyze_abstract, forward_analysis, AbstractOptions, AbstractSpecText,
    Itv, Mark, UserSpec, Verdict,
};
use responsibility::{enumerate_semantics, parse, Point, DEFAULT_STEP_BOUND};

fn program(name: &str) -> responsibility::Program {
    let path = format!("{}/../../programs/{name}.prog", env!("CARGO_MANIFEST_DIR"));
    parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn bug_spec(p: &responsibility::Program) -> UserSpec {
    let text = AbstractSpecText {
        pb: [("exit".to_string(), vec!["c == 0".to_string()])].into(),
        pnb: [("exit".to_string(), vec!["c != 0".to_string()])].into(),
        t: Default::default(),
    };
    UserSpec::from_text(p, &text).unwrap()
}

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn inv_of(r: &responsibility::abstract_analysis::AbstractResult, name: &str) -> String {
    r.automaton
        .node_named(name)
        .unwrap_or_else(|| panic!("no node {name}"))
        .invariant
        .to_string()
}

#[test]
fn difference_automaton_and_definite_verdict() {
    let p = program("diff");
    let r = analyze_abstract(&p, &bug_spec(&p), Mark::Pb, AbstractOptions::default()).unwrap();
    let names: Vec<&str> = r.automaton.nodes.iter().map(|n| n.name.as_str()).collect();
    assert_eq!(names, ["ℓ1", "ℓ2", "ℓ3^a", "ℓ3^b", "ℓ4^a", "ℓ4^b"]);
    assert_eq!(inv_of(&r, "ℓ1"), "true");
    assert_eq!(inv_of(&r, "ℓ2"), "a∈[-1,1]");
    assert_eq!(inv_of(&r, "ℓ3^a"), "a∈[-1,1], b∈[-1,1], a=b");
    assert_eq!(inv_of(&r, "ℓ3^b"), "a∈[-1,1], b∈[-1,1], a≠b");
    assert_eq!(inv_of(&r, "ℓ4^a"), "a∈[-1,1], b∈[-1,1], c=0");
    assert_eq!(inv_of(&r, "ℓ4^b"), "a∈[-1,1], b∈[-1,1], c∈[-2,2], c≠0");
    assert_eq!(
        r.invariants[&p.exit].to_string(),
        "a∈[-1,1], b∈[-1,1], c∈[-2,2]"
    );
    let marks: Vec<Mark> = r.automaton.marks();
    assert_eq!(
        marks,
        [
            Mark::Both,
            Mark::Both,
            Mark::Pb,
            Mark::PnotB,
            Mark::Pb,
            Mark::PnotB
        ]
    );
    assert_eq!(r.definite(), set(&["b = input_2()"]));
    assert!(r.potential().is_empty());
    assert_eq!(r.paths.len(), 1);
    assert!(matches!(&r.paths[0].verdict, Verdict::Definite(a) if a.step == 1));
}

#[test]
fn difference_without_oracle_is_potential() {
    let p = program("diff");
    let opts = AbstractOptions {
        oracle: false,
        ..Default::default()
    };
    let r = analyze_abstract(&p, &bug_spec(&p), Mark::Pb, opts).unwrap();
    assert_eq!(r.automaton.node_named("ℓ1").unwrap().mark, Mark::Top);
    assert_eq!(r.automaton.node_named("ℓ2").unwrap().mark, Mark::Top);
    assert!(r.definite().is_empty());
    assert_eq!(r.potential(), set(&["a = input_1()", "b = input_2()"]));
}

#[test]
fn product_keeps_dead_path_and_earlier_input() {
    let p = program("product");
    let opts = AbstractOptions {
        oracle: false,
        ..Default::default()
    };
    let r = analyze_abstract(&p, &bug_spec(&p), Mark::Pb, opts).unwrap();
    let mark = |n: &str| r.automaton.node_named(n).unwrap().mark;
    assert_eq!(inv_of(&r, "ℓ2^a"), "a=0");
    assert_eq!(inv_of(&r, "ℓ2^b"), "a∈[-1,1], a≠0");
    assert_eq!(inv_of(&r, "ℓ3^a"), "a=0, b∈[-1,1]");
    assert_eq!(inv_of(&r, "ℓ3^b"), "a∈[-1,1], b=0, a≠0");
    assert_eq!(inv_of(&r, "ℓ3^c"), "a∈[-1,1], b∈[-1,1], a≠0, b≠0");
    assert_eq!(mark("ℓ1"), Mark::Top);
    assert_eq!(mark("ℓ2^a"), Mark::Top);
    assert_eq!(mark("ℓ2^b"), Mark::Top);
    assert_eq!(mark("ℓ3^a"), Mark::Pb);
    assert_eq!(mark("ℓ3^b"), Mark::Pb);
    assert_eq!(mark("ℓ3^c"), Mark::PnotB);
    assert_eq!(r.paths.len(), 2);
    for path in &r.paths {
        let Verdict::Potential(v) = &path.verdict else {
            panic!("expected potential")
        };
        let shown: BTreeSet<String> = v.iter().map(|a| a.display.clone()).collect();
        assert_eq!(shown, set(&["a = input_1()", "b = input_2()"]));
    }
    assert!(r.definite().is_empty());
}

#[test]
fn marking_is_idempotent() {
    let p = program("diff");
    let mut r = analyze_abstract(
        &p,
        &bug_spec(&p),
        Mark::Pb,
        AbstractOptions {
            oracle: false,
            ..Default::default()
        },
    )
    .unwrap();
    let before = r.automaton.marks();
    abstract_observation(&mut r.automaton, None);
    assert_eq!(before, r.automaton.marks());
}

#[test]
fn trivial_specs_give_plain_cfg() {
    let p = parse("x = 1; y = x;").unwrap();
    let text = AbstractSpecText {
        pb: [("exit".to_string(), vec!["y == 1".to_string()])].into(),
        pnb: [("exit".to_string(), vec!["y != 0".to_string()])].into(),
        t: Default::default(),
    };
    let r = analyze_abstract(
        &p,
        &UserSpec::from_text(&p, &text).unwrap(),
        Mark::Pb,
        AbstractOptions::default(),
    );
    let r = r.unwrap();
    assert_eq!(r.automaton.nodes.len(), 3);
    assert!(r.definite().is_empty() && r.potential().is_empty());
}

#[test]
fn product_with_oracle_drops_dead_node() {
    let p = program("product");
    let r = analyze_abstract(&p, &bug_spec(&p), Mark::Pb, AbstractOptions::default()).unwrap();
    let mark = |n: &str| r.automaton.node_named(n).unwrap().mark;
    // b ranges over {-1,1}, so no execution reaches b=0.
    assert_eq!(mark("ℓ3^b"), Mark::Bot);
    assert_eq!(mark("ℓ2^b"), Mark::PnotB);
    assert_eq!(mark("ℓ1"), Mark::Both);
    assert_eq!(r.definite(), set(&["a = input_1()"]));
    assert!(r.potential().is_empty());
}

#[test]
fn access_control_approval_interval() {
    let p = program("access_control");
    let inv = forward_analysis(&p, 3);
    assert_eq!(inv[&Point(8)].interval("apv"), Itv::new(0, 1));
    assert_eq!(inv[&Point(10)].interval("acs"), Itv::new(0, 2));
}

#[test]
fn negative_balance_guard_is_refined_backwards() {
    let p = program("negative_balance");
    let text = AbstractSpecText {
        pb: [("exit".to_string(), vec!["balance < 0".to_string()])].into(),
        pnb: [("exit".to_string(), vec!["balance >= 0".to_string()])].into(),
        t: Default::default(),
    };
    let r = analyze_abstract(
        &p,
        &UserSpec::from_text(&p, &text).unwrap(),
        Mark::Pb,
        AbstractOptions::default(),
    )
    .unwrap();
    assert_eq!(inv_of(&r, "ℓ3^a"), "balance∈[-1,2], n∈[1,3], balance<n");
    assert_eq!(r.definite(), set(&["n = user()"]));
    assert_eq!(
        r.potential(),
        set(&["balance = query_database()", "n = user()"])
    );
}

#[test]
fn forward_invariants_contain_every_reached_state() {
    for name in [
        "access_control",
        "negative_balance",
        "diff",
        "product",
        "leakage",
    ] {
        let p = program(name);
        let inv = forward_analysis(&p, 3);
        let s = enumerate_semantics(&p, DEFAULT_STEP_BOUND).unwrap();
        for run in &s.runs {
            for (pt, env) in &run.states {
                assert!(
                    inv[pt].contains(env),
                    "{name}: {env:?} ∉ {} at {pt}",
                    inv[pt]
                );
            }
        }
    }
}
