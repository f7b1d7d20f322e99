mod common;

use common::{program, spec_text};
use responsibility::report::to_json;
use responsibility::spec::{run_abstract, run_pipeline, AnalysisSpec};

const BUNDLED: [&str; 7] = [
    "access_control",
    "negative_balance",
    "house_fire",
    "leakage",
    "diff",
    "product",
    "empty",
];

#[test]
fn bundled_specs_validate_and_run() {
    for name in BUNDLED {
        let p = program(name);
        let spec =
            AnalysisSpec::from_json(&spec_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        spec.validate(&p).unwrap_or_else(|e| panic!("{name}: {e}"));
        run_pipeline(&p, &spec, None).unwrap_or_else(|e| panic!("{name}: {e}"));
        for b in spec.abstract_specs.keys() {
            for negated in [false, true] {
                run_abstract(&p, &spec, b, negated, true)
                    .unwrap_or_else(|e| panic!("{name}/{b}: {e}"));
            }
        }
    }
    let p = program("house_fire");
    let spec = AnalysisSpec::from_json(&spec_text("house_fire_refined")).unwrap();
    assert_eq!(run_pipeline(&p, &spec, None).unwrap().rows.len(), 3);
}

#[test]
fn reports_are_deterministic() {
    for name in BUNDLED {
        let p = program(name);
        let spec = AnalysisSpec::from_json(&spec_text(name)).unwrap();
        let a = to_json(&run_pipeline(&p, &spec, None).unwrap().rows);
        let b = to_json(&run_pipeline(&p, &spec, None).unwrap().rows);
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn universal_behaviour_warns_and_blames_nothing() {
    let p = program("empty");
    let r = run_pipeline(
        &p,
        &AnalysisSpec::from_json(&spec_text("empty")).unwrap(),
        None,
    )
    .unwrap();
    assert!(r.rows.is_empty());
    assert!(!r.warnings.is_empty());
}

#[test]
fn leakage_blames_the_public_choice() {
    let p = program("leakage");
    let r = run_pipeline(
        &p,
        &AnalysisSpec::from_json(&spec_text("leakage")).unwrap(),
        None,
    )
    .unwrap();
    let rows: Vec<(&str, &str)> = r
        .rows
        .iter()
        .map(|x| (x.observer.as_str(), x.r_event.as_str()))
        .collect();
    assert_eq!(
        rows,
        [
            ("omniscient", "l=1"),
            ("omniscient", "l=1"),
            ("attacker", "l=1"),
            ("attacker", "l=1")
        ]
    );
}

#[test]
fn variant_override_applies_to_every_request() {
    let p = program("house_fire");
    let spec = AnalysisSpec::from_json(&spec_text("house_fire")).unwrap();
    let r = run_pipeline(&p, &spec, Some("SC".parse().unwrap())).unwrap();
    assert!(r.rows.iter().all(|x| x.variant == "SC"));
    assert!(r.rows.iter().all(|x| x.r_event == "B=0"));
}

#[test]
fn bad_specs_are_rejected() {
    let p = program("access_control");
    for text in [
        "{",
        r#"{"behaviors": [], "requests": []}"#,
        r#"{"behaviors": [{"name": "X", "predicate": {"kind": "all"}}], "requests": [{"behavior": "Y"}]}"#,
        r#"{"behaviors": [{"name": "X", "predicate": {"kind": "all"}}], "requests": [{"behavior": "X", "variant": "Q"}]}"#,
        r#"{"behaviors": [{"name": "X", "predicate": {"kind": "all"}}], "requests": [{"behavior": "X", "observer": "eve"}]}"#,
    ] {
        let bad = AnalysisSpec::from_json(text).and_then(|s| s.validate(&p));
        assert!(bad.is_err(), "{text}");
    }
}
