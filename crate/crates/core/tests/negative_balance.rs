mod common;

use std::collections::BTreeSet;

use common::{semantics, BruteForce};
use responsibility::{analyze, build_lattice, CognizanceSpec, MaximalSemantics, Predicate};

fn value(display: &str) -> i64 {
    display.split_once('=').unwrap().1.parse().unwrap()
}

/// The rule table: a non-positive balance is to blame by itself; a positive
/// one is overdrawn by a larger request.
fn rule_table(s: &MaximalSemantics) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for (i, t) in s.traces.iter().enumerate() {
        let (b, n) = (
            value(&t.events()[0].to_string()),
            value(&t.events()[1].to_string()),
        );
        if b <= 0 {
            out.insert((i, 0));
        } else if n > b {
            out.insert((i, 1));
        }
    }
    out
}

#[test]
fn records_match_rule_table_and_oracle() {
    let s = semantics("negative_balance");
    assert_eq!(s.len(), 12);
    let nb = Predicate::Final {
        expr: "balance < 0".into(),
    }
    .eval(&s)
    .unwrap();
    let l = build_lattice(&s, vec![("NB".into(), nb.clone())], false).unwrap();
    let got: BTreeSet<(usize, usize)> =
        analyze(&s, &l, &CognizanceSpec::omniscient(), &nb, &s.universe())
            .iter()
            .map(|r| (r.trace_index, r.position()))
            .collect();
    let table = rule_table(&s);
    assert_eq!(table.len(), 9);
    assert_eq!(got, table);

    let lattice = common::moore_closure(s.len(), &[common::prop_of(&nb)]);
    let never = |_: &responsibility::Event| false;
    assert_eq!(
        BruteForce::new(&s, lattice, &never).responsibility(&common::prop_of(&nb)),
        table
    );
}

#[test]
fn records_name_the_input_events() {
    let s = semantics("negative_balance");
    let nb = Predicate::Final {
        expr: "balance < 0".into(),
    }
    .eval(&s)
    .unwrap();
    let l = build_lattice(&s, vec![("NB".into(), nb.clone())], false).unwrap();
    let rs = analyze(&s, &l, &CognizanceSpec::omniscient(), &nb, &s.universe());
    let shown: Vec<String> = rs.iter().map(|r| r.responsible.to_string()).collect();
    assert_eq!(
        shown,
        [
            "balance=-1",
            "balance=-1",
            "balance=-1",
            "balance=0",
            "balance=0",
            "balance=0",
            "n=2",
            "n=3",
            "n=3"
        ]
    );
}

#[test]
fn nothing_is_blamed_for_a_non_negative_balance_from_a_non_positive_one() {
    let s = semantics("negative_balance");
    let ok = Predicate::Final {
        expr: "balance >= 0".into(),
    }
    .eval(&s)
    .unwrap();
    let l = build_lattice(&s, vec![("ok".into(), ok.clone())], false).unwrap();
    for r in analyze(&s, &l, &CognizanceSpec::omniscient(), &ok, &s.universe()) {
        // Only the request can keep a positive balance non-negative.
        assert_eq!(r.position(), 1, "{}", s.traces[r.trace_index]);
        assert!(value(&s.traces[r.trace_index].events()[0].to_string()) > 0);
    }
}
