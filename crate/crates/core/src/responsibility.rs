//! The responsibility abstraction: in each analysed trace `HRF`, the single
//! event `R` whose occurrence makes the observation drop to within `B`:
//! `∅ ⊊ O(HR) ⊆ B ⊊ O(H)`.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::lattice::{BehaviorLattice, Members};
use crate::observation::{CognizanceSpec, ObservationEngine};
use crate::semantics::MaximalSemantics;
use crate::trace::{Event, Trace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponsibilityRecord {
    /// Index of `HRF` in `S^M`.
    pub trace_index: usize,
    pub history: Trace,
    pub responsible: Event,
    pub future: Trace,
    pub behavior: String,
    pub observer: String,
}

impl ResponsibilityRecord {
    /// Position of `R` in the trace, i.e. `|H|`.
    pub fn position(&self) -> usize {
        self.history.len()
    }

    pub fn trace(&self) -> Trace {
        let mut t = self.history.clone();
        t.push(self.responsible.clone());
        t.iter().chain(self.future.iter()).cloned().collect()
    }

    pub(crate) fn at(
        s: &MaximalSemantics,
        i: usize,
        pos: usize,
        behavior: &str,
        observer: &str,
    ) -> Self {
        let t = &s.traces[i];
        ResponsibilityRecord {
            trace_index: i,
            history: t.prefix(pos),
            responsible: t.events()[pos].clone(),
            future: t.suffix(pos + 1),
            behavior: behavior.to_string(),
            observer: observer.to_string(),
        }
    }
}

/// The condition on the prefix nodes `h` (`H`) and `hr` (`HR`).
pub fn responsible_step(e: &ObservationEngine, h: usize, hr: usize, b: &Members) -> bool {
    let (oh, ohr) = (e.observation_node(h), e.observation_node(hr));
    !ohr.is_clear() && ohr.is_subset(b) && b.is_subset(oh) && b != oh
}

/// Responsibility records for behaviour `b` over the traces selected by `t`
/// (a bitset over `S^M` indices), ordered by trace index.
pub fn analyze_with(
    e: &ObservationEngine,
    b: &Members,
    t: &FixedBitSet,
) -> Vec<ResponsibilityRecord> {
    let s = e.semantics();
    let name = e.lattice().name_of(b);
    let mut out = Vec::new();
    for i in t.ones() {
        let path = s.path(i);
        for k in 0..s.traces[i].len() {
            if responsible_step(e, path[k], path[k + 1], b) {
                out.push(ResponsibilityRecord::at(s, i, k, &name, &e.spec().observer));
            }
        }
    }
    out
}

pub fn analyze(
    s: &MaximalSemantics,
    l: &BehaviorLattice,
    spec: &CognizanceSpec,
    b: &Members,
    t: &FixedBitSet,
) -> Vec<ResponsibilityRecord> {
    analyze_with(&ObservationEngine::new(s, l, spec), b, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;
    use crate::program::{enumerate_semantics, parse, DEFAULT_STEP_BOUND};

    #[test]
    fn no_inputs_no_responsibility() {
        let s = enumerate_semantics(
            &parse("x = 1; if (x > 0) { y = 2; }").unwrap(),
            DEFAULT_STEP_BOUND,
        )
        .unwrap();
        let l = build_lattice(&s, vec![], true).unwrap();
        let r = analyze(
            &s,
            &l,
            &CognizanceSpec::omniscient(),
            &l.bottom(),
            &s.universe(),
        );
        assert!(r.is_empty());
    }

    #[test]
    fn single_choice_is_responsible() {
        let s = enumerate_semantics(
            &parse("x = input a in {0,1}; y = x;").unwrap(),
            DEFAULT_STEP_BOUND,
        )
        .unwrap();
        let mut b = FixedBitSet::with_capacity(2);
        b.insert(0);
        let l = build_lattice(&s, vec![("Z".into(), b.clone())], false).unwrap();
        let r = analyze(&s, &l, &CognizanceSpec::omniscient(), &b, &s.universe());
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].responsible.to_string(), "x=0");
        assert_eq!(r[0].position(), 0);
        assert_eq!(r[0].trace(), s.traces[0]);
    }
}
