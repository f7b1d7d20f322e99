//! Shared fixtures and a brute-force responsibility oracle.
//!
//! The oracle works on plain trace lists and evaluates every definition
//! directly: prediction membership by scanning all maximal traces, inquiry
//! as the meet of all lattice elements whose prediction holds, observation
//! as the join of inquiries over an explicitly filtered cognizance set. No
//! trie, no caching.

#![allow(dead_code)]

use std::collections::BTreeSet;

use responsibility::{
    enumerate_semantics, parse, Event, MaximalSemantics, Program, Trace, DEFAULT_STEP_BOUND,
};

pub fn program(name: &str) -> Program {
    let path = format!("{}/../../programs/{name}.prog", env!("CARGO_MANIFEST_DIR"));
    parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn spec_text(name: &str) -> String {
    std::fs::read_to_string(format!(
        "{}/../../programs/{name}.json",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap()
}

pub fn semantics(name: &str) -> MaximalSemantics {
    enumerate_semantics(&program(name), DEFAULT_STEP_BOUND).unwrap()
}

/// A trace from its event displays, e.g. `t(&s, "apv=1 ▷ i1=0")`.
pub fn t(s: &MaximalSemantics, displays: &str) -> Trace {
    let parts: Vec<&str> = if displays.is_empty() {
        vec![]
    } else {
        displays.split(" ▷ ").collect()
    };
    let id = s
        .find_by_displays(&parts)
        .unwrap_or_else(|| panic!("`{displays}` is not a valid prefix"));
    s.trace_of(id)
}

pub type Prop = BTreeSet<usize>;

pub struct BruteForce<'a> {
    pub traces: Vec<Vec<Event>>,
    /// Explicit lattice elements, including `∅` and `S^M`.
    pub lattice: Vec<Prop>,
    pub hidden: &'a dyn Fn(&Event) -> bool,
}

fn is_prefix(a: &[Event], b: &[Event]) -> bool {
    a.len() <= b.len() && a.iter().zip(b).all(|(x, y)| x == y)
}

impl<'a> BruteForce<'a> {
    pub fn new(
        s: &MaximalSemantics,
        lattice: Vec<Prop>,
        hidden: &'a dyn Fn(&Event) -> bool,
    ) -> Self {
        BruteForce {
            traces: s.traces.iter().map(|t| t.events().to_vec()).collect(),
            lattice,
            hidden,
        }
    }

    fn universe(&self) -> Prop {
        (0..self.traces.len()).collect()
    }

    fn extensions(&self, sigma: &[Event]) -> Prop {
        (0..self.traces.len())
            .filter(|&i| is_prefix(sigma, &self.traces[i]))
            .collect()
    }

    /// `σ ∈ α(P)`.
    pub fn predicts(&self, sigma: &[Event], p: &Prop) -> bool {
        let ext = self.extensions(sigma);
        !ext.is_empty() && ext.iter().all(|i| p.contains(i))
    }

    pub fn inquiry(&self, sigma: &[Event]) -> Prop {
        let mut acc = self.universe();
        for p in &self.lattice {
            if self.predicts(sigma, p) {
                acc = acc.intersection(p).copied().collect();
            }
        }
        if self.extensions(sigma).is_empty() {
            return Prop::new();
        }
        acc
    }

    fn join(&self, a: &Prop, b: &Prop) -> Prop {
        let u: Prop = a.union(b).copied().collect();
        let mut best = self.universe();
        for p in &self.lattice {
            if u.is_subset(p) && p.len() < best.len() {
                best = p.clone();
            }
        }
        best
    }

    fn visible(&self, sigma: &[Event]) -> Vec<Event> {
        sigma
            .iter()
            .filter(|e| !(self.hidden)(e))
            .cloned()
            .collect()
    }

    /// All valid prefixes indistinguishable from `σ`.
    pub fn cognizance(&self, sigma: &[Event]) -> Vec<Vec<Event>> {
        let mut all: BTreeSet<Vec<Event>> = BTreeSet::new();
        for t in &self.traces {
            for k in 0..=t.len() {
                all.insert(t[..k].to_vec());
            }
        }
        let v = self.visible(sigma);
        let ends_hidden = |x: &[Event]| x.last().is_some_and(|e| (self.hidden)(e));
        all.into_iter()
            .filter(|x| self.visible(x) == v && (ends_hidden(sigma) || !ends_hidden(x)))
            .collect()
    }

    pub fn observation(&self, sigma: &[Event]) -> Prop {
        self.cognizance(sigma)
            .iter()
            .fold(Prop::new(), |acc, x| self.join(&acc, &self.inquiry(x)))
    }

    /// `(trace, position)` pairs with `∅ ⊊ O(HR) ⊆ B ⊊ O(H)`.
    pub fn responsibility(&self, b: &Prop) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for (i, t) in self.traces.iter().enumerate() {
            for k in 0..t.len() {
                let oh = self.observation(&t[..k]);
                let ohr = self.observation(&t[..=k]);
                if !ohr.is_empty() && ohr.is_subset(b) && b.is_subset(&oh) && *b != oh {
                    out.insert((i, k));
                }
            }
        }
        out
    }
}

/// Every meet of the given properties with `∅` and `S^M` added.
pub fn moore_closure(n: usize, named: &[Prop]) -> Vec<Prop> {
    let mut out: Vec<Prop> = vec![Prop::new(), (0..n).collect()];
    for p in named {
        if !out.contains(p) {
            out.push(p.clone());
        }
    }
    loop {
        let mut added = false;
        for i in 0..out.len() {
            for j in 0..out.len() {
                let m: Prop = out[i].intersection(&out[j]).copied().collect();
                if !out.contains(&m) {
                    out.push(m);
                    added = true;
                }
            }
        }
        if !added {
            return out;
        }
    }
}

pub fn prop_of(m: &fixedbitset::FixedBitSet) -> Prop {
    m.ones().collect()
}
