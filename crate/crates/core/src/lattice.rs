//! Lattices of maximal trace properties and the prediction abstraction.
//!
//! Properties are extensional: a bitset over the indices of `S^M`.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::program::{eval_bool, parse_bexpr};
use crate::semantics::MaximalSemantics;
use crate::trace::{Event, EventKind, TraceSet};
use crate::Error;

/// Upper bound on the number of elements produced by meet-closure.
pub const MAX_CLOSURE: usize = 4096;
/// Largest `|S^M|` accepted in powerset mode.
pub const MAX_POWERSET_TRACES: usize = 16;

pub type Members = FixedBitSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaximalProperty {
    pub name: String,
    pub members: Members,
}

#[derive(Clone, Debug)]
enum Mode {
    /// Explicit elements, closed under intersection.
    Closure(Vec<MaximalProperty>),
    /// Every subset of `S^M` is an element.
    Powerset,
}

/// A finite lattice of properties ordered by inclusion, with `⊤ = S^M` and
/// `⊥ = ∅`. In closure mode the element set is a Moore family, so the join of
/// two elements is the least element containing their union (which need not
/// be the union itself).
#[derive(Clone, Debug)]
pub struct BehaviorLattice {
    n: usize,
    mode: Mode,
    names: BTreeMap<String, Members>,
    synthetic: Vec<Members>,
    pub warnings: Vec<String>,
}

fn full(n: usize) -> Members {
    let mut s = FixedBitSet::with_capacity(n);
    s.insert_range(..);
    s
}

fn incomparable(a: &Members, b: &Members) -> bool {
    !a.is_subset(b) && !b.is_subset(a)
}

/// Builds the lattice generated by `named` over `S^M`: the named sets, `⊤`
/// and `⊥`, closed under intersection. New intersections are added as
/// synthetic elements named `meet(A,B)`. With `powerset` set, the lattice is
/// `℘(S^M)` instead.
pub fn build_lattice(
    s: &MaximalSemantics,
    named: Vec<(String, Members)>,
    powerset: bool,
) -> Result<BehaviorLattice, Error> {
    let n = s.len();
    if n == 0 {
        return Err(Error::EmptySemantics);
    }
    let top = full(n);
    let bot = FixedBitSet::with_capacity(n);
    let mut warnings = Vec::new();
    let mut names = BTreeMap::new();
    for (name, m) in &named {
        if m.len() != n {
            return Err(Error::Spec(format!(
                "property `{name}` is not over this semantics"
            )));
        }
        if *m == top {
            warnings.push(format!(
                "behavior `{name}` holds in every maximal trace; the lattice is trivial for it and analyzing it is futile"
            ));
        }
        if names.insert(name.clone(), m.clone()).is_some() {
            return Err(Error::Spec(format!("duplicate behavior name `{name}`")));
        }
    }
    names.entry("⊤".to_string()).or_insert_with(|| top.clone());
    names.entry("⊥".to_string()).or_insert_with(|| bot.clone());

    if powerset {
        if n > MAX_POWERSET_TRACES {
            return Err(Error::NotALattice(format!(
                "powerset mode needs at most {MAX_POWERSET_TRACES} maximal traces, found {n}"
            )));
        }
        return Ok(BehaviorLattice {
            n,
            mode: Mode::Powerset,
            names,
            synthetic: Vec::new(),
            warnings,
        });
    }

    let mut elems: Vec<MaximalProperty> = vec![
        MaximalProperty {
            name: "⊥".into(),
            members: bot,
        },
        MaximalProperty {
            name: "⊤".into(),
            members: top,
        },
    ];
    for (name, m) in named {
        if !elems.iter().any(|e| e.members == m) {
            elems.push(MaximalProperty { name, members: m });
        }
    }
    let mut synthetic = Vec::new();
    let mut done = 0;
    // Close under pairwise intersection; each round only pairs a new element
    // with all earlier ones.
    while done < elems.len() {
        let j = done;
        for i in 0..j {
            let mut m = elems[i].members.clone();
            m.intersect_with(&elems[j].members);
            if !elems.iter().any(|e| e.members == m) {
                if elems.len() >= MAX_CLOSURE {
                    return Err(Error::NotALattice(format!(
                        "meet-closure exceeds {MAX_CLOSURE} elements"
                    )));
                }
                let name = format!("meet({},{})", elems[i].name, elems[j].name);
                synthetic.push(m.clone());
                elems.push(MaximalProperty { name, members: m });
            }
        }
        done += 1;
    }
    Ok(BehaviorLattice {
        n,
        mode: Mode::Closure(elems),
        names,
        synthetic,
        warnings,
    })
}

impl BehaviorLattice {
    /// Number of maximal traces the properties range over.
    pub fn universe_len(&self) -> usize {
        self.n
    }

    pub fn is_powerset(&self) -> bool {
        matches!(self.mode, Mode::Powerset)
    }

    pub fn top(&self) -> Members {
        full(self.n)
    }

    pub fn bottom(&self) -> Members {
        FixedBitSet::with_capacity(self.n)
    }

    /// Explicit elements (closure mode only).
    pub fn elements(&self) -> Option<&[MaximalProperty]> {
        match &self.mode {
            Mode::Closure(e) => Some(e),
            Mode::Powerset => None,
        }
    }

    /// Number of lattice elements.
    pub fn size(&self) -> usize {
        match &self.mode {
            Mode::Closure(e) => e.len(),
            Mode::Powerset => 1usize << self.n,
        }
    }

    pub fn get(&self, name: &str) -> Option<&Members> {
        self.names.get(name)
    }

    pub fn named(&self) -> impl Iterator<Item = (&String, &Members)> {
        self.names.iter()
    }

    pub fn contains(&self, x: &Members) -> bool {
        match &self.mode {
            Mode::Closure(e) => e.iter().any(|p| p.members == *x),
            Mode::Powerset => x.len() == self.n,
        }
    }

    pub fn is_synthetic(&self, x: &Members) -> bool {
        self.synthetic.contains(x)
    }

    /// Display name: a declared name when one matches, otherwise the
    /// closure name or the set of 1-based trace indices.
    pub fn name_of(&self, x: &Members) -> String {
        if *x == self.top() {
            return "⊤".into();
        }
        if x.is_clear() {
            return "⊥".into();
        }
        if let Some((n, _)) = self.names.iter().find(|(_, m)| *m == x) {
            return n.clone();
        }
        if let Mode::Closure(e) = &self.mode {
            if let Some(p) = e.iter().find(|p| p.members == *x) {
                return p.name.clone();
            }
        }
        let idx: Vec<String> = x.ones().map(|i| format!("T{}", i + 1)).collect();
        format!("{{{}}}", idx.join(","))
    }

    /// The least element containing `x`.
    pub fn least_containing(&self, x: &Members) -> Members {
        match &self.mode {
            Mode::Powerset => x.clone(),
            Mode::Closure(e) => {
                let mut acc = self.top();
                for p in e {
                    if x.is_subset(&p.members) {
                        acc.intersect_with(&p.members);
                    }
                }
                acc
            }
        }
    }

    pub fn leq(&self, a: &Members, b: &Members) -> bool {
        a.is_subset(b)
    }

    pub fn join(&self, a: &Members, b: &Members) -> Members {
        let mut u = a.clone();
        u.union_with(b);
        self.least_containing(&u)
    }

    pub fn meet(&self, a: &Members, b: &Members) -> Members {
        let mut m = a.clone();
        m.intersect_with(b);
        m
    }

    /// Some element `B′ ⊇ lower` that is ⊆-incomparable with `b`.
    pub fn incomparable_above(&self, lower: &Members, b: &Members) -> Option<Members> {
        match &self.mode {
            Mode::Closure(e) => e
                .iter()
                .find(|p| lower.is_subset(&p.members) && incomparable(&p.members, b))
                .map(|p| p.members.clone()),
            Mode::Powerset => {
                if b.is_subset(lower) {
                    return None;
                }
                if !lower.is_subset(b) {
                    return Some(lower.clone());
                }
                // lower ⊆ b ⊊ lower ∪ ..: add one trace outside b.
                let mut outside = self.top();
                outside.difference_with(b);
                let x = outside.ones().next()?;
                let mut w = lower.clone();
                w.insert(x);
                Some(w)
            }
        }
    }

    pub fn exists_incomparable_above(&self, lower: &Members, b: &Members) -> bool {
        self.incomparable_above(lower, b).is_some()
    }
}

/// Prefixes that guarantee a maximal property: a bitset over trie nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredictionProperty {
    pub source: String,
    pub nodes: FixedBitSet,
}

impl PredictionProperty {
    pub fn to_trace_set(&self, s: &MaximalSemantics) -> TraceSet {
        self.nodes.ones().map(|n| s.trace_of(n)).collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_clear()
    }
}

/// `α(P) = {σ ∈ prefixes(P) | ∀σ′ ∈ S^M. σ ⪯ σ′ ⇒ σ′ ∈ P}`.
pub fn prediction_abstraction(s: &MaximalSemantics, p: &MaximalProperty) -> PredictionProperty {
    let mut nodes = FixedBitSet::with_capacity(s.num_nodes());
    for id in s.node_ids() {
        let ext = s.ext(id);
        if !ext.is_clear() && ext.is_subset(&p.members) {
            nodes.insert(id);
        }
    }
    PredictionProperty {
        source: p.name.clone(),
        nodes,
    }
}

/// `γ(Q) = Q ∩ S^M`.
pub fn prediction_concretization(s: &MaximalSemantics, q: &PredictionProperty) -> MaximalProperty {
    let mut members = FixedBitSet::with_capacity(s.len());
    for id in q.nodes.ones() {
        if let Some(i) = s.node(id).maximal {
            members.insert(i);
        }
    }
    MaximalProperty {
        name: format!("γ({})", q.source),
        members,
    }
}

fn low_input_values(e: &[Event], low: &[String]) -> Vec<i64> {
    e.iter()
        .filter_map(|e| match &e.kind {
            EventKind::Input { source, value, .. } if low.contains(source) => Some(*value),
            _ => None,
        })
        .collect()
}

/// Leaky traces: those paired with another maximal trace that agrees on the
/// low input values but differs on some final low output.
pub fn property_leaky(
    s: &MaximalSemantics,
    low_inputs: &[String],
    low_outputs: &[String],
) -> Result<Members, Error> {
    for src in low_inputs {
        if s.program.source(src).is_none() {
            return Err(Error::UnknownName(src.clone()));
        }
    }
    let vars = s.program.variables();
    for v in low_outputs {
        if !vars.contains(v) {
            return Err(Error::UnknownName(v.clone()));
        }
    }
    let key: Vec<(Vec<i64>, Vec<Option<i64>>)> = s
        .traces
        .iter()
        .zip(&s.runs)
        .map(|(t, r)| {
            (
                low_input_values(t.events(), low_inputs),
                low_outputs
                    .iter()
                    .map(|v| r.final_env.get(v).copied())
                    .collect(),
            )
        })
        .collect();
    let mut out = FixedBitSet::with_capacity(s.len());
    for i in 0..key.len() {
        if key.iter().any(|k| k.0 == key[i].0 && k.1 != key[i].1) {
            out.insert(i);
        }
    }
    Ok(out)
}

/// Membership predicates over maximal traces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predicate {
    All,
    /// Boolean expression over the final environment.
    Final {
        expr: String,
    },
    /// The last event has this display, e.g. `¬(acs>=1)` or `H=1/0`.
    LastEvent {
        event: String,
    },
    ContainsEvent {
        event: String,
    },
    /// The trace starts with these event displays.
    HasPrefix {
        events: Vec<String>,
    },
    /// The execution ended in a division by zero.
    Faulted,
    Leaky {
        low_inputs: Vec<String>,
        low_outputs: Vec<String>,
    },
    NonLeaky {
        low_inputs: Vec<String>,
        low_outputs: Vec<String>,
    },
    Not {
        of: Box<Predicate>,
    },
    And {
        of: Vec<Predicate>,
    },
    Or {
        of: Vec<Predicate>,
    },
}

impl Predicate {
    pub fn eval(&self, s: &MaximalSemantics) -> Result<Members, Error> {
        let n = s.len();
        let by = |f: &dyn Fn(usize) -> bool| {
            let mut m = FixedBitSet::with_capacity(n);
            for i in 0..n {
                m.set(i, f(i));
            }
            m
        };
        Ok(match self {
            Predicate::All => full(n),
            Predicate::Final { expr } => {
                let b = parse_bexpr(expr)?;
                let mut m = FixedBitSet::with_capacity(n);
                for (i, r) in s.runs.iter().enumerate() {
                    let v = eval_bool(&b, &r.final_env).map_err(|e| {
                        Error::Spec(format!(
                            "cannot evaluate `{expr}` on trace T{}: {e:?}",
                            i + 1
                        ))
                    })?;
                    m.set(i, v);
                }
                m
            }
            Predicate::LastEvent { event } => {
                by(&|i| s.traces[i].last().is_some_and(|e| e.to_string() == *event))
            }
            Predicate::ContainsEvent { event } => {
                by(&|i| s.traces[i].iter().any(|e| e.to_string() == *event))
            }
            Predicate::HasPrefix { events } => by(&|i| {
                let d = s.traces[i].displays();
                d.len() >= events.len() && d.iter().zip(events).all(|(a, b)| a == b)
            }),
            Predicate::Faulted => by(&|i| s.runs[i].faulted),
            Predicate::Leaky {
                low_inputs,
                low_outputs,
            } => property_leaky(s, low_inputs, low_outputs)?,
            Predicate::NonLeaky {
                low_inputs,
                low_outputs,
            } => {
                let mut m = property_leaky(s, low_inputs, low_outputs)?;
                m.toggle_range(..);
                m
            }
            Predicate::Not { of } => {
                let mut m = of.eval(s)?;
                m.toggle_range(..);
                m
            }
            Predicate::And { of } => {
                let mut m = full(n);
                for p in of {
                    m.intersect_with(&p.eval(s)?);
                }
                m
            }
            Predicate::Or { of } => {
                let mut m = FixedBitSet::with_capacity(n);
                for p in of {
                    m.union_with(&p.eval(s)?);
                }
                m
            }
        })
    }
}
