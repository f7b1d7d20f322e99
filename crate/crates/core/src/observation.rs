//! Inquiry, cognizance and observation.
//!
//! An observer is described by the input sources it cannot see. An event is
//! hidden from it when it is an input from a hidden source, happens under a
//! test that is hidden, or reads a tainted variable (one assigned by some
//! hidden event anywhere in the program). The observer cannot tell `σ′` from
//! `σ` when both have the same visible subsequence and, if `σ` ends with a
//! visible event, `σ′` does too.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::lattice::{BehaviorLattice, Members};
use crate::program::{Program, Stmt, StmtKind};
use crate::semantics::{MaximalSemantics, NodeId};
use crate::trace::{Event, Point, Trace, TraceSet};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CognizanceSpec {
    #[serde(rename = "name")]
    pub observer: String,
    #[serde(rename = "hidden_inputs", default)]
    pub hidden_sources: BTreeSet<String>,
}

impl CognizanceSpec {
    pub fn omniscient() -> Self {
        CognizanceSpec {
            observer: "omniscient".into(),
            hidden_sources: BTreeSet::new(),
        }
    }

    pub fn hiding<I: IntoIterator<Item = S>, S: Into<String>>(observer: &str, sources: I) -> Self {
        CognizanceSpec {
            observer: observer.into(),
            hidden_sources: sources.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_omniscient(&self) -> bool {
        self.hidden_sources.is_empty()
    }

    pub fn validate(&self, p: &Program) -> Result<(), Error> {
        match self.hidden_sources.iter().find(|s| p.source(s).is_none()) {
            Some(s) => Err(Error::UnknownName(s.clone())),
            None => Ok(()),
        }
    }
}

/// Points whose events are hidden from an observer that cannot see
/// `hidden` sources. Flow-insensitive taint, iterated to a fixpoint.
pub fn hidden_points(p: &Program, hidden: &BTreeSet<String>) -> BTreeSet<Point> {
    fn walk(
        stmts: &[Stmt],
        under_hidden: bool,
        hidden: &BTreeSet<String>,
        tainted: &mut BTreeSet<String>,
        points: &mut BTreeSet<Point>,
    ) -> bool {
        let mut changed = false;
        let reads_tainted =
            |reads: BTreeSet<String>, t: &BTreeSet<String>| reads.iter().any(|v| t.contains(v));
        for s in stmts {
            let mut reads = BTreeSet::new();
            let h = under_hidden
                || match &s.kind {
                    StmtKind::Input { source, .. } => hidden.contains(source),
                    StmtKind::Assign { expr, .. } => {
                        expr.reads(&mut reads);
                        reads_tainted(reads, tainted)
                    }
                    StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => {
                        cond.reads(&mut reads);
                        reads_tainted(reads, tainted)
                    }
                };
            if h {
                changed |= points.insert(s.point);
                if let StmtKind::Assign { var, .. } | StmtKind::Input { var, .. } = &s.kind {
                    changed |= tainted.insert(var.clone());
                }
            }
            match &s.kind {
                StmtKind::If {
                    then_branch,
                    else_branch,
                    ..
                } => {
                    changed |= walk(then_branch, h, hidden, tainted, points);
                    changed |= walk(else_branch, h, hidden, tainted, points);
                }
                StmtKind::While { body, .. } => changed |= walk(body, h, hidden, tainted, points),
                _ => {}
            }
        }
        changed
    }
    let mut tainted = BTreeSet::new();
    let mut points = BTreeSet::new();
    if hidden.is_empty() {
        return points;
    }
    while walk(&p.body, false, hidden, &mut tainted, &mut points) {}
    points
}

/// Precomputed inquiry and observation for every valid prefix.
pub struct ObservationEngine<'a> {
    s: &'a MaximalSemantics,
    l: &'a BehaviorLattice,
    spec: CognizanceSpec,
    hidden: BTreeSet<Point>,
    /// Interned visible subsequence of each node.
    vis: Vec<usize>,
    ends_hidden: Vec<bool>,
    groups: Vec<Vec<NodeId>>,
    inquiry: Vec<Members>,
    observation: Vec<Members>,
}

impl<'a> ObservationEngine<'a> {
    pub fn new(s: &'a MaximalSemantics, l: &'a BehaviorLattice, spec: &CognizanceSpec) -> Self {
        let hidden = hidden_points(&s.program, &spec.hidden_sources);
        let n = s.num_nodes();
        let mut vis = vec![0usize; n];
        let mut ends_hidden = vec![false; n];
        let mut intern: HashMap<(usize, &Event), usize> = HashMap::new();
        let mut next = 1;
        for id in s.node_ids() {
            let (Some(parent), Some(e)) = (s.parent(id), s.event(id)) else {
                continue;
            };
            if hidden.contains(&e.point) {
                vis[id] = vis[parent];
                ends_hidden[id] = true;
            } else {
                vis[id] = *intern.entry((vis[parent], e)).or_insert_with(|| {
                    next += 1;
                    next - 1
                });
            }
        }
        let mut groups = vec![Vec::new(); next];
        for id in s.node_ids() {
            groups[vis[id]].push(id);
        }
        let inquiry: Vec<Members> = s
            .node_ids()
            .map(|id| l.least_containing(s.ext(id)))
            .collect();
        let observation = if hidden.is_empty() {
            inquiry.clone()
        } else {
            // Union of `ext` over a group, and over its visible-ending part.
            let mut all = vec![l.bottom(); next];
            let mut vis_end = vec![l.bottom(); next];
            for id in s.node_ids() {
                all[vis[id]].union_with(s.ext(id));
                if !ends_hidden[id] {
                    vis_end[vis[id]].union_with(s.ext(id));
                }
            }
            s.node_ids()
                .map(|id| {
                    let u = if ends_hidden[id] {
                        &all[vis[id]]
                    } else {
                        &vis_end[vis[id]]
                    };
                    l.least_containing(u)
                })
                .collect()
        };
        ObservationEngine {
            s,
            l,
            spec: spec.clone(),
            hidden,
            vis,
            ends_hidden,
            groups,
            inquiry,
            observation,
        }
    }

    pub fn semantics(&self) -> &'a MaximalSemantics {
        self.s
    }

    pub fn lattice(&self) -> &'a BehaviorLattice {
        self.l
    }

    pub fn spec(&self) -> &CognizanceSpec {
        &self.spec
    }

    pub fn hidden_points(&self) -> &BTreeSet<Point> {
        &self.hidden
    }

    pub fn inquiry_node(&self, id: NodeId) -> &Members {
        &self.inquiry[id]
    }

    pub fn observation_node(&self, id: NodeId) -> &Members {
        &self.observation[id]
    }

    /// Nodes indistinguishable from `id`; always contains `id`.
    pub fn cognizance_nodes(&self, id: NodeId) -> Vec<NodeId> {
        if self.hidden.is_empty() {
            return vec![id];
        }
        self.groups[self.vis[id]]
            .iter()
            .copied()
            .filter(|&m| self.ends_hidden[id] || !self.ends_hidden[m])
            .collect()
    }

    fn node_of(&self, t: &Trace) -> Result<NodeId, Error> {
        self.s
            .lookup(t)
            .ok_or_else(|| Error::InvalidTrace(t.to_string()))
    }

    pub fn cognizance(&self, t: &Trace) -> Result<TraceSet, Error> {
        let id = self.node_of(t)?;
        Ok(self
            .cognizance_nodes(id)
            .into_iter()
            .map(|m| self.s.trace_of(m))
            .collect())
    }

    pub fn observation(&self, t: &Trace) -> Result<Members, Error> {
        Ok(self.observation[self.node_of(t)?].clone())
    }

    /// `I(σ)`, or `⊥` for an invalid trace.
    pub fn inquiry(&self, t: &Trace) -> Members {
        match self.s.lookup(t) {
            Some(id) => self.inquiry[id].clone(),
            None => self.l.bottom(),
        }
    }

    /// Checks, on every valid prefix and every split `σ = σ₁σ₂`, that the
    /// cognizance of `σ` is exactly the set of valid concatenations `ττ′`
    /// with `τ` indistinguishable from `σ₁` and `τ′` indistinguishable from
    /// `σ₂` as a fragment. Returns one message per violation (at most
    /// `limit`); prefix sets larger than `max_nodes` are skipped.
    pub fn check_concatenation(&self, max_nodes: usize, limit: usize) -> Vec<String> {
        let mut out = Vec::new();
        if self.hidden.is_empty() || self.s.num_nodes() > max_nodes {
            return out;
        }
        let hid = |e: &Event| self.hidden.contains(&e.point);
        let fragment_match = |a: &[Event], b: &[Event]| {
            let va: Vec<&Event> = a.iter().filter(|e| !hid(e)).collect();
            let vb: Vec<&Event> = b.iter().filter(|e| !hid(e)).collect();
            let a_hidden_end = a.last().is_some_and(&hid);
            let b_hidden_end = b.last().is_some_and(&hid);
            va == vb && (a_hidden_end || !b_hidden_end)
        };
        for id in self.s.node_ids() {
            let sigma = self.s.trace_of(id);
            let members: BTreeSet<NodeId> = self.cognizance_nodes(id).into_iter().collect();
            for k in 0..=sigma.len() {
                let (s1, s2) = (&sigma.events()[..k], &sigma.events()[k..]);
                let left = self.cognizance_nodes(self.s.path_prefix(id, k));
                let mut concat = BTreeSet::new();
                for &t in &left {
                    // Every valid extension of τ whose added part matches σ₂.
                    let base = self.s.node(t).depth;
                    let mut stack = vec![t];
                    while let Some(u) = stack.pop() {
                        let tail = self.s.trace_of(u);
                        if fragment_match(s2, &tail.events()[base..]) {
                            concat.insert(u);
                        }
                        stack.extend_from_slice(self.s.children(u));
                    }
                }
                if concat != members {
                    out.push(format!(
                        "cognizance of `{sigma}` is not the concatenation at split {k} (`{}` | `{}`)",
                        Trace::from(s1.to_vec()),
                        Trace::from(s2.to_vec())
                    ));
                    if out.len() >= limit {
                        return out;
                    }
                }
            }
        }
        out
    }
}

/// `I(σ)`: the least lattice element whose prediction contains `σ`; `⊥` if
/// `σ` is invalid.
pub fn inquiry(s: &MaximalSemantics, l: &BehaviorLattice, t: &Trace) -> Members {
    match s.lookup(t) {
        Some(id) => l.least_containing(s.ext(id)),
        None => l.bottom(),
    }
}

pub fn cognizance(
    spec: &CognizanceSpec,
    s: &MaximalSemantics,
    l: &BehaviorLattice,
    t: &Trace,
) -> Result<TraceSet, Error> {
    ObservationEngine::new(s, l, spec).cognizance(t)
}

pub fn observation(
    s: &MaximalSemantics,
    l: &BehaviorLattice,
    spec: &CognizanceSpec,
    t: &Trace,
) -> Result<Members, Error> {
    ObservationEngine::new(s, l, spec).observation(t)
}
