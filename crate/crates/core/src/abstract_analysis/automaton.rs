//! Floyd-Hoare automata: construction, observation marks and verdicts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::cfg::{Action, Cfg};
use super::domain::AbsValue;
use super::invariance::{post, Strengthened};
use super::oracle::Oracle;
use crate::program::Program;
use crate::trace::Point;

/// Abstract observation of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Mark {
    Bot,
    /// Every execution from here ends in `P_b`.
    Pb,
    /// Every execution from here ends in `P_¬b`.
    PnotB,
    /// Some state here can still reach both.
    Both,
    Top,
}

impl Mark {
    pub fn other(self) -> Mark {
        match self {
            Mark::Pb => Mark::PnotB,
            Mark::PnotB => Mark::Pb,
            m => m,
        }
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mark::Bot => "⊥",
            Mark::Pb => "P_b",
            Mark::PnotB => "P_¬b",
            Mark::Both => "P_b/P_¬b",
            Mark::Top => "⊤",
        })
    }
}

#[derive(Clone, Debug)]
pub struct AutNode {
    pub point: Point,
    /// `ℓ3`, or `ℓ3^a`, `ℓ3^b`, … when the point is split.
    pub name: String,
    pub invariant: AbsValue,
    /// Pre-assigned mark of exit nodes.
    pub terminal: Option<Mark>,
    pub mark: Mark,
}

#[derive(Clone, Debug)]
pub struct AutEdge {
    pub from: usize,
    pub to: usize,
    pub action: Action,
}

#[derive(Clone, Debug)]
pub struct FloydHoareAutomaton {
    pub nodes: Vec<AutNode>,
    pub edges: Vec<AutEdge>,
    pub entry: Vec<usize>,
    /// Per-point `T` restriction.
    pub t: BTreeMap<Point, AbsValue>,
}

fn suffix(i: usize) -> String {
    let mut s = String::new();
    let mut i = i;
    loop {
        s.insert(0, (b'a' + (i % 26) as u8) as char);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    s
}

impl FloydHoareAutomaton {
    pub fn nodes_at(&self, p: Point) -> impl Iterator<Item = (usize, &AutNode)> {
        self.nodes
            .iter()
            .enumerate()
            .filter(move |(_, n)| n.point == p)
    }

    pub fn successors(&self, n: usize) -> impl Iterator<Item = (usize, &AutEdge)> {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.from == n)
    }

    pub fn marks(&self) -> Vec<Mark> {
        self.nodes.iter().map(|n| n.mark).collect()
    }

    pub fn node_named(&self, name: &str) -> Option<&AutNode> {
        self.nodes.iter().find(|n| n.name == name)
    }
}

/// Splits each point into the distinct disjuncts of its strengthened `P_b`
/// and `P_¬b` specs, and connects nodes whose invariants are compatible
/// through the action between their points.
pub fn build_automaton(p: &Program, g: &Cfg, st: &Strengthened) -> FloydHoareAutomaton {
    let mut nodes = Vec::new();
    for pt in g.points() {
        let mut here: Vec<(AbsValue, bool, bool)> = Vec::new();
        for (vals, is_b) in [(&st.pb, true), (&st.pnb, false)] {
            for v in vals.get(&pt).map(Vec::as_slice).unwrap_or(&[]) {
                match here.iter_mut().find(|(w, _, _)| w == v) {
                    Some(x) => {
                        if is_b {
                            x.1 = true
                        } else {
                            x.2 = true
                        }
                    }
                    None => here.push((v.clone(), is_b, !is_b)),
                }
            }
        }
        let split = here.len() > 1;
        for (i, (v, in_b, in_nb)) in here.into_iter().enumerate() {
            let name = if split {
                format!("{pt}^{}", suffix(i))
            } else {
                pt.to_string()
            };
            let terminal = (pt == g.exit).then_some(match (in_b, in_nb) {
                (true, false) => Mark::Pb,
                (false, true) => Mark::PnotB,
                _ => Mark::Top,
            });
            nodes.push(AutNode {
                point: pt,
                name,
                invariant: v,
                terminal,
                mark: terminal.unwrap_or(Mark::Top),
            });
        }
    }
    let mut edges = Vec::new();
    for e in &g.edges {
        for (i, n) in nodes.iter().enumerate().filter(|(_, n)| n.point == e.from) {
            let out = post(&n.invariant, &e.action, p);
            for (j, m) in nodes.iter().enumerate().filter(|(_, m)| m.point == e.to) {
                if out.iter().any(|d| !d.meet(&m.invariant).is_bot()) {
                    edges.push(AutEdge {
                        from: i,
                        to: j,
                        action: e.action.clone(),
                    });
                }
            }
        }
    }
    let entry = nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.point == g.entry)
        .map(|(i, _)| i)
        .collect();
    FloydHoareAutomaton {
        nodes,
        edges,
        entry,
        t: st.t.clone(),
    }
}

fn mark_of(aut: &FloydHoareAutomaton, n: usize, marks: &[Mark], oracle: Option<&Oracle>) -> Mark {
    let node = &aut.nodes[n];
    if oracle.is_some_and(|o| o.states(node.point, &node.invariant).next().is_none()) {
        // No execution passes through this node.
        return Mark::Bot;
    }
    if let Some(t) = node.terminal {
        return t;
    }
    let succ: Vec<(Mark, bool)> = aut
        .successors(n)
        .filter(|(_, e)| marks[e.to] != Mark::Bot)
        .map(|(_, e)| (marks[e.to], e.action.is_choice()))
        .collect();
    if succ.is_empty() {
        return Mark::Top;
    }
    let has_choice = succ.iter().any(|s| s.1);
    for target in [Mark::Pb, Mark::PnotB] {
        if succ.iter().all(|s| s.0 == target) {
            let confirmed = match oracle {
                Some(o) => o.states(node.point, &node.invariant).next().is_some(),
                None => !has_choice,
            };
            return if confirmed { target } else { Mark::Top };
        }
    }
    if succ
        .iter()
        .all(|s| matches!(s.0, Mark::Pb | Mark::PnotB | Mark::Both))
    {
        if let Some(o) = oracle {
            let mut any = false;
            let all = o.states(node.point, &node.invariant).all(|b| {
                any = true;
                b.pb && b.pnb
            });
            if any && all {
                return Mark::Both;
            }
        }
    }
    Mark::Top
}

/// Backward marking to a fixpoint. With an oracle, nodes no execution
/// reaches are marked `⊥` and ignored. Without one a node is marked
/// `P_b`/`P_¬b` only when no input choice separates it from its successors,
/// and never `P_b/P_¬b`.
pub fn abstract_observation(aut: &mut FloydHoareAutomaton, oracle: Option<&Oracle>) {
    let mut marks: Vec<Mark> = aut
        .nodes
        .iter()
        .map(|n| n.terminal.unwrap_or(Mark::Top))
        .collect();
    let mut order: Vec<usize> = (0..aut.nodes.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(aut.nodes[i].point));
    for _ in 0..=aut.nodes.len() {
        let mut changed = false;
        for &i in &order {
            let m = mark_of(aut, i, &marks, oracle);
            if m != marks[i] {
                marks[i] = m;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for (n, m) in aut.nodes.iter_mut().zip(marks) {
        n.mark = m;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ActionRef {
    /// Index of the edge on its path.
    pub step: usize,
    pub point: Point,
    pub display: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Definite(ActionRef),
    Potential(Vec<ActionRef>),
    None,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathVerdict {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
    pub verdict: Verdict,
}

/// Upper bound on elementary paths explored.
pub const MAX_PATHS: usize = 100_000;

/// Elementary paths from an entry node to an exit node marked `target`,
/// restricted to nodes compatible with `T`.
pub fn elementary_paths(aut: &FloydHoareAutomaton, target: Mark) -> Vec<(Vec<usize>, Vec<usize>)> {
    fn go(
        aut: &FloydHoareAutomaton,
        target: Mark,
        n: usize,
        nodes: &mut Vec<usize>,
        edges: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, Vec<usize>)>,
    ) {
        if out.len() >= MAX_PATHS {
            return;
        }
        if aut.nodes[n].terminal == Some(target) {
            out.push((nodes.clone(), edges.clone()));
            return;
        }
        for (ei, e) in aut.successors(n) {
            if nodes.contains(&e.to) || !in_t(aut, e.to) || aut.nodes[e.to].mark == Mark::Bot {
                continue;
            }
            nodes.push(e.to);
            edges.push(ei);
            go(aut, target, e.to, nodes, edges, out);
            nodes.pop();
            edges.pop();
        }
    }
    let mut out = Vec::new();
    for &s in &aut.entry {
        if in_t(aut, s) && aut.nodes[s].mark != Mark::Bot {
            go(aut, target, s, &mut vec![s], &mut Vec::new(), &mut out);
        }
    }
    out
}

fn in_t(aut: &FloydHoareAutomaton, n: usize) -> bool {
    let node = &aut.nodes[n];
    aut.t
        .get(&node.point)
        .map_or(true, |t| !t.meet(&node.invariant).is_bot())
}

/// Definite and potential responsibility for `target` on every elementary
/// path. A `P_b/P_¬b → target` step is definite only if the oracle finds a
/// concrete run along the path; otherwise it is treated like `⊤ → target`.
pub fn abstract_responsibility(
    aut: &FloydHoareAutomaton,
    target: Mark,
    oracle: Option<&Oracle>,
) -> Vec<PathVerdict> {
    let action = |step: usize, ei: usize| {
        let e = &aut.edges[ei];
        ActionRef {
            step,
            point: aut.nodes[e.from].point,
            display: e.action.to_string(),
        }
    };
    let potential = |edges: &[usize], k: usize| {
        let mut v: Vec<ActionRef> = (0..k)
            .filter(|&i| aut.edges[edges[i]].action.is_choice())
            .map(|i| action(i, edges[i]))
            .collect();
        v.push(action(k, edges[k]));
        v.reverse();
        Verdict::Potential(v)
    };
    elementary_paths(aut, target)
        .into_iter()
        .map(|(nodes, edges)| {
            let mark = |i: usize| aut.nodes[nodes[i]].mark;
            let both = (0..edges.len()).find(|&i| mark(i) == Mark::Both && mark(i + 1) == target);
            let verdict = match both {
                Some(k) if oracle.is_some_and(|o| o.realizes(aut, &nodes)) => {
                    Verdict::Definite(action(k, edges[k]))
                }
                Some(k) => potential(&edges, k),
                None => match (0..edges.len())
                    .find(|&i| mark(i) == Mark::Top && mark(i + 1) == target)
                {
                    Some(k) => potential(&edges, k),
                    None => Verdict::None,
                },
            };
            PathVerdict {
                nodes,
                edges,
                verdict,
            }
        })
        .collect()
}

/// Display strings of all definite and all potential actions.
pub fn summarize(paths: &[PathVerdict]) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut definite = BTreeSet::new();
    let mut potential = BTreeSet::new();
    for p in paths {
        match &p.verdict {
            Verdict::Definite(a) => {
                definite.insert(a.display.clone());
            }
            Verdict::Potential(v) => potential.extend(v.iter().map(|a| a.display.clone())),
            Verdict::None => {}
        }
    }
    (definite, potential)
}
