//! Exact eventuality oracle from enumerated executions.

use std::collections::BTreeMap;

use super::automaton::FloydHoareAutomaton;
use super::domain::AbsValue;
use crate::program::{eval_bool, BExpr, Env, Program};
use crate::semantics::MaximalSemantics;
use crate::trace::Point;
use crate::Error;

/// Which outcomes are reachable from a concrete state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Reach {
    pub pb: bool,
    pub pnb: bool,
}

/// Whether every constraint holds in `env`; constraints over undefined
/// variables hold vacuously, as in the abstract domain.
pub fn satisfies(cs: &[BExpr], env: &Env) -> bool {
    cs.iter().all(|c| eval_bool(c, env).unwrap_or(true))
}

pub struct Oracle {
    s: MaximalSemantics,
    /// Per trace: final state satisfies `P_b`, `P_¬b`.
    outcome: Vec<Reach>,
    by_state: BTreeMap<Point, BTreeMap<Env, Reach>>,
}

impl Oracle {
    pub fn new(s: MaximalSemantics, pb: &[BExpr], pnb: &[BExpr]) -> Oracle {
        let outcome: Vec<Reach> = s
            .runs
            .iter()
            .map(|r| {
                let ok = |cs: &[BExpr]| !r.faulted && satisfies(cs, &r.final_env);
                Reach {
                    pb: ok(pb),
                    pnb: ok(pnb),
                }
            })
            .collect();
        let mut by_state: BTreeMap<Point, BTreeMap<Env, Reach>> = BTreeMap::new();
        for (r, o) in s.runs.iter().zip(&outcome) {
            for (pt, env) in &r.states {
                let e = by_state
                    .entry(*pt)
                    .or_default()
                    .entry(env.clone())
                    .or_default();
                e.pb |= o.pb;
                e.pnb |= o.pnb;
            }
        }
        Oracle {
            s,
            outcome,
            by_state,
        }
    }

    /// Enumerates the program and builds the oracle; `None` when enumeration
    /// fails, which callers treat as an ineffective oracle.
    pub fn for_program(
        p: &Program,
        pb: &[BExpr],
        pnb: &[BExpr],
        step_bound: usize,
    ) -> Option<Oracle> {
        crate::program::enumerate_semantics(p, step_bound)
            .ok()
            .map(|s| Oracle::new(s, pb, pnb))
    }

    pub fn semantics(&self) -> &MaximalSemantics {
        &self.s
    }

    pub fn outcome(&self, trace: usize) -> Reach {
        self.outcome[trace]
    }

    /// Reachability summaries of the concrete states at `p` within `inv`.
    pub fn states<'a>(&'a self, p: Point, inv: &'a AbsValue) -> impl Iterator<Item = Reach> + 'a {
        self.by_state
            .get(&p)
            .into_iter()
            .flatten()
            .filter(move |(env, _)| inv.contains(env))
            .map(|(_, r)| *r)
    }

    /// Whether trace `i` follows the node sequence `nodes`.
    pub fn concretizes(&self, aut: &FloydHoareAutomaton, nodes: &[usize], i: usize) -> bool {
        let r = &self.s.runs[i];
        !r.faulted
            && r.states.len() == nodes.len()
            && r.states.iter().zip(nodes).all(|((pt, env), &n)| {
                let node = &aut.nodes[n];
                node.point == *pt && node.invariant.contains(env)
            })
    }

    pub fn realizes(&self, aut: &FloydHoareAutomaton, nodes: &[usize]) -> bool {
        (0..self.s.len()).any(|i| self.concretizes(aut, nodes, i))
    }
}

/// Parses constraint strings into boolean expressions.
pub fn parse_constraints(cs: &[String]) -> Result<Vec<BExpr>, Error> {
    cs.iter().map(|c| crate::program::parse_bexpr(c)).collect()
}
