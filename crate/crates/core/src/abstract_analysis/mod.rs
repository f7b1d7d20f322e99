//! Sound abstract responsibility: interval/(dis)equality invariants, a
//! Floyd-Hoare automaton split by the two behaviour specs, backward
//! observation marks and per-path verdicts.
//!
//! Only the omniscient observer is supported. Behaviour specs constrain the
//! exit point; the traces of interest may be constrained anywhere.

mod automaton;
mod cfg;
mod domain;
mod invariance;
mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use automaton::{
    abstract_observation, abstract_responsibility, build_automaton, elementary_paths, summarize,
    ActionRef, AutEdge, AutNode, FloydHoareAutomaton, Mark, PathVerdict, Verdict,
};
pub use cfg::{Action, Cfg, CfgEdge};
pub use domain::{AbsValue, Atom, Itv, INF};
pub use invariance::{forward_analysis, post, pre, strengthen, Invariants, Strengthened};
pub use oracle::{satisfies, Oracle, Reach};

use crate::program::{BExpr, Program, DEFAULT_STEP_BOUND};
use crate::semantics::Run;
use crate::trace::Point;
use crate::Error;

/// Per-point constraint strings as written in a spec file. Keys are `exit`,
/// `ℓN` or `N`; each value is a conjunction of boolean expressions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractSpecText {
    #[serde(rename = "P_b")]
    pub pb: BTreeMap<String, Vec<String>>,
    #[serde(rename = "P_not_b")]
    pub pnb: BTreeMap<String, Vec<String>>,
    #[serde(rename = "T", default)]
    pub t: BTreeMap<String, Vec<String>>,
}

/// User specification in the abstract domain, with the concrete
/// constraints kept for the oracle and for checking.
#[derive(Clone, Debug, Default)]
pub struct UserSpec {
    pub t: BTreeMap<Point, AbsValue>,
    pub pb: BTreeMap<Point, AbsValue>,
    pub pnb: BTreeMap<Point, AbsValue>,
    pub t_constraints: BTreeMap<Point, Vec<BExpr>>,
    pub pb_exit: Vec<BExpr>,
    pub pnb_exit: Vec<BExpr>,
}

fn point_key(p: &Program, k: &str) -> Result<Point, Error> {
    if k == "exit" {
        return Ok(p.exit);
    }
    let n = k.trim_start_matches('ℓ').trim_start_matches('l');
    match n.parse::<u32>() {
        Ok(n) if n >= 1 && n <= p.exit.0 => Ok(Point(n)),
        _ => Err(Error::Spec(format!("`{k}` is not a program point"))),
    }
}

fn abstract_of(cs: &[BExpr]) -> AbsValue {
    cs.iter().fold(AbsValue::top(), |v, c| {
        v.meet(&AbsValue::join_all(AbsValue::top().assume(c)))
    })
}

impl UserSpec {
    pub fn from_text(p: &Program, text: &AbstractSpecText) -> Result<UserSpec, Error> {
        let mut u = UserSpec::default();
        for (k, cs) in &text.t {
            let pt = point_key(p, k)?;
            let cs = oracle::parse_constraints(cs)?;
            u.t.insert(pt, abstract_of(&cs));
            u.t_constraints.insert(pt, cs);
        }
        for (side, exit, src, name) in [
            (&mut u.pb, &mut u.pb_exit, &text.pb, "P_b"),
            (&mut u.pnb, &mut u.pnb_exit, &text.pnb, "P_not_b"),
        ] {
            for (k, cs) in src {
                let pt = point_key(p, k)?;
                let cs = oracle::parse_constraints(cs)?;
                if pt != p.exit {
                    if cs.iter().all(|c| *c == BExpr::Const(true)) {
                        continue;
                    }
                    return Err(Error::Spec(format!(
                        "{name} may only constrain the exit point, found `{k}`"
                    )));
                }
                side.insert(pt, abstract_of(&cs));
                *exit = cs;
            }
        }
        Ok(u)
    }

    /// Whether a concrete run lies in `T`.
    pub fn in_t(&self, run: &Run) -> bool {
        run.states.iter().all(|(pt, env)| {
            self.t_constraints
                .get(pt)
                .map_or(true, |cs| satisfies(cs, env))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AbstractOptions {
    pub unroll_k: usize,
    /// Use the exact eventuality oracle; without it marks degrade to `⊤`.
    pub oracle: bool,
    pub step_bound: usize,
}

impl Default for AbstractOptions {
    fn default() -> Self {
        AbstractOptions {
            unroll_k: 3,
            oracle: true,
            step_bound: DEFAULT_STEP_BOUND,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AbstractResult {
    pub automaton: FloydHoareAutomaton,
    pub invariants: Invariants,
    pub target: Mark,
    pub paths: Vec<PathVerdict>,
}

impl AbstractResult {
    pub fn definite(&self) -> BTreeSet<String> {
        summarize(&self.paths).0
    }

    pub fn potential(&self) -> BTreeSet<String> {
        summarize(&self.paths).1
    }

    /// Action displays along a path.
    pub fn path_actions(&self, path: &PathVerdict) -> Vec<String> {
        path.edges
            .iter()
            .map(|&e| self.automaton.edges[e].action.to_string())
            .collect()
    }
}

/// Runs the whole abstract pipeline for behaviour `target` (`Pb` or `PnotB`).
pub fn analyze_abstract(
    p: &Program,
    user: &UserSpec,
    target: Mark,
    opts: AbstractOptions,
) -> Result<AbstractResult, Error> {
    if p.has_division() {
        return Err(Error::Spec(
            "the abstract analysis does not support division".into(),
        ));
    }
    if !matches!(target, Mark::Pb | Mark::PnotB) {
        return Err(Error::Spec(format!(
            "cannot analyse responsibility for {target}"
        )));
    }
    let g = Cfg::new(p);
    let inv = invariance::forward_on(p, &g, opts.unroll_k);
    let st = invariance::strengthen_on(&g, &inv, user)?;
    let mut aut = build_automaton(p, &g, &st);
    let oracle = if opts.oracle {
        Oracle::for_program(p, &user.pb_exit, &user.pnb_exit, opts.step_bound)
    } else {
        None
    };
    abstract_observation(&mut aut, oracle.as_ref());
    let paths = abstract_responsibility(&aut, target, oracle.as_ref());
    Ok(AbstractResult {
        automaton: aut,
        invariants: inv,
        target,
        paths,
    })
}
