//! Forward invariance analysis and backward strengthening of user specs.

use std::collections::{BTreeMap, BTreeSet};

use super::cfg::{Action, Cfg};
use super::domain::{AbsValue, MAX_DISJUNCTS};
use super::UserSpec;
use crate::program::{BExpr, Program};
use crate::trace::Point;
use crate::Error;

pub type Invariants = BTreeMap<Point, AbsValue>;

/// Strongest post-condition of one action, as disjuncts.
pub fn post(v: &AbsValue, a: &Action, p: &Program) -> Vec<AbsValue> {
    let out = match a {
        Action::Assign { var, expr } => vec![v.assign(var, expr)],
        Action::Input { var, source } => {
            let dom = p.source(source).map(|s| s.domain.as_slice()).unwrap_or(&[]);
            vec![v.input(var, dom)]
        }
        Action::Assume { cond, holds: true } => v.assume(cond),
        Action::Assume { cond, holds: false } => v.assume(&BExpr::Not(Box::new(cond.clone()))),
    };
    out.into_iter().filter(|x| !x.is_bot()).collect()
}

/// Pre-condition of one action with respect to `d`, as disjuncts.
pub fn pre(d: &AbsValue, a: &Action) -> Vec<AbsValue> {
    match a {
        Action::Assign { var, expr } => d.pre_assign(var, expr),
        Action::Input { var, .. } => {
            let mut v = d.clone();
            v.forget(var);
            vec![v]
        }
        Action::Assume { cond, holds: true } => d.assume(cond),
        Action::Assume { cond, holds: false } => d.assume(&BExpr::Not(Box::new(cond.clone()))),
    }
}

/// Over-approximates the states reaching each point. Loop heads are joined
/// for `unroll_k` visits and widened afterwards.
pub fn forward_analysis(p: &Program, unroll_k: usize) -> Invariants {
    forward_on(p, &Cfg::new(p), unroll_k)
}

pub(crate) fn forward_on(p: &Program, g: &Cfg, unroll_k: usize) -> Invariants {
    let mut inv: Invariants = g
        .points()
        .into_iter()
        .map(|pt| (pt, AbsValue::bottom()))
        .collect();
    inv.insert(g.entry, AbsValue::top());
    let mut visits: BTreeMap<Point, usize> = BTreeMap::new();
    let mut work: BTreeSet<Point> = [g.entry].into();
    while let Some(pt) = work.pop_first() {
        let here = inv[&pt].clone();
        for (_, e) in g.out_edges(pt) {
            let out = AbsValue::join_all(post(&here, &e.action, p));
            let old = &inv[&e.to];
            let joined = old.join(&out);
            let next = if g.loop_heads.contains(&e.to) {
                let n = visits.entry(e.to).or_default();
                *n += 1;
                if *n > unroll_k {
                    old.widen(&joined)
                } else {
                    joined
                }
            } else {
                joined
            };
            if next != *old && !next.leq(old) {
                inv.insert(e.to, next);
                work.insert(e.to);
            }
        }
    }
    inv
}

/// User specifications met with the invariants. For loop-free programs the
/// two behaviour specs are refined backwards from the exit into per-point
/// disjunctions; with loops only the pointwise meet is taken.
#[derive(Clone, Debug)]
pub struct Strengthened {
    pub invariants: Invariants,
    pub t: BTreeMap<Point, AbsValue>,
    pub pb: BTreeMap<Point, Vec<AbsValue>>,
    pub pnb: BTreeMap<Point, Vec<AbsValue>>,
}

pub fn strengthen(p: &Program, inv: &Invariants, user: &UserSpec) -> Result<Strengthened, Error> {
    strengthen_on(&Cfg::new(p), inv, user)
}

fn normalize(mut vs: Vec<AbsValue>) -> Vec<AbsValue> {
    vs.retain(|v| !v.is_bot());
    let mut seen = BTreeSet::new();
    vs.retain(|v| seen.insert(v.clone()));
    if vs.len() > MAX_DISJUNCTS {
        vs = vec![AbsValue::join_all(vs)];
    }
    vs
}

pub(crate) fn strengthen_on(
    g: &Cfg,
    inv: &Invariants,
    user: &UserSpec,
) -> Result<Strengthened, Error> {
    let at = |m: &BTreeMap<Point, AbsValue>, pt: Point| m.get(&pt).cloned().unwrap_or_default();
    let t = inv
        .iter()
        .map(|(&pt, v)| (pt, v.meet(&at(&user.t, pt))))
        .collect();
    let side = |spec: &BTreeMap<Point, AbsValue>| -> BTreeMap<Point, Vec<AbsValue>> {
        let base = |pt: Point| inv[&pt].meet(&at(spec, pt));
        let mut out: BTreeMap<Point, Vec<AbsValue>> = BTreeMap::new();
        if !g.is_acyclic() {
            for &pt in inv.keys() {
                out.insert(pt, normalize(vec![base(pt)]));
            }
            return out;
        }
        // Points are numbered so that every edge goes forward.
        for &pt in inv.keys().rev() {
            let b = base(pt);
            let ds = if pt == g.exit {
                vec![b]
            } else {
                let mut ds = Vec::new();
                for (_, e) in g.out_edges(pt) {
                    for d in out.get(&e.to).map(Vec::as_slice).unwrap_or(&[]) {
                        ds.extend(pre(d, &e.action).into_iter().map(|v| v.meet(&b)));
                    }
                }
                ds
            };
            out.insert(pt, normalize(ds));
        }
        out
    };
    let pb = side(&user.pb);
    let pnb = side(&user.pnb);
    for (name, m) in [("P_b", &pb), ("P_not_b", &pnb)] {
        if m.get(&g.exit).map_or(true, Vec::is_empty) {
            return Err(Error::EmptySpec(format!(
                "{name} is unsatisfiable at the exit"
            )));
        }
    }
    Ok(Strengthened {
        invariants: inv.clone(),
        t,
        pb,
        pnb,
    })
}
