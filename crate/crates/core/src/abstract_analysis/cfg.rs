//! Control-flow graph over program points, with one labelled action per edge.

use std::collections::BTreeSet;
use std::fmt;

use crate::program::{BExpr, Expr, Program, Stmt, StmtKind};
use crate::trace::Point;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Assign {
        var: String,
        expr: Expr,
    },
    Input {
        var: String,
        source: String,
    },
    /// Outcome of the test at the edge's source point.
    Assume {
        cond: BExpr,
        holds: bool,
    },
}

impl Action {
    pub fn is_choice(&self) -> bool {
        matches!(self, Action::Input { .. })
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Assign { var, expr } => write!(f, "{var} = {expr}"),
            Action::Input { var, source } => write!(f, "{var} = {source}()"),
            Action::Assume { cond, holds: true } => write!(f, "{cond}"),
            Action::Assume { cond, holds: false } => write!(f, "¬({cond})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfgEdge {
    pub from: Point,
    pub to: Point,
    pub action: Action,
}

#[derive(Clone, Debug)]
pub struct Cfg {
    pub entry: Point,
    pub exit: Point,
    pub edges: Vec<CfgEdge>,
    pub loop_heads: BTreeSet<Point>,
}

impl Cfg {
    pub fn new(p: &Program) -> Cfg {
        let mut edges = Vec::new();
        let mut heads = BTreeSet::new();
        let entry = block(&p.body, p.exit, &mut edges, &mut heads);
        edges.sort_by_key(|e| (e.from, e.to));
        Cfg {
            entry,
            exit: p.exit,
            edges,
            loop_heads: heads,
        }
    }

    pub fn out_edges(&self, p: Point) -> impl Iterator<Item = (usize, &CfgEdge)> {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.from == p)
    }

    /// All points, ascending; the exit is last.
    pub fn points(&self) -> Vec<Point> {
        let mut ps: BTreeSet<Point> = self.edges.iter().flat_map(|e| [e.from, e.to]).collect();
        ps.insert(self.entry);
        ps.insert(self.exit);
        ps.into_iter().collect()
    }

    pub fn is_acyclic(&self) -> bool {
        self.loop_heads.is_empty()
    }
}

/// Adds the edges of `stmts` continuing at `next`; returns the block entry.
fn block(
    stmts: &[Stmt],
    next: Point,
    edges: &mut Vec<CfgEdge>,
    heads: &mut BTreeSet<Point>,
) -> Point {
    let mut succ = next;
    for s in stmts.iter().rev() {
        let from = s.point;
        match &s.kind {
            StmtKind::Assign { var, expr } => edges.push(CfgEdge {
                from,
                to: succ,
                action: Action::Assign {
                    var: var.clone(),
                    expr: expr.clone(),
                },
            }),
            StmtKind::Input { var, source } => edges.push(CfgEdge {
                from,
                to: succ,
                action: Action::Input {
                    var: var.clone(),
                    source: source.clone(),
                },
            }),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let t = block(then_branch, succ, edges, heads);
                let e = block(else_branch, succ, edges, heads);
                edges.push(CfgEdge {
                    from,
                    to: t,
                    action: Action::Assume {
                        cond: cond.clone(),
                        holds: true,
                    },
                });
                edges.push(CfgEdge {
                    from,
                    to: e,
                    action: Action::Assume {
                        cond: cond.clone(),
                        holds: false,
                    },
                });
            }
            StmtKind::While { cond, body } => {
                heads.insert(from);
                let b = block(body, from, edges, heads);
                edges.push(CfgEdge {
                    from,
                    to: b,
                    action: Action::Assume {
                        cond: cond.clone(),
                        holds: true,
                    },
                });
                edges.push(CfgEdge {
                    from,
                    to: succ,
                    action: Action::Assume {
                        cond: cond.clone(),
                        holds: false,
                    },
                });
            }
        }
        succ = from;
    }
    succ
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse;

    #[test]
    fn if_and_loop_edges() {
        let p = parse("x = 0; if (x == 0) { x = 1; } while (x < 3) { x = x + 1; }").unwrap();
        let g = Cfg::new(&p);
        let shown: Vec<String> = g
            .edges
            .iter()
            .map(|e| format!("{}-{}:{}", e.from.0, e.to.0, e.action))
            .collect();
        assert_eq!(
            shown,
            [
                "1-2:x = 0",
                "2-3:x==0",
                "2-4:¬(x==0)",
                "3-4:x = 1",
                "4-5:x<3",
                "4-6:¬(x<3)",
                "5-4:x = x+1"
            ]
        );
        assert_eq!(g.entry, Point(1));
        assert!(g.loop_heads.contains(&Point(4)));
    }
}
