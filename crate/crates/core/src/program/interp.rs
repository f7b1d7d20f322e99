//! Exhaustive interpreter producing the maximal trace semantics.

use super::{BExpr, BinOp, Env, Expr, Program, Stmt, StmtKind};
use crate::semantics::{MaximalSemantics, Run};
use crate::trace::{Event, EventKind, Trace};
use crate::Error;

/// Default per-execution event bound.
pub const DEFAULT_STEP_BOUND: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    DivZero,
    Undefined(String),
    Overflow,
}

pub fn eval_int(e: &Expr, env: &Env) -> Result<i64, EvalError> {
    Ok(match e {
        Expr::Int(n) => *n,
        Expr::Var(v) => *env.get(v).ok_or_else(|| EvalError::Undefined(v.clone()))?,
        Expr::Neg(a) => eval_int(a, env)?.checked_neg().ok_or(EvalError::Overflow)?,
        Expr::Bin(op, a, b) => {
            let (x, y) = (eval_int(a, env)?, eval_int(b, env)?);
            match op {
                BinOp::Add => x.checked_add(y),
                BinOp::Sub => x.checked_sub(y),
                BinOp::Mul => x.checked_mul(y),
                BinOp::Div if y == 0 => return Err(EvalError::DivZero),
                BinOp::Div => x.checked_div(y),
            }
            .ok_or(EvalError::Overflow)?
        }
        Expr::Cond(c, a, b) => {
            if eval_bool(c, env)? {
                eval_int(a, env)?
            } else {
                eval_int(b, env)?
            }
        }
    })
}

/// Short-circuiting boolean evaluation.
pub fn eval_bool(b: &BExpr, env: &Env) -> Result<bool, EvalError> {
    Ok(match b {
        BExpr::Const(v) => *v,
        BExpr::Cmp(op, x, y) => op.holds(eval_int(x, env)?, eval_int(y, env)?),
        BExpr::Not(x) => !eval_bool(x, env)?,
        BExpr::And(x, y) => eval_bool(x, env)? && eval_bool(y, env)?,
        BExpr::Or(x, y) => eval_bool(x, env)? || eval_bool(y, env)?,
    })
}

#[derive(Clone)]
enum Frame<'p> {
    Block(&'p [Stmt], usize),
    Loop(&'p Stmt),
}

#[derive(Clone)]
struct Exec<'p> {
    env: Env,
    stack: Vec<Frame<'p>>,
    events: Vec<Event>,
    states: Vec<(crate::trace::Point, Env)>,
    /// Statement whose input choice is pending, with the chosen value.
    pending: Option<(&'p Stmt, i64)>,
}

enum Outcome {
    Finished,
    Faulted,
    Suspended,
}

fn next_stmt<'p>(stack: &mut Vec<Frame<'p>>) -> Option<&'p Stmt> {
    loop {
        match stack.last_mut()? {
            Frame::Block(stmts, i) => {
                if *i < stmts.len() {
                    let s = &stmts[*i];
                    *i += 1;
                    return Some(s);
                }
                stack.pop();
            }
            Frame::Loop(s) => {
                let s = *s;
                stack.pop();
                return Some(s);
            }
        }
    }
}

fn eval_failure(s: &Stmt, e: EvalError) -> Error {
    let msg = match e {
        EvalError::Undefined(v) => format!("variable `{v}` used before assignment"),
        EvalError::Overflow => "integer overflow".to_string(),
        EvalError::DivZero => "division by zero".to_string(),
    };
    Error::Evaluation {
        point: s.point,
        msg,
    }
}

/// Enumerates every maximal execution. Input statements branch over their
/// source's domain in ascending order, so traces come out ordered
/// lexicographically by input choices. Division by zero ends the trace with
/// a [`EventKind::Fault`] event.
pub fn enumerate_semantics(p: &Program, step_bound: usize) -> Result<MaximalSemantics, Error> {
    let mut done: Vec<(Trace, Run)> = Vec::new();
    let mut work = vec![Exec {
        env: Env::new(),
        stack: vec![Frame::Block(&p.body, 0)],
        events: Vec::new(),
        states: Vec::new(),
        pending: None,
    }];
    while let Some(mut ex) = work.pop() {
        let outcome = loop {
            if ex.events.len() > step_bound {
                return Err(Error::StepBoundExceeded(step_bound));
            }
            if let Some((s, value)) = ex.pending.take() {
                let StmtKind::Input { var, source } = &s.kind else {
                    unreachable!()
                };
                ex.states.push((s.point, ex.env.clone()));
                ex.events.push(Event::new(
                    s.point,
                    EventKind::Input {
                        var: var.clone(),
                        source: source.clone(),
                        value,
                    },
                ));
                ex.env.insert(var.clone(), value);
                continue;
            }
            let Some(s) = next_stmt(&mut ex.stack) else {
                break Outcome::Finished;
            };
            match &s.kind {
                StmtKind::Assign { var, expr } => match eval_int(expr, &ex.env) {
                    Ok(value) => {
                        ex.states.push((s.point, ex.env.clone()));
                        ex.events.push(Event::new(
                            s.point,
                            EventKind::Assign {
                                var: var.clone(),
                                expr: expr.to_string(),
                                value,
                            },
                        ));
                        ex.env.insert(var.clone(), value);
                    }
                    Err(EvalError::DivZero) => {
                        ex.states.push((s.point, ex.env.clone()));
                        let text = format!("{var}={}", expr.render_with(&ex.env));
                        ex.events
                            .push(Event::new(s.point, EventKind::Fault { text }));
                        break Outcome::Faulted;
                    }
                    Err(e) => return Err(eval_failure(s, e)),
                },
                StmtKind::Input { source, .. } => {
                    let src = p
                        .source(source)
                        .ok_or_else(|| Error::UnknownName(source.clone()))?;
                    // Push in reverse so the smallest value is explored first.
                    for &v in src.domain.iter().rev() {
                        let mut branch = ex.clone();
                        branch.pending = Some((s, v));
                        work.push(branch);
                    }
                    break Outcome::Suspended;
                }
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    ex.states.push((s.point, ex.env.clone()));
                    match eval_bool(cond, &ex.env) {
                        Ok(true) => {
                            ex.events.push(Event::new(
                                s.point,
                                EventKind::TestTrue {
                                    cond: cond.to_string(),
                                },
                            ));
                            ex.stack.push(Frame::Block(then_branch, 0));
                        }
                        Ok(false) => {
                            ex.events.push(Event::new(
                                s.point,
                                EventKind::TestFalse {
                                    cond: cond.to_string(),
                                },
                            ));
                            ex.stack.push(Frame::Block(else_branch, 0));
                        }
                        Err(EvalError::DivZero) => {
                            let text = cond.render_with(&ex.env);
                            ex.events
                                .push(Event::new(s.point, EventKind::Fault { text }));
                            break Outcome::Faulted;
                        }
                        Err(e) => return Err(eval_failure(s, e)),
                    }
                }
                StmtKind::While { cond, body } => {
                    ex.states.push((s.point, ex.env.clone()));
                    match eval_bool(cond, &ex.env) {
                        Ok(true) => {
                            ex.events.push(Event::new(
                                s.point,
                                EventKind::TestTrue {
                                    cond: cond.to_string(),
                                },
                            ));
                            ex.stack.push(Frame::Loop(s));
                            ex.stack.push(Frame::Block(body, 0));
                        }
                        Ok(false) => {
                            ex.events.push(Event::new(
                                s.point,
                                EventKind::TestFalse {
                                    cond: cond.to_string(),
                                },
                            ));
                        }
                        Err(EvalError::DivZero) => {
                            let text = cond.render_with(&ex.env);
                            ex.events
                                .push(Event::new(s.point, EventKind::Fault { text }));
                            break Outcome::Faulted;
                        }
                        Err(e) => return Err(eval_failure(s, e)),
                    }
                }
            }
        };
        let faulted = match outcome {
            // Branches for each input value were pushed onto the worklist.
            Outcome::Suspended => continue,
            Outcome::Faulted => true,
            Outcome::Finished => {
                ex.states.push((p.exit, ex.env.clone()));
                false
            }
        };
        done.push((
            ex.events.into(),
            Run {
                states: ex.states,
                final_env: ex.env,
                faulted,
            },
        ));
    }
    Ok(MaximalSemantics::new(p.clone(), done))
}
