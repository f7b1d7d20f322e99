//! The analysed input language: AST, canonical printing, parsing and
//! exhaustive execution.

mod interp;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use crate::trace::Point;

pub use interp::{enumerate_semantics, eval_bool, eval_int, EvalError, DEFAULT_STEP_BOUND};
pub use parse::{parse, parse_bexpr, parse_expr};

/// Variable environment.
pub type Env = BTreeMap<String, i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
    fn prec(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    /// The operator with swapped operands: `a op b ⇔ b op.flip() a`.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Eq,
            CmpOp::Ne => CmpOp::Ne,
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

/// Integer expressions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Cond(Box<BExpr>, Box<Expr>, Box<Expr>),
}

/// Boolean expressions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BExpr {
    Const(bool),
    Cmp(CmpOp, Expr, Expr),
    Not(Box<BExpr>),
    And(Box<BExpr>, Box<BExpr>),
    Or(Box<BExpr>, Box<BExpr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    /// Variables read by the expression.
    pub fn reads(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Int(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Neg(e) => e.reads(out),
            Expr::Bin(_, a, b) => {
                a.reads(out);
                b.reads(out);
            }
            Expr::Cond(c, a, b) => {
                c.reads(out);
                a.reads(out);
                b.reads(out);
            }
        }
    }

    pub fn has_division(&self) -> bool {
        match self {
            Expr::Int(_) | Expr::Var(_) => false,
            Expr::Neg(e) => e.has_division(),
            Expr::Bin(op, a, b) => *op == BinOp::Div || a.has_division() || b.has_division(),
            Expr::Cond(c, a, b) => c.has_division() || a.has_division() || b.has_division(),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Cond(..) => 1,
            Expr::Bin(op, ..) => op.prec(),
            Expr::Neg(_) => 7,
            Expr::Int(n) if *n < 0 => 7,
            _ => 8,
        }
    }

    fn write(&self, out: &mut String, ctx: u8, env: Option<&Env>) {
        let paren = self.prec() < ctx;
        if paren {
            out.push('(');
        }
        match self {
            Expr::Int(n) => write!(out, "{n}").unwrap(),
            Expr::Var(v) => match env.and_then(|e| e.get(v)) {
                Some(n) if *n < 0 && ctx > 7 => write!(out, "({n})").unwrap(),
                Some(n) => write!(out, "{n}").unwrap(),
                None => out.push_str(v),
            },
            Expr::Neg(e) => {
                out.push('-');
                e.write(out, 8, env);
            }
            Expr::Bin(op, a, b) => {
                a.write(out, op.prec(), env);
                out.push_str(op.symbol());
                b.write(out, op.prec() + 1, env);
            }
            Expr::Cond(c, a, b) => {
                out.push('(');
                c.write(out, 0, env);
                out.push_str(")?");
                a.write(out, 2, env);
                out.push(':');
                b.write(out, 2, env);
            }
        }
        if paren {
            out.push(')');
        }
    }

    /// Text with every defined variable replaced by its value.
    pub fn render_with(&self, env: &Env) -> String {
        let mut s = String::new();
        self.write(&mut s, 0, Some(env));
        s
    }
}

impl BExpr {
    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> BExpr {
        BExpr::Cmp(op, a, b)
    }

    pub fn reads(&self, out: &mut BTreeSet<String>) {
        match self {
            BExpr::Const(_) => {}
            BExpr::Cmp(_, a, b) => {
                a.reads(out);
                b.reads(out);
            }
            BExpr::Not(b) => b.reads(out),
            BExpr::And(a, b) | BExpr::Or(a, b) => {
                a.reads(out);
                b.reads(out);
            }
        }
    }

    pub fn has_division(&self) -> bool {
        match self {
            BExpr::Const(_) => false,
            BExpr::Cmp(_, a, b) => a.has_division() || b.has_division(),
            BExpr::Not(b) => b.has_division(),
            BExpr::And(a, b) | BExpr::Or(a, b) => a.has_division() || b.has_division(),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            BExpr::Or(..) => 2,
            BExpr::And(..) => 3,
            BExpr::Cmp(..) => 4,
            BExpr::Not(_) => 7,
            BExpr::Const(_) => 8,
        }
    }

    fn write(&self, out: &mut String, ctx: u8, env: Option<&Env>) {
        let paren = self.prec() < ctx;
        if paren {
            out.push('(');
        }
        match self {
            BExpr::Const(b) => write!(out, "{b}").unwrap(),
            BExpr::Cmp(op, a, b) => {
                a.write(out, 5, env);
                out.push_str(op.symbol());
                b.write(out, 5, env);
            }
            BExpr::Not(b) => {
                out.push('!');
                b.write(out, 8, env);
            }
            BExpr::And(a, b) => {
                a.write(out, 3, env);
                out.push_str("&&");
                b.write(out, 4, env);
            }
            BExpr::Or(a, b) => {
                a.write(out, 2, env);
                out.push_str("||");
                b.write(out, 3, env);
            }
        }
        if paren {
            out.push(')');
        }
    }

    pub fn render_with(&self, env: &Env) -> String {
        let mut s = String::new();
        self.write(&mut s, 0, Some(env));
        s
    }
}

impl fmt::Display for Expr {
    /// Canonical form without spaces, e.g. `apv*typ`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s, 0, None);
        f.write_str(&s)
    }
}

impl fmt::Display for BExpr {
    /// Canonical form without spaces, e.g. `apv!=0&&i2==0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s, 0, None);
        f.write_str(&s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputSource {
    pub name: String,
    /// Sorted, duplicate-free, nonempty.
    pub domain: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Assign {
        var: String,
        expr: Expr,
    },
    Input {
        var: String,
        source: String,
    },
    If {
        cond: BExpr,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
    },
    While {
        cond: BExpr,
        body: Vec<Stmt>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub point: Point,
    /// Source line (1-based; 0 for synthesised programs).
    pub line: usize,
    pub kind: StmtKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub sources: Vec<InputSource>,
    pub body: Vec<Stmt>,
    pub exit: Point,
}

impl Program {
    /// Builds a program and assigns pre-order point labels `ℓ1..`; the exit
    /// point is one past the last statement.
    pub fn new(sources: Vec<InputSource>, mut body: Vec<Stmt>) -> Program {
        fn number(stmts: &mut [Stmt], next: &mut u32) {
            for s in stmts {
                s.point = Point(*next);
                *next += 1;
                match &mut s.kind {
                    StmtKind::If {
                        then_branch,
                        else_branch,
                        ..
                    } => {
                        number(then_branch, next);
                        number(else_branch, next);
                    }
                    StmtKind::While { body, .. } => number(body, next),
                    _ => {}
                }
            }
        }
        let mut next = 1;
        number(&mut body, &mut next);
        Program {
            sources,
            body,
            exit: Point(next),
        }
    }

    pub fn source(&self, name: &str) -> Option<&InputSource> {
        self.sources.iter().find(|s| s.name == name)
    }

    /// All statements in pre-order.
    pub fn statements(&self) -> Vec<&Stmt> {
        fn walk<'a>(stmts: &'a [Stmt], out: &mut Vec<&'a Stmt>) {
            for s in stmts {
                out.push(s);
                match &s.kind {
                    StmtKind::If {
                        then_branch,
                        else_branch,
                        ..
                    } => {
                        walk(then_branch, out);
                        walk(else_branch, out);
                    }
                    StmtKind::While { body, .. } => walk(body, out),
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.body, &mut out);
        out
    }

    pub fn stmt_at(&self, p: Point) -> Option<&Stmt> {
        self.statements().into_iter().find(|s| s.point == p)
    }

    /// Variables assigned anywhere in the program.
    pub fn variables(&self) -> BTreeSet<String> {
        self.statements()
            .into_iter()
            .filter_map(|s| match &s.kind {
                StmtKind::Assign { var, .. } | StmtKind::Input { var, .. } => Some(var.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn has_loops(&self) -> bool {
        self.statements()
            .iter()
            .any(|s| matches!(s.kind, StmtKind::While { .. }))
    }

    pub fn has_division(&self) -> bool {
        self.statements().iter().any(|s| match &s.kind {
            StmtKind::Assign { expr, .. } => expr.has_division(),
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => cond.has_division(),
            StmtKind::Input { .. } => false,
        })
    }
}

impl fmt::Display for Program {
    /// Pretty-prints the program in the input language, labelling each
    /// statement with its point in a trailing comment.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn block(f: &mut fmt::Formatter<'_>, stmts: &[Stmt], depth: usize) -> fmt::Result {
            let pad = "    ".repeat(depth);
            for s in stmts {
                match &s.kind {
                    StmtKind::Assign { var, expr } => {
                        writeln!(f, "{pad}{var} = {expr}; // {}", s.point)?
                    }
                    StmtKind::Input { var, source } => {
                        writeln!(f, "{pad}{var} = input {source}; // {}", s.point)?
                    }
                    StmtKind::If {
                        cond,
                        then_branch,
                        else_branch,
                    } => {
                        writeln!(f, "{pad}if ({cond}) {{ // {}", s.point)?;
                        block(f, then_branch, depth + 1)?;
                        if else_branch.is_empty() {
                            writeln!(f, "{pad}}}")?;
                        } else {
                            writeln!(f, "{pad}}} else {{")?;
                            block(f, else_branch, depth + 1)?;
                            writeln!(f, "{pad}}}")?;
                        }
                    }
                    StmtKind::While { cond, body } => {
                        writeln!(f, "{pad}while ({cond}) {{ // {}", s.point)?;
                        block(f, body, depth + 1)?;
                        writeln!(f, "{pad}}}")?;
                    }
                }
            }
            Ok(())
        }
        for s in &self.sources {
            let dom: Vec<String> = s.domain.iter().map(i64::to_string).collect();
            writeln!(f, "input {} in {{{}}};", s.name, dom.join(", "))?;
        }
        block(f, &self.body, 0)?;
        write!(f, "// exit {}", self.exit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_condition_text() {
        let c = BExpr::And(
            Box::new(BExpr::cmp(CmpOp::Ne, Expr::var("apv"), Expr::Int(0))),
            Box::new(BExpr::cmp(CmpOp::Eq, Expr::var("i2"), Expr::Int(0))),
        );
        assert_eq!(c.to_string(), "apv!=0&&i2==0");
        let e = Expr::bin(
            BinOp::Sub,
            Expr::var("a"),
            Expr::bin(BinOp::Sub, Expr::var("b"), Expr::Int(1)),
        );
        assert_eq!(e.to_string(), "a-(b-1)");
    }

    #[test]
    fn substituted_rendering() {
        let e = Expr::bin(BinOp::Div, Expr::Int(1), Expr::var("H"));
        let env: Env = [("H".to_string(), 0)].into();
        assert_eq!(e.render_with(&env), "1/0");
    }
}
