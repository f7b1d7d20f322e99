//! Lexer and recursive-descent parser for the input language.
//!
//! ```text
//! program := (decl | stmt)*
//! decl    := "input" IDENT "in" "{" INT ("," INT)* "}" ";"
//! stmt    := IDENT "=" expr ";"
//!          | IDENT "=" "input" IDENT ("in" "{" INT ("," INT)* "}")? ";"
//!          | "if" "(" bexpr ")" block ("else" (block | if-stmt))?
//!          | "while" "(" bexpr ")" block
//! ```

use std::collections::BTreeMap;

use super::{BExpr, BinOp, CmpOp, Expr, InputSource, Program, Stmt, StmtKind};
use crate::trace::Point;
use crate::Error;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 22] = [
    "==", "!=", "<=", ">=", "&&", "||", "=", "<", ">", "+", "-", "*", "/", "?", ":", "(", ")", "{",
    "}", ",", ";", "!",
];

fn lex(src: &str) -> Result<Vec<Token>, Error> {
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = (line, col);
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            let n = text.parse::<i64>().map_err(|_| Error::Syntax {
                line,
                col,
                msg: format!("integer literal `{text}` out of range"),
            })?;
            out.push(Token {
                tok: Tok::Int(n),
                line: start.0,
                col: start.1,
            });
            col += j - i;
            i = j;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            out.push(Token {
                tok: Tok::Ident(text),
                line: start.0,
                col: start.1,
            });
            col += j - i;
            i = j;
            continue;
        }
        let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let sym = SYMBOLS
            .iter()
            .find(|s| rest.starts_with(**s))
            .ok_or_else(|| Error::Syntax {
                line,
                col,
                msg: format!("unexpected character `{c}`"),
            })?;
        out.push(Token {
            tok: Tok::Sym(sym),
            line: start.0,
            col: start.1,
        });
        i += sym.len();
        col += sym.len();
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// Untyped expression tree; typed into [`Expr`]/[`BExpr`] after parsing.
#[derive(Debug)]
enum Ast {
    Int(i64),
    Var(String),
    Bool(bool),
    Neg(Box<Node>),
    Not(Box<Node>),
    Arith(BinOp, Box<Node>, Box<Node>),
    Cmp(CmpOp, Box<Node>, Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Cond(Box<Node>, Box<Node>, Box<Node>),
}

#[derive(Debug)]
struct Node {
    ast: Ast,
    line: usize,
    col: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    decls: BTreeMap<String, Vec<i64>>,
    inline: Vec<(String, Vec<i64>, usize, usize)>,
    uses: Vec<(String, usize, usize)>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, Error> {
        let (line, col) = self.here();
        Err(Error::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn eat(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(x) if *x == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), Error> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn ident(&mut self) -> Result<String, Error> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.pos += 1;
                Ok(s)
            }
            t => self.err(format!("expected identifier, found {}", describe(&t))),
        }
    }

    fn int_lit(&mut self) -> Result<i64, Error> {
        let neg = self.eat("-");
        match self.peek().clone() {
            Tok::Int(n) => {
                self.pos += 1;
                Ok(if neg { -n } else { n })
            }
            t => self.err(format!("expected integer, found {}", describe(&t))),
        }
    }

    fn domain(&mut self) -> Result<Vec<i64>, Error> {
        self.expect("{")?;
        let mut vals = Vec::new();
        if !self.eat("}") {
            loop {
                vals.push(self.int_lit()?);
                if self.eat("}") {
                    break;
                }
                self.expect(",")?;
            }
        }
        vals.sort_unstable();
        vals.dedup();
        Ok(vals)
    }

    fn program(&mut self) -> Result<Vec<Stmt>, Error> {
        let mut body = Vec::new();
        while *self.peek() != Tok::Eof {
            if self.is_kw("input") {
                let (line, col) = self.here();
                self.pos += 1;
                let name = self.ident()?;
                if !self.is_kw("in") {
                    return self.err("expected `in` after input source name");
                }
                self.pos += 1;
                let dom = self.domain()?;
                self.expect(";")?;
                if self.decls.insert(name.clone(), dom).is_some() {
                    return Err(Error::Syntax {
                        line,
                        col,
                        msg: format!("input source `{name}` declared twice"),
                    });
                }
            } else {
                body.push(self.stmt()?);
            }
        }
        Ok(body)
    }

    fn block(&mut self) -> Result<Vec<Stmt>, Error> {
        self.expect("{")?;
        let mut out = Vec::new();
        while !self.eat("}") {
            if *self.peek() == Tok::Eof {
                return self.err("unterminated block");
            }
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Stmt, Error> {
        let (line, _) = self.here();
        let mk = |kind| Stmt {
            point: Point(0),
            line,
            kind,
        };
        if self.is_kw("if") {
            self.pos += 1;
            self.expect("(")?;
            let cond = self.expr()?;
            let cond = to_bool(cond)?;
            self.expect(")")?;
            let then_branch = self.block()?;
            let else_branch = if self.is_kw("else") {
                self.pos += 1;
                if self.is_kw("if") {
                    vec![self.stmt()?]
                } else {
                    self.block()?
                }
            } else {
                Vec::new()
            };
            return Ok(mk(StmtKind::If {
                cond,
                then_branch,
                else_branch,
            }));
        }
        if self.is_kw("while") {
            self.pos += 1;
            self.expect("(")?;
            let cond = to_bool(self.expr()?)?;
            self.expect(")")?;
            let body = self.block()?;
            return Ok(mk(StmtKind::While { cond, body }));
        }
        let var = self.ident()?;
        self.expect("=")?;
        if self.is_kw("input") {
            self.pos += 1;
            let (sl, sc) = self.here();
            let source = self.ident()?;
            if self.is_kw("in") {
                self.pos += 1;
                let dom = self.domain()?;
                self.inline.push((source.clone(), dom, sl, sc));
            }
            // Tolerate `input_1()` call syntax.
            if self.eat("(") {
                self.expect(")")?;
            }
            self.expect(";")?;
            self.uses.push((source.clone(), sl, sc));
            return Ok(mk(StmtKind::Input { var, source }));
        }
        let e = to_int(self.expr()?)?;
        self.expect(";")?;
        Ok(mk(StmtKind::Assign { var, expr: e }))
    }

    fn node(&self, ast: Ast, at: (usize, usize)) -> Node {
        Node {
            ast,
            line: at.0,
            col: at.1,
        }
    }

    fn expr(&mut self) -> Result<Node, Error> {
        let at = self.here();
        let c = self.or()?;
        if self.eat("?") {
            let a = self.expr()?;
            self.expect(":")?;
            let b = self.expr()?;
            return Ok(self.node(Ast::Cond(Box::new(c), Box::new(a), Box::new(b)), at));
        }
        Ok(c)
    }

    fn or(&mut self) -> Result<Node, Error> {
        let at = self.here();
        let mut l = self.and()?;
        while self.eat("||") {
            let r = self.and()?;
            l = self.node(Ast::Or(Box::new(l), Box::new(r)), at);
        }
        Ok(l)
    }

    fn and(&mut self) -> Result<Node, Error> {
        let at = self.here();
        let mut l = self.cmp()?;
        while self.eat("&&") {
            let r = self.cmp()?;
            l = self.node(Ast::And(Box::new(l), Box::new(r)), at);
        }
        Ok(l)
    }

    fn cmp(&mut self) -> Result<Node, Error> {
        let at = self.here();
        let l = self.add()?;
        let op = match self.peek() {
            Tok::Sym("==") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return Ok(l),
        };
        self.pos += 1;
        let r = self.add()?;
        Ok(self.node(Ast::Cmp(op, Box::new(l), Box::new(r)), at))
    }

    fn add(&mut self) -> Result<Node, Error> {
        let at = self.here();
        let mut l = self.mul()?;
        loop {
            let op = if self.eat("+") {
                BinOp::Add
            } else if self.eat("-") {
                BinOp::Sub
            } else {
                return Ok(l);
            };
            let r = self.mul()?;
            l = self.node(Ast::Arith(op, Box::new(l), Box::new(r)), at);
        }
    }

    fn mul(&mut self) -> Result<Node, Error> {
        let at = self.here();
        let mut l = self.unary()?;
        loop {
            let op = if self.eat("*") {
                BinOp::Mul
            } else if self.eat("/") {
                BinOp::Div
            } else {
                return Ok(l);
            };
            let r = self.unary()?;
            l = self.node(Ast::Arith(op, Box::new(l), Box::new(r)), at);
        }
    }

    fn unary(&mut self) -> Result<Node, Error> {
        let at = self.here();
        if self.eat("-") {
            let e = self.unary()?;
            if let Ast::Int(n) = e.ast {
                return Ok(self.node(Ast::Int(-n), at));
            }
            return Ok(self.node(Ast::Neg(Box::new(e)), at));
        }
        if self.eat("!") {
            let e = self.unary()?;
            return Ok(self.node(Ast::Not(Box::new(e)), at));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Node, Error> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.pos += 1;
                Ok(self.node(Ast::Int(n), at))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.pos += 1;
                Ok(self.node(Ast::Bool(s == "true"), at))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.pos += 1;
                Ok(self.node(Ast::Var(s), at))
            }
            Tok::Sym("(") => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            t => self.err(format!("expected expression, found {}", describe(&t))),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "input" | "in" | "if" | "else" | "while" | "true" | "false"
    )
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}

fn type_err<T>(n: &Node, what: &str) -> Result<T, Error> {
    Err(Error::Syntax {
        line: n.line,
        col: n.col,
        msg: format!("expected {what} expression"),
    })
}

fn to_int(n: Node) -> Result<Expr, Error> {
    Ok(match n.ast {
        Ast::Int(v) => Expr::Int(v),
        Ast::Var(v) => Expr::Var(v),
        Ast::Neg(e) => Expr::Neg(Box::new(to_int(*e)?)),
        Ast::Arith(op, a, b) => Expr::Bin(op, Box::new(to_int(*a)?), Box::new(to_int(*b)?)),
        Ast::Cond(c, a, b) => Expr::Cond(
            Box::new(to_bool(*c)?),
            Box::new(to_int(*a)?),
            Box::new(to_int(*b)?),
        ),
        _ => return type_err(&n, "an integer"),
    })
}

fn to_bool(n: Node) -> Result<BExpr, Error> {
    Ok(match n.ast {
        Ast::Bool(b) => BExpr::Const(b),
        Ast::Cmp(op, a, b) => BExpr::Cmp(op, to_int(*a)?, to_int(*b)?),
        Ast::Not(e) => BExpr::Not(Box::new(to_bool(*e)?)),
        Ast::And(a, b) => BExpr::And(Box::new(to_bool(*a)?), Box::new(to_bool(*b)?)),
        Ast::Or(a, b) => BExpr::Or(Box::new(to_bool(*a)?), Box::new(to_bool(*b)?)),
        _ => return type_err(&n, "a boolean"),
    })
}

/// Parses program text. Input sources may be declared up front
/// (`input s in {..};`) or inline at their single use
/// (`x = input s in {..};`).
pub fn parse(text: &str) -> Result<Program, Error> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        decls: BTreeMap::new(),
        inline: Vec::new(),
        uses: Vec::new(),
    };
    let body = p.program()?;
    let mut order: Vec<String> = p.decls.keys().cloned().collect();
    for (name, dom, line, col) in std::mem::take(&mut p.inline) {
        match p.decls.get(&name) {
            Some(d) if *d != dom => {
                return Err(Error::Syntax {
                    line,
                    col,
                    msg: format!("conflicting domains for input source `{name}`"),
                })
            }
            Some(_) => {}
            None => {
                p.decls.insert(name.clone(), dom);
                order.push(name);
            }
        }
    }
    for (name, line, col) in &p.uses {
        if !p.decls.contains_key(name) {
            return Err(Error::Syntax {
                line: *line,
                col: *col,
                msg: format!("undeclared input source `{name}`"),
            });
        }
    }
    let mut sources = Vec::new();
    for name in order {
        let domain = p.decls[&name].clone();
        if domain.is_empty() {
            return Err(Error::EmptyDomain(name));
        }
        sources.push(InputSource { name, domain });
    }
    Ok(Program::new(sources, body))
}

fn standalone<T>(text: &str, f: impl FnOnce(Node) -> Result<T, Error>) -> Result<T, Error> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        decls: BTreeMap::new(),
        inline: Vec::new(),
        uses: Vec::new(),
    };
    let n = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {}", describe(p.peek())));
    }
    f(n)
}

/// Parses a standalone boolean expression, e.g. `balance<0`.
pub fn parse_bexpr(text: &str) -> Result<BExpr, Error> {
    standalone(text, to_bool)
}

/// Parses a standalone integer expression.
pub fn parse_expr(text: &str) -> Result<Expr, Error> {
    standalone(text, to_int)
}
