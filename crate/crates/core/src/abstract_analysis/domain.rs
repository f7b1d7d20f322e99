//! Reduced product of integer intervals and symbolic (dis)equalities.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::program::{BExpr, BinOp, CmpOp, Env, Expr};

/// Stand-in for ±∞; strictly larger than any `i64`.
pub const INF: i128 = i64::MAX as i128 + 1;

/// Upper bound on disjuncts produced by [`AbsValue::assume`] before they are
/// joined into one.
pub const MAX_DISJUNCTS: usize = 16;

fn clamp(x: i128) -> i128 {
    x.clamp(-INF, INF)
}

/// A possibly unbounded integer interval; `lo > hi` encodes the empty one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Itv {
    pub lo: i128,
    pub hi: i128,
}

impl Itv {
    pub const TOP: Itv = Itv { lo: -INF, hi: INF };

    pub fn new(lo: i128, hi: i128) -> Itv {
        Itv {
            lo: clamp(lo),
            hi: clamp(hi),
        }
    }

    pub fn constant(c: i64) -> Itv {
        Itv::new(c.into(), c.into())
    }

    pub fn is_empty(self) -> bool {
        self.lo > self.hi
    }

    pub fn is_top(self) -> bool {
        self.lo <= -INF && self.hi >= INF
    }

    pub fn singleton(self) -> Option<i128> {
        (self.lo == self.hi && self.lo.abs() < INF).then_some(self.lo)
    }

    pub fn contains(self, v: i128) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn meet(self, o: Itv) -> Itv {
        Itv {
            lo: self.lo.max(o.lo),
            hi: self.hi.min(o.hi),
        }
    }

    pub fn hull(self, o: Itv) -> Itv {
        if self.is_empty() {
            return o;
        }
        if o.is_empty() {
            return self;
        }
        Itv {
            lo: self.lo.min(o.lo),
            hi: self.hi.max(o.hi),
        }
    }

    pub fn subset(self, o: Itv) -> bool {
        self.is_empty() || (o.lo <= self.lo && self.hi <= o.hi)
    }

    fn add(self, o: Itv) -> Itv {
        Itv::new(self.lo + o.lo, self.hi + o.hi)
    }

    fn neg(self) -> Itv {
        Itv::new(-self.hi, -self.lo)
    }

    fn mul(self, o: Itv) -> Itv {
        let c = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        Itv::new(*c.iter().min().unwrap(), *c.iter().max().unwrap())
    }

    fn div(self, o: Itv) -> Itv {
        if o.contains(0) {
            return Itv::TOP;
        }
        // Truncating division is monotone in each argument on a sign-constant divisor.
        let q = |a: i128, b: i128| if b.abs() >= INF { 0 } else { a / b };
        let c = [
            q(self.lo, o.lo),
            q(self.lo, o.hi),
            q(self.hi, o.lo),
            q(self.hi, o.hi),
        ];
        Itv::new(*c.iter().min().unwrap(), *c.iter().max().unwrap())
    }
}

impl fmt::Display for Itv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = |v: i128| match v {
            v if v <= -INF => "-∞".to_string(),
            v if v >= INF => "+∞".to_string(),
            v => v.to_string(),
        };
        write!(f, "[{},{}]", b(self.lo), b(self.hi))
    }
}

/// Relational facts. `Eq`/`Ne` keep their variables sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Eq(String, String),
    Ne(String, String),
    Lt(String, String),
    Le(String, String),
    NeConst(String, i64),
}

impl Atom {
    pub fn eq(a: &str, b: &str) -> Atom {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        Atom::Eq(a.into(), b.into())
    }

    pub fn ne(a: &str, b: &str) -> Atom {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        Atom::Ne(a.into(), b.into())
    }

    fn mentions(&self, v: &str) -> bool {
        match self {
            Atom::Eq(a, b) | Atom::Ne(a, b) | Atom::Lt(a, b) | Atom::Le(a, b) => a == v || b == v,
            Atom::NeConst(a, _) => a == v,
        }
    }

    fn rename(&self, from: &str, to: &str) -> Atom {
        let r = |x: &String| if x == from { to.to_string() } else { x.clone() };
        match self {
            Atom::Eq(a, b) => Atom::eq(&r(a), &r(b)),
            Atom::Ne(a, b) => Atom::ne(&r(a), &r(b)),
            Atom::Lt(a, b) => Atom::Lt(r(a), r(b)),
            Atom::Le(a, b) => Atom::Le(r(a), r(b)),
            Atom::NeConst(a, c) => Atom::NeConst(r(a), *c),
        }
    }

    fn holds(&self, env: &Env) -> bool {
        let g = |v: &String| env.get(v).copied();
        match self {
            Atom::Eq(a, b) => {
                matches!((g(a), g(b)), (Some(x), Some(y)) if x == y)
                    || g(a).is_none()
                    || g(b).is_none()
            }
            Atom::Ne(a, b) => !matches!((g(a), g(b)), (Some(x), Some(y)) if x == y),
            Atom::Lt(a, b) => !matches!((g(a), g(b)), (Some(x), Some(y)) if x >= y),
            Atom::Le(a, b) => !matches!((g(a), g(b)), (Some(x), Some(y)) if x > y),
            Atom::NeConst(a, c) => g(a) != Some(*c),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Eq(a, b) => write!(f, "{a}={b}"),
            Atom::Ne(a, b) => write!(f, "{a}≠{b}"),
            Atom::Lt(a, b) => write!(f, "{a}<{b}"),
            Atom::Le(a, b) => write!(f, "{a}≤{b}"),
            Atom::NeConst(a, c) => write!(f, "{a}≠{c}"),
        }
    }
}

/// An element of the reduced product. Variables without an interval entry
/// are unconstrained; `bot` is the canonical empty value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbsValue {
    bot: bool,
    itv: BTreeMap<String, Itv>,
    atoms: BTreeSet<Atom>,
}

impl Default for AbsValue {
    fn default() -> Self {
        AbsValue::top()
    }
}

impl AbsValue {
    pub fn top() -> AbsValue {
        AbsValue {
            bot: false,
            itv: BTreeMap::new(),
            atoms: BTreeSet::new(),
        }
    }

    pub fn bottom() -> AbsValue {
        AbsValue {
            bot: true,
            itv: BTreeMap::new(),
            atoms: BTreeSet::new(),
        }
    }

    pub fn is_bot(&self) -> bool {
        self.bot
    }

    pub fn is_top(&self) -> bool {
        !self.bot && self.itv.is_empty() && self.atoms.is_empty()
    }

    pub fn interval(&self, v: &str) -> Itv {
        self.itv.get(v).copied().unwrap_or(Itv::TOP)
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    pub fn with_interval(mut self, v: &str, i: Itv) -> AbsValue {
        self.set(v, self.interval(v).meet(i));
        self.reduce();
        self
    }

    pub fn with_atom(mut self, a: Atom) -> AbsValue {
        self.atoms.insert(a);
        self.reduce();
        self
    }

    fn set(&mut self, v: &str, i: Itv) {
        if i.is_top() {
            self.itv.remove(v);
        } else {
            self.itv.insert(v.to_string(), i);
        }
    }

    /// Whether a concrete environment satisfies every constraint. Constraints
    /// on variables the environment does not define are vacuous.
    pub fn contains(&self, env: &Env) -> bool {
        !self.bot
            && self
                .itv
                .iter()
                .all(|(v, i)| env.get(v).map_or(true, |&x| i.contains(x.into())))
            && self.atoms.iter().all(|a| a.holds(env))
    }

    /// Whether `a` follows from the value.
    pub fn entails(&self, a: &Atom) -> bool {
        if self.bot || self.atoms.contains(a) {
            return true;
        }
        match a {
            Atom::Eq(x, y) => {
                x == y
                    || matches!((self.interval(x).singleton(), self.interval(y).singleton()), (Some(p), Some(q)) if p == q)
            }
            Atom::Ne(x, y) => {
                let (i, j) = (self.interval(x), self.interval(y));
                i.hi < j.lo
                    || j.hi < i.lo
                    || self.atoms.contains(&Atom::Lt(x.clone(), y.clone()))
                    || self.atoms.contains(&Atom::Lt(y.clone(), x.clone()))
            }
            Atom::Lt(x, y) => self.interval(x).hi < self.interval(y).lo,
            Atom::Le(x, y) => {
                self.interval(x).hi <= self.interval(y).lo
                    || self.atoms.contains(&Atom::Lt(x.clone(), y.clone()))
                    || self.atoms.contains(&Atom::eq(x, y))
            }
            Atom::NeConst(x, c) => !self.interval(x).contains((*c).into()),
        }
    }

    fn nonzero(&self, v: &str) -> bool {
        self.entails(&Atom::NeConst(v.to_string(), 0))
    }

    /// Restores consistency between intervals and atoms; detects simple
    /// contradictions.
    pub fn reduce(&mut self) {
        for _ in 0..32 {
            if self.bot {
                break;
            }
            let before = (self.itv.clone(), self.atoms.clone());
            // Equalities share facts between their two sides.
            let eqs: Vec<(String, String)> = self
                .atoms
                .iter()
                .filter_map(|a| match a {
                    Atom::Eq(x, y) => Some((x.clone(), y.clone())),
                    _ => None,
                })
                .collect();
            for (x, y) in &eqs {
                let extra: Vec<Atom> = self
                    .atoms
                    .iter()
                    .filter(|a| !matches!(a, Atom::Eq(p, q) if (p == x && q == y)))
                    .flat_map(|a| [a.rename(x, y), a.rename(y, x)])
                    .collect();
                self.atoms.extend(extra);
            }
            let atoms: Vec<Atom> = self.atoms.iter().cloned().collect();
            for a in &atoms {
                match a {
                    Atom::Eq(x, y) => {
                        let m = self.interval(x).meet(self.interval(y));
                        self.set(x, m);
                        self.set(y, m);
                    }
                    Atom::Lt(x, y) | Atom::Le(x, y) => {
                        let d = if matches!(a, Atom::Lt(..)) { 1 } else { 0 };
                        if x == y {
                            if d == 1 {
                                self.bot = true;
                            }
                            continue;
                        }
                        let (i, j) = (self.interval(x), self.interval(y));
                        self.set(x, i.meet(Itv::new(-INF, j.hi.saturating_sub(d))));
                        self.set(y, j.meet(Itv::new(i.lo.saturating_add(d), INF)));
                    }
                    Atom::Ne(x, y) => {
                        if x == y {
                            self.bot = true;
                            continue;
                        }
                        let (i, j) = (self.interval(x), self.interval(y));
                        if let Some(v) = i.singleton() {
                            self.set(y, shave(j, v));
                        }
                        if let Some(v) = j.singleton() {
                            self.set(x, shave(i, v));
                        }
                    }
                    Atom::NeConst(x, c) => {
                        let i = self.interval(x);
                        self.set(x, shave(i, (*c).into()));
                    }
                }
            }
            if self.itv.values().any(|i| i.is_empty()) {
                self.bot = true;
            }
            for a in &atoms {
                let clash = match a {
                    Atom::Eq(x, y) => {
                        self.atoms.contains(&Atom::ne(x, y))
                            || self.atoms.contains(&Atom::Lt(x.clone(), y.clone()))
                            || self.atoms.contains(&Atom::Lt(y.clone(), x.clone()))
                    }
                    Atom::Lt(x, y) => {
                        self.atoms.contains(&Atom::Lt(y.clone(), x.clone()))
                            || self.atoms.contains(&Atom::Le(y.clone(), x.clone()))
                    }
                    _ => false,
                };
                if clash {
                    self.bot = true;
                }
            }
            if (self.itv.clone(), self.atoms.clone()) == before {
                break;
            }
        }
        if self.bot {
            *self = AbsValue::bottom();
        } else {
            // Drop atoms that the intervals already imply, and trivial ones.
            let keep: BTreeSet<Atom> = self
                .atoms
                .iter()
                .filter(|a| !matches!(a, Atom::Eq(x, y) | Atom::Le(x, y) if x == y))
                .filter(|a| match a {
                    Atom::NeConst(x, c) => self.interval(x).contains((*c).into()),
                    // Subsumed by a stronger atom.
                    Atom::Le(x, y) => {
                        !self.atoms.contains(&Atom::eq(x, y))
                            && !self.atoms.contains(&Atom::Lt(x.clone(), y.clone()))
                    }
                    Atom::Ne(x, y) => {
                        !self.atoms.contains(&Atom::Lt(x.clone(), y.clone()))
                            && !self.atoms.contains(&Atom::Lt(y.clone(), x.clone()))
                    }
                    _ => true,
                })
                .cloned()
                .collect();
            self.atoms = keep;
        }
    }

    pub fn meet(&self, o: &AbsValue) -> AbsValue {
        if self.bot || o.bot {
            return AbsValue::bottom();
        }
        let mut r = self.clone();
        for (v, i) in &o.itv {
            r.set(v, r.interval(v).meet(*i));
        }
        r.atoms.extend(o.atoms.iter().cloned());
        r.reduce();
        r
    }

    pub fn join(&self, o: &AbsValue) -> AbsValue {
        if self.bot {
            return o.clone();
        }
        if o.bot {
            return self.clone();
        }
        let mut r = AbsValue::top();
        for (v, i) in &self.itv {
            if let Some(j) = o.itv.get(v) {
                r.set(v, i.hull(*j));
            }
        }
        r.atoms = self
            .atoms
            .iter()
            .chain(&o.atoms)
            .filter(|a| self.entails(a) && o.entails(a))
            .cloned()
            .collect();
        r.reduce();
        r
    }

    /// Join with unstable interval bounds pushed to infinity.
    pub fn widen(&self, next: &AbsValue) -> AbsValue {
        if self.bot {
            return next.clone();
        }
        let j = self.join(next);
        if j.bot {
            return j;
        }
        let mut r = AbsValue::top();
        for (v, i) in &j.itv {
            let Some(old) = self.itv.get(v) else { continue };
            let lo = if i.lo < old.lo { -INF } else { i.lo };
            let hi = if i.hi > old.hi { INF } else { i.hi };
            r.set(v, Itv::new(lo, hi));
        }
        r.atoms = j
            .atoms
            .iter()
            .filter(|a| self.atoms.contains(*a))
            .cloned()
            .collect();
        r
    }

    pub fn leq(&self, o: &AbsValue) -> bool {
        if self.bot {
            return true;
        }
        if o.bot {
            return false;
        }
        o.itv.iter().all(|(v, i)| self.interval(v).subset(*i))
            && o.atoms.iter().all(|a| self.entails(a))
    }

    pub fn forget(&mut self, v: &str) {
        if self.bot {
            return;
        }
        self.itv.remove(v);
        self.atoms.retain(|a| !a.mentions(v));
    }

    /// Interval of an expression.
    pub fn eval(&self, e: &Expr) -> Itv {
        if self.bot {
            return Itv { lo: 1, hi: 0 };
        }
        match e {
            Expr::Int(n) => Itv::constant(*n),
            Expr::Var(v) => self.interval(v),
            Expr::Neg(a) => self.eval(a).neg(),
            Expr::Bin(op, a, b) => {
                let (x, y) = (self.eval(a), self.eval(b));
                match op {
                    BinOp::Add => x.add(y),
                    BinOp::Sub => {
                        if let (Expr::Var(p), Expr::Var(q)) = (a.as_ref(), b.as_ref()) {
                            if self.entails(&Atom::eq(p, q)) {
                                return Itv::constant(0);
                            }
                        }
                        x.add(y.neg())
                    }
                    BinOp::Mul => x.mul(y),
                    BinOp::Div => x.div(y),
                }
            }
            Expr::Cond(c, a, b) => {
                let t = AbsValue::join_all(self.assume(c));
                let f = AbsValue::join_all(self.assume(&BExpr::Not(c.clone())));
                let (ti, fi) = (t.eval(a), f.eval(b));
                match (t.bot, f.bot) {
                    (true, true) => Itv { lo: 1, hi: 0 },
                    (true, false) => fi,
                    (false, true) => ti,
                    (false, false) => ti.hull(fi),
                }
            }
        }
    }

    /// Whether `e` is definitely nonzero.
    fn expr_nonzero(&self, e: &Expr) -> bool {
        if !self.eval(e).contains(0) {
            return true;
        }
        match e {
            Expr::Var(v) => self.nonzero(v),
            Expr::Neg(a) => self.expr_nonzero(a),
            Expr::Bin(BinOp::Mul, a, b) => self.expr_nonzero(a) && self.expr_nonzero(b),
            Expr::Bin(BinOp::Sub, a, b) => match (a.as_ref(), b.as_ref()) {
                (Expr::Var(p), Expr::Var(q)) => self.entails(&Atom::ne(p, q)),
                (Expr::Var(p), Expr::Int(c)) => self.entails(&Atom::NeConst(p.clone(), *c)),
                _ => false,
            },
            Expr::Bin(BinOp::Add, a, b) => match (a.as_ref(), b.as_ref()) {
                (Expr::Var(p), Expr::Int(c)) | (Expr::Int(c), Expr::Var(p)) => c
                    .checked_neg()
                    .is_some_and(|k| self.entails(&Atom::NeConst(p.clone(), k))),
                _ => false,
            },
            _ => false,
        }
    }

    /// Strongest post-condition of `x = e`.
    pub fn assign(&self, x: &str, e: &Expr) -> AbsValue {
        if self.bot {
            return AbsValue::bottom();
        }
        let mut i = self.eval(e);
        if let Expr::Bin(BinOp::Sub, a, b) = e {
            if let (Expr::Var(p), Expr::Var(q)) = (a.as_ref(), b.as_ref()) {
                // The sign of a difference follows from an ordering between its operands.
                let (p, q) = (p.clone(), q.clone());
                if self.entails(&Atom::Lt(p.clone(), q.clone())) {
                    i = i.meet(Itv::new(-INF, -1));
                } else if self.entails(&Atom::Le(p.clone(), q.clone())) {
                    i = i.meet(Itv::new(-INF, 0));
                }
                if self.entails(&Atom::Lt(q.clone(), p.clone())) {
                    i = i.meet(Itv::new(1, INF));
                } else if self.entails(&Atom::Le(q, p)) {
                    i = i.meet(Itv::new(0, INF));
                }
            }
        }
        if i.is_empty() {
            return AbsValue::bottom();
        }
        let nz = self.expr_nonzero(e);
        let mut r = self.clone();
        r.forget(x);
        r.set(x, i);
        if nz {
            r.atoms.insert(Atom::NeConst(x.to_string(), 0));
        }
        if let Expr::Var(y) = e {
            if y != x {
                // Facts about y carry over to x.
                r.atoms.insert(Atom::eq(x, y));
            }
        }
        r.reduce();
        r
    }

    /// Input of an arbitrary value from `domain` into `x`.
    pub fn input(&self, x: &str, domain: &[i64]) -> AbsValue {
        let mut r = self.clone();
        r.forget(x);
        if let (Some(&lo), Some(&hi)) = (domain.first(), domain.last()) {
            r.set(x, Itv::new(lo.into(), hi.into()));
        }
        r.reduce();
        r
    }

    pub fn join_all<I: IntoIterator<Item = AbsValue>>(it: I) -> AbsValue {
        it.into_iter().fold(AbsValue::bottom(), |a, b| a.join(&b))
    }

    /// Restricts the value to states satisfying `c`, as a disjunction of
    /// non-bottom values. Comparisons outside the supported forms only prune
    /// by interval evaluation.
    pub fn assume(&self, c: &BExpr) -> Vec<AbsValue> {
        if self.bot {
            return Vec::new();
        }
        let mut out = self.assume_pol(c, true);
        out.retain(|v| !v.bot);
        out.sort();
        out.dedup();
        if out.len() > MAX_DISJUNCTS {
            out = vec![AbsValue::join_all(out)];
        }
        out
    }

    fn assume_pol(&self, c: &BExpr, pos: bool) -> Vec<AbsValue> {
        match c {
            BExpr::Const(b) => {
                if *b == pos {
                    vec![self.clone()]
                } else {
                    Vec::new()
                }
            }
            BExpr::Not(x) => self.assume_pol(x, !pos),
            BExpr::And(a, b) | BExpr::Or(a, b) => {
                let conj = matches!(c, BExpr::And(..)) == pos;
                if conj {
                    self.assume_pol(a, pos)
                        .iter()
                        .flat_map(|v| v.assume_pol(b, pos))
                        .filter(|v| !v.bot)
                        .collect()
                } else {
                    let mut v = self.assume_pol(a, pos);
                    v.extend(self.assume_pol(b, pos));
                    v
                }
            }
            BExpr::Cmp(op, l, r) => {
                let op = if pos { *op } else { op.negate() };
                let v = self.cmp(op, l, r);
                if v.bot {
                    Vec::new()
                } else {
                    vec![v]
                }
            }
        }
    }

    fn cmp(&self, op: CmpOp, l: &Expr, r: &Expr) -> AbsValue {
        match (l, r) {
            (Expr::Int(a), Expr::Int(b)) => {
                if op.holds(*a, *b) {
                    self.clone()
                } else {
                    AbsValue::bottom()
                }
            }
            (Expr::Var(a), Expr::Var(b)) => {
                let atom = match op {
                    CmpOp::Eq => Atom::eq(a, b),
                    CmpOp::Ne => Atom::ne(a, b),
                    CmpOp::Lt => Atom::Lt(a.clone(), b.clone()),
                    CmpOp::Le => Atom::Le(a.clone(), b.clone()),
                    CmpOp::Gt => Atom::Lt(b.clone(), a.clone()),
                    CmpOp::Ge => Atom::Le(b.clone(), a.clone()),
                };
                self.clone().with_atom(atom)
            }
            (Expr::Int(_), Expr::Var(_)) => self.cmp(op.flip(), r, l),
            (Expr::Var(a), _) => {
                let ri = self.eval(r);
                let mut v = self.constrain(a, op, ri);
                if let (CmpOp::Ne, Some(c)) = (op, ri.singleton()) {
                    v = v.with_atom(Atom::NeConst(a.clone(), c as i64));
                }
                v
            }
            (_, Expr::Var(_)) => self.cmp(op.flip(), r, l),
            _ => {
                let (li, ri) = (self.eval(l), self.eval(r));
                if possibly(op, li, ri) {
                    self.clone()
                } else {
                    AbsValue::bottom()
                }
            }
        }
    }

    /// `a op i` for an interval `i` of possible right-hand values.
    fn constrain(&self, a: &str, op: CmpOp, i: Itv) -> AbsValue {
        if i.is_empty() {
            return AbsValue::bottom();
        }
        let bound = match op {
            CmpOp::Eq => i,
            CmpOp::Ne => Itv::TOP,
            CmpOp::Lt => Itv::new(-INF, i.hi.saturating_sub(1)),
            CmpOp::Le => Itv::new(-INF, i.hi),
            CmpOp::Gt => Itv::new(i.lo.saturating_add(1), INF),
            CmpOp::Ge => Itv::new(i.lo, INF),
        };
        self.clone().with_interval(a, bound)
    }

    /// Weakest pre-condition disjuncts of `x = e` with respect to `self`.
    /// Constraints on `x` are translated for the supported shapes of `e` and
    /// dropped otherwise.
    pub fn pre_assign(&self, x: &str, e: &Expr) -> Vec<AbsValue> {
        if self.bot {
            return Vec::new();
        }
        let ix = self.interval(x);
        let xatoms: Vec<Atom> = self
            .atoms
            .iter()
            .filter(|a| a.mentions(x))
            .cloned()
            .collect();
        let zero = ix.singleton() == Some(0);
        let nonzero = !ix.contains(0) || xatoms.contains(&Atom::NeConst(x.to_string(), 0));
        let mut base = self.clone();
        base.forget(x);
        let finish = |vs: Vec<AbsValue>| -> Vec<AbsValue> {
            let mut vs: Vec<AbsValue> = vs
                .into_iter()
                .map(|mut v| {
                    v.reduce();
                    v
                })
                .filter(|v| !v.bot)
                .collect();
            let mut seen = BTreeSet::new();
            vs.retain(|v| seen.insert(v.clone()));
            vs
        };
        match e {
            Expr::Var(y) if y == x => vec![self.clone()],
            Expr::Int(c) => {
                let c = *c;
                if !ix.contains(c.into()) {
                    return Vec::new();
                }
                let mut v = base;
                for a in &xatoms {
                    v = match a {
                        Atom::NeConst(_, k) if *k == c => return Vec::new(),
                        Atom::NeConst(..) => v,
                        Atom::Eq(p, q) => {
                            let o = if p == x { q } else { p };
                            v.with_interval(o, Itv::constant(c))
                        }
                        Atom::Ne(p, q) => {
                            let o = if p == x { q } else { p };
                            v.with_atom(Atom::NeConst(o.clone(), c))
                        }
                        Atom::Lt(p, q) if p == x => {
                            v.with_interval(q, Itv::new(i128::from(c) + 1, INF))
                        }
                        Atom::Lt(p, _) => v.with_interval(p, Itv::new(-INF, i128::from(c) - 1)),
                        Atom::Le(p, q) if p == x => v.with_interval(q, Itv::new(c.into(), INF)),
                        Atom::Le(p, _) => v.with_interval(p, Itv::new(-INF, c.into())),
                    };
                }
                finish(vec![v])
            }
            Expr::Var(y) => {
                let mut v = base.with_interval(y, ix);
                for a in &xatoms {
                    v = v.with_atom(a.rename(x, y));
                }
                finish(vec![v])
            }
            Expr::Bin(op @ (BinOp::Add | BinOp::Sub), a, b) => match (a.as_ref(), b.as_ref()) {
                (Expr::Var(p), Expr::Var(q)) if *op == BinOp::Sub => {
                    let mut v = base;
                    if p == q {
                        return if ix.contains(0) && !nonzero {
                            finish(vec![v])
                        } else {
                            Vec::new()
                        };
                    }
                    if zero {
                        v = v.with_atom(Atom::eq(p, q));
                    }
                    if nonzero {
                        v = v.with_atom(Atom::ne(p, q));
                    }
                    if ix.lo >= 1 {
                        v = v.with_atom(Atom::Lt(q.clone(), p.clone()));
                    } else if ix.lo >= 0 {
                        v = v.with_atom(Atom::Le(q.clone(), p.clone()));
                    }
                    if ix.hi <= -1 {
                        v = v.with_atom(Atom::Lt(p.clone(), q.clone()));
                    } else if ix.hi <= 0 {
                        v = v.with_atom(Atom::Le(p.clone(), q.clone()));
                    }
                    finish(vec![v])
                }
                (Expr::Var(y), Expr::Int(c)) | (Expr::Int(c), Expr::Var(y))
                    if *op == BinOp::Add || matches!(b.as_ref(), Expr::Int(_)) =>
                {
                    // x = y + k
                    let k: i128 = if *op == BinOp::Add {
                        (*c).into()
                    } else {
                        -i128::from(*c)
                    };
                    let mut v = base.with_interval(y, Itv::new(ix.lo - k, ix.hi - k));
                    for a in &xatoms {
                        if let Atom::NeConst(_, m) = a {
                            if let Ok(m) = i64::try_from(i128::from(*m) - k) {
                                v = v.with_atom(Atom::NeConst(y.clone(), m));
                            }
                        }
                    }
                    finish(vec![v])
                }
                _ => finish(vec![base]),
            },
            Expr::Bin(BinOp::Mul, a, b) => {
                let is_zero = |v: &AbsValue, t: &Expr| -> Option<AbsValue> {
                    match t {
                        Expr::Var(n) => Some(v.clone().with_interval(n, Itv::constant(0))),
                        Expr::Int(0) => Some(v.clone()),
                        Expr::Int(_) => None,
                        _ => Some(v.clone()),
                    }
                };
                let not_zero = |v: &AbsValue, t: &Expr| -> Option<AbsValue> {
                    match t {
                        Expr::Var(n) => Some(v.clone().with_atom(Atom::NeConst(n.clone(), 0))),
                        Expr::Int(0) => None,
                        _ => Some(v.clone()),
                    }
                };
                if zero {
                    let mut vs = Vec::new();
                    vs.extend(is_zero(&base, a));
                    if let Some(v) = not_zero(&base, a) {
                        vs.extend(is_zero(&v, b));
                    }
                    finish(vs)
                } else if nonzero {
                    finish(
                        not_zero(&base, a)
                            .and_then(|v| not_zero(&v, b))
                            .into_iter()
                            .collect(),
                    )
                } else {
                    finish(vec![base])
                }
            }
            _ => finish(vec![base]),
        }
    }
}

fn shave(i: Itv, v: i128) -> Itv {
    if i.lo == v {
        Itv {
            lo: i.lo + 1,
            hi: i.hi,
        }
    } else if i.hi == v {
        Itv {
            lo: i.lo,
            hi: i.hi - 1,
        }
    } else {
        i
    }
}

/// Whether `x op y` can hold for some `x ∈ l`, `y ∈ r`.
fn possibly(op: CmpOp, l: Itv, r: Itv) -> bool {
    if l.is_empty() || r.is_empty() {
        return false;
    }
    match op {
        CmpOp::Eq => !l.meet(r).is_empty(),
        CmpOp::Ne => !(l.singleton().is_some() && l.singleton() == r.singleton()),
        CmpOp::Lt => l.lo < r.hi,
        CmpOp::Le => l.lo <= r.hi,
        CmpOp::Gt => l.hi > r.lo,
        CmpOp::Ge => l.hi >= r.lo,
    }
}

impl fmt::Display for AbsValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bot {
            return f.write_str("false");
        }
        let mut parts: Vec<String> = self
            .itv
            .iter()
            .map(|(v, i)| match i.singleton() {
                Some(c) => format!("{v}={c}"),
                None => format!("{v}∈{i}"),
            })
            .collect();
        parts.extend(self.atoms.iter().map(Atom::to_string));
        if parts.is_empty() {
            f.write_str("true")
        } else {
            f.write_str(&parts.join(", "))
        }
    }
}
