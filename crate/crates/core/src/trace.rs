//! Events, traces, prefix ordering and prefix closure.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Separator used when rendering traces.
pub const SEPARATOR: &str = " ▷ ";

/// A program-point label `ℓn`. Points are numbered in pre-order from 1; the
/// exit point is one past the last statement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Point(pub u32);

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ℓ{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    /// `var = expr` evaluated to `value`.
    Assign {
        var: String,
        expr: String,
        value: i64,
    },
    /// A boolean test that held.
    TestTrue { cond: String },
    /// A boolean test that failed.
    TestFalse { cond: String },
    /// `var = input source` choosing `value`.
    Input {
        var: String,
        source: String,
        value: i64,
    },
    /// Division by zero; the trace ends here. `text` is the offending
    /// computation with operands substituted, e.g. `H=1/0`.
    Fault { text: String },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Event {
    pub point: Point,
    pub kind: EventKind,
}

impl Event {
    pub fn new(point: Point, kind: EventKind) -> Self {
        Event { point, kind }
    }

    pub fn is_input(&self) -> bool {
        matches!(self.kind, EventKind::Input { .. })
    }

    /// Canonical text form, e.g. `apv=1`, `¬(i1==0)`.
    pub fn display(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            EventKind::Assign { var, value, .. } | EventKind::Input { var, value, .. } => {
                write!(f, "{var}={value}")
            }
            EventKind::TestTrue { cond } => f.write_str(cond),
            EventKind::TestFalse { cond } => write!(f, "¬({cond})"),
            EventKind::Fault { text } => f.write_str(text),
        }
    }
}

/// A finite sequence of events.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Trace(Vec<Event>);

impl Trace {
    pub fn empty() -> Self {
        Trace(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn events(&self) -> &[Event] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Event> {
        self.0.iter()
    }

    pub fn push(&mut self, e: Event) {
        self.0.push(e);
    }

    pub fn last(&self) -> Option<&Event> {
        self.0.last()
    }

    /// The first `n` events (clamped).
    pub fn prefix(&self, n: usize) -> Trace {
        Trace(self.0[..n.min(self.0.len())].to_vec())
    }

    /// Events from index `n` on (clamped).
    pub fn suffix(&self, n: usize) -> Trace {
        Trace(self.0[n.min(self.0.len())..].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Trace) -> bool {
        is_prefix(self, other)
    }

    /// Event displays, in order.
    pub fn displays(&self) -> Vec<String> {
        self.0.iter().map(Event::to_string).collect()
    }
}

impl From<Vec<Event>> for Trace {
    fn from(v: Vec<Event>) -> Self {
        Trace(v)
    }
}

impl FromIterator<Event> for Trace {
    fn from_iter<I: IntoIterator<Item = Event>>(iter: I) -> Self {
        Trace(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Trace {
    type Item = &'a Event;
    type IntoIter = std::slice::Iter<'a, Event>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(SEPARATOR)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// A finite set of traces.
pub type TraceSet = BTreeSet<Trace>;

pub fn concat(a: &Trace, b: &Trace) -> Trace {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(&a.0);
    v.extend_from_slice(&b.0);
    Trace(v)
}

/// `a ⪯ b`.
pub fn is_prefix(a: &Trace, b: &Trace) -> bool {
    a.len() <= b.len() && a.0.iter().zip(&b.0).all(|(x, y)| x == y)
}

/// Every prefix of every trace in `p`.
pub fn prefixes(p: &TraceSet) -> TraceSet {
    let mut out = TraceSet::new();
    for t in p {
        for n in 0..=t.len() {
            out.insert(t.prefix(n));
        }
    }
    out
}
