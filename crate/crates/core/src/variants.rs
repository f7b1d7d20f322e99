//! Refined responsibility: counterfactual filters and the six-component
//! records `⟨H, R, F, B, H̄, F̄⟩` relating an analysed trace `HRF` to a
//! reference trace `H̄RF̄` in which `R` newly guarantees `B`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::lattice::Members;
use crate::observation::ObservationEngine;
use crate::responsibility::{analyze_with, ResponsibilityRecord};
use crate::semantics::{MaximalSemantics, NodeId};
use crate::trace::{Event, Trace};
use crate::Error;

/// A six-component record, stored by position: `HRF` is trace
/// `trace_index` with `R` at `pos`; `H̄RF̄` is trace `ref_index` with `R` at
/// `ref_pos`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Sextuple {
    pub trace_index: usize,
    pub pos: usize,
    pub ref_index: usize,
    pub ref_pos: usize,
    pub behavior: String,
}

impl Sextuple {
    pub fn history(&self, s: &MaximalSemantics) -> Trace {
        s.traces[self.trace_index].prefix(self.pos)
    }

    pub fn responsible<'s>(&self, s: &'s MaximalSemantics) -> &'s Event {
        &s.traces[self.trace_index].events()[self.pos]
    }

    pub fn future(&self, s: &MaximalSemantics) -> Trace {
        s.traces[self.trace_index].suffix(self.pos + 1)
    }

    pub fn ref_history(&self, s: &MaximalSemantics) -> Trace {
        s.traces[self.ref_index].prefix(self.ref_pos)
    }

    pub fn ref_future(&self, s: &MaximalSemantics) -> Trace {
        s.traces[self.ref_index].suffix(self.ref_pos + 1)
    }

    /// `⟨H, R, F, B, H̄, F̄⟩` with traces rendered.
    pub fn render(&self, s: &MaximalSemantics) -> String {
        format!(
            "⟨{}, {}, {}, {}, {}, {}⟩",
            self.history(s),
            self.responsible(s),
            self.future(s),
            self.behavior,
            self.ref_history(s),
            self.ref_future(s)
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    Plain,
    Counterfactual,
    StrictlyCounterfactual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    /// No constraint between `H`/`F` and `H̄`/`F̄`.
    Top,
    /// `H = H̄`.
    HistoryOnly,
    /// `F = F̄`.
    FutureOnly,
    /// `H = H̄` and `F = F̄`.
    Bottom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VariantId {
    /// The basic abstraction `∅ ⊊ O(HR) ⊆ B ⊊ O(H)`.
    Simple,
    /// `α^C` / `α^SC` as four-component records (bottom shape, projected).
    Projected(Base),
    Shaped(Base, Shape),
    Pearl,
}

impl VariantId {
    pub const ALL: [&'static str; 16] = [
        "simple", "C", "SC", "top", "H", "F", "bot", "C-top", "C-H", "C-F", "C-bot", "SC-top",
        "SC-H", "SC-F", "SC-bot", "pearl",
    ];

    /// Whether rows carry a reference history/future.
    pub fn is_sextuple(self) -> bool {
        matches!(self, VariantId::Shaped(..) | VariantId::Pearl)
    }
}

impl FromStr for VariantId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let shape = |t: &str| match t {
            "top" => Some(Shape::Top),
            "H" => Some(Shape::HistoryOnly),
            "F" => Some(Shape::FutureOnly),
            "bot" => Some(Shape::Bottom),
            _ => None,
        };
        let v = match s {
            "simple" => VariantId::Simple,
            "C" => VariantId::Projected(Base::Counterfactual),
            "SC" => VariantId::Projected(Base::StrictlyCounterfactual),
            "pearl" => VariantId::Pearl,
            _ => {
                let (base, rest) = if let Some(r) = s.strip_prefix("SC-") {
                    (Base::StrictlyCounterfactual, r)
                } else if let Some(r) = s.strip_prefix("C-") {
                    (Base::Counterfactual, r)
                } else {
                    (Base::Plain, s)
                };
                VariantId::Shaped(
                    base,
                    shape(rest).ok_or_else(|| Error::UnknownVariant(s.to_string()))?,
                )
            }
        };
        Ok(v)
    }
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = |b: Base| match b {
            Base::Plain => "",
            Base::Counterfactual => "C",
            Base::StrictlyCounterfactual => "SC",
        };
        match self {
            VariantId::Simple => f.write_str("simple"),
            VariantId::Pearl => f.write_str("pearl"),
            VariantId::Projected(b) => f.write_str(base(*b)),
            VariantId::Shaped(b, sh) => {
                let sh = match sh {
                    Shape::Top => "top",
                    Shape::HistoryOnly => "H",
                    Shape::FutureOnly => "F",
                    Shape::Bottom => "bot",
                };
                match b {
                    Base::Plain => f.write_str(sh),
                    _ => write!(f, "{}-{sh}", base(*b)),
                }
            }
        }
    }
}

/// `O(H̄R) ⊆ B`, `O(H̄) ⊄ B` and `O(H̄R) ≠ ∅`, on prefix nodes.
pub fn guarantees_newly_node(e: &ObservationEngine, h: NodeId, hr: NodeId, b: &Members) -> bool {
    let (oh, ohr) = (e.observation_node(h), e.observation_node(hr));
    !ohr.is_clear() && ohr.is_subset(b) && !oh.is_subset(b)
}

pub fn guarantees_newly(
    e: &ObservationEngine,
    h: &Trace,
    r: &Event,
    b: &Members,
) -> Result<bool, Error> {
    let s = e.semantics();
    let invalid = || {
        let mut t = h.clone();
        t.push(r.clone());
        Error::InvalidTrace(t.to_string())
    };
    let hn = s.lookup(h).ok_or_else(invalid)?;
    let hr = s
        .children(hn)
        .iter()
        .copied()
        .find(|&c| s.event(c) == Some(r))
        .ok_or_else(invalid)?;
    Ok(guarantees_newly_node(e, hn, hr, b))
}

/// Reference witnesses `(j, q)`: `R` at position `q` of trace `j` newly
/// guarantees `b`.
fn witnesses(e: &ObservationEngine, b: &Members) -> Vec<(usize, usize)> {
    let s = e.semantics();
    let mut w = Vec::new();
    for j in 0..s.len() {
        let path = s.path(j);
        for q in 0..s.traces[j].len() {
            if guarantees_newly_node(e, path[q], path[q + 1], b) {
                w.push((j, q));
            }
        }
    }
    w
}

/// Split indices `m` (`F′ = F̄[..m]`) for which some `R′ ≠ R` makes
/// `H̄R′F′` valid with an observation below an element incomparable with `b`.
fn counterfactual_splits(
    e: &ObservationEngine,
    j: usize,
    q: usize,
    b: &Members,
    strict: bool,
) -> Vec<usize> {
    let s = e.semantics();
    let l = e.lattice();
    let path = s.path(j);
    let (h, r) = (path[q], path[q + 1]);
    let fbar = &s.traces[j].events()[q + 1..];
    let mut ok = BTreeSet::new();
    for &alt in s.children(h) {
        if alt == r {
            continue;
        }
        let mut cur = Some(alt);
        for m in 0..=fbar.len() {
            let Some(u) = cur else { break };
            if l.exists_incomparable_above(e.observation_node(u), b) {
                ok.insert(m);
            }
            if strict || m == fbar.len() {
                break;
            }
            cur = s
                .children(u)
                .iter()
                .copied()
                .find(|&c| s.event(c) == Some(&fbar[m]));
        }
    }
    ok.into_iter().collect()
}

fn filter(records: &[Sextuple], e: &ObservationEngine, b: &Members, strict: bool) -> Vec<Sextuple> {
    let mut memo: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    records
        .iter()
        .filter(|x| {
            *memo.entry((x.ref_index, x.ref_pos)).or_insert_with(|| {
                !counterfactual_splits(e, x.ref_index, x.ref_pos, b, strict).is_empty()
            })
        })
        .cloned()
        .collect()
}

/// Keeps records whose reference admits an alternative `R′` and a split
/// `F̄ = F′F″` such that `H̄R′F′` guarantees some `B′` incomparable with `b`.
pub fn counterfactual_filter(
    records: &[Sextuple],
    e: &ObservationEngine,
    b: &Members,
) -> Vec<Sextuple> {
    filter(records, e, b, false)
}

/// As [`counterfactual_filter`] with `F′ = ε`.
pub fn strictly_counterfactual_filter(
    records: &[Sextuple],
    e: &ObservationEngine,
    b: &Members,
) -> Vec<Sextuple> {
    filter(records, e, b, true)
}

/// Keeps sextuples with `H = H̄`.
pub fn history_filter(records: &[Sextuple], s: &MaximalSemantics) -> Vec<Sextuple> {
    records
        .iter()
        .filter(|x| {
            x.pos == x.ref_pos && s.path(x.trace_index)[x.pos] == s.path(x.ref_index)[x.ref_pos]
        })
        .cloned()
        .collect()
}

/// Keeps sextuples with `F = F̄`.
pub fn future_filter(records: &[Sextuple], s: &MaximalSemantics) -> Vec<Sextuple> {
    records
        .iter()
        .filter(|x| {
            s.traces[x.trace_index].events()[x.pos + 1..]
                == s.traces[x.ref_index].events()[x.ref_pos + 1..]
        })
        .cloned()
        .collect()
}

/// The top-shape set: every witness paired with every analysed trace that
/// contains its `R` at any position.
fn top_records(e: &ObservationEngine, b: &Members, t: &FixedBitSet, name: &str) -> Vec<Sextuple> {
    let s = e.semantics();
    let mut by_event: BTreeMap<&Event, Vec<(usize, usize)>> = BTreeMap::new();
    for (j, q) in witnesses(e, b) {
        by_event
            .entry(&s.traces[j].events()[q])
            .or_default()
            .push((j, q));
    }
    let mut out = Vec::new();
    for i in t.ones() {
        for (p, ev) in s.traces[i].iter().enumerate() {
            for &(j, q) in by_event.get(ev).map(Vec::as_slice).unwrap_or(&[]) {
                out.push(Sextuple {
                    trace_index: i,
                    pos: p,
                    ref_index: j,
                    ref_pos: q,
                    behavior: name.to_string(),
                });
            }
        }
    }
    out
}

fn shaped(
    e: &ObservationEngine,
    b: &Members,
    t: &FixedBitSet,
    name: &str,
    shape: Shape,
) -> Vec<Sextuple> {
    let s = e.semantics();
    match shape {
        Shape::Top => top_records(e, b, t, name),
        Shape::HistoryOnly => history_filter(&top_records(e, b, t, name), s),
        Shape::FutureOnly => future_filter(&top_records(e, b, t, name), s),
        // H = H̄ and F = F̄ force the same trace, so only the diagonal remains.
        Shape::Bottom => witnesses(e, b)
            .into_iter()
            .filter(|&(j, _)| t.contains(j))
            .map(|(j, q)| Sextuple {
                trace_index: j,
                pos: q,
                ref_index: j,
                ref_pos: q,
                behavior: name.to_string(),
            })
            .collect(),
    }
}

fn pearl(e: &ObservationEngine, b: &Members, t: &FixedBitSet, name: &str) -> Vec<Sextuple> {
    let s = e.semantics();
    let mut splits: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    top_records(e, b, t, name)
        .into_iter()
        .filter(|x| {
            let ms = splits
                .entry((x.ref_index, x.ref_pos))
                .or_insert_with(|| counterfactual_splits(e, x.ref_index, x.ref_pos, b, false));
            let f = &s.traces[x.trace_index].events()[x.pos + 1..];
            let fbar = &s.traces[x.ref_index].events()[x.ref_pos + 1..];
            // F = F‴F″ where F″ = F̄[m..].
            ms.iter().any(|&m| f.ends_with(&fbar[m..]))
        })
        .collect()
}

/// Runs one variant for behaviour `b` over the analysed traces `t`. The
/// basic abstraction is returned as diagonal sextuples (`H̄ = H`, `F̄ = F`).
pub fn variant_analyze(
    e: &ObservationEngine,
    b: &Members,
    t: &FixedBitSet,
    v: VariantId,
) -> Vec<Sextuple> {
    let name = e.lattice().name_of(b);
    let mut out = match v {
        VariantId::Simple => analyze_with(e, b, t)
            .into_iter()
            .map(|r| Sextuple {
                trace_index: r.trace_index,
                pos: r.position(),
                ref_index: r.trace_index,
                ref_pos: r.position(),
                behavior: name.clone(),
            })
            .collect(),
        VariantId::Projected(base) => {
            return variant_analyze(e, b, t, VariantId::Shaped(base, Shape::Bottom))
        }
        VariantId::Shaped(base, shape) => {
            let base_set = shaped(e, b, t, &name, shape);
            match base {
                Base::Plain => base_set,
                Base::Counterfactual => counterfactual_filter(&base_set, e, b),
                Base::StrictlyCounterfactual => strictly_counterfactual_filter(&base_set, e, b),
            }
        }
        VariantId::Pearl => pearl(e, b, t, &name),
    };
    out.sort();
    out.dedup();
    out
}

/// `ᾱ`: forget `H̄` and `F̄`, as `(trace index, position)` pairs.
pub fn project(records: &[Sextuple]) -> BTreeSet<(usize, usize)> {
    records.iter().map(|x| (x.trace_index, x.pos)).collect()
}

/// `ᾱ` as records.
pub fn to_four_tuple(
    records: &[Sextuple],
    s: &MaximalSemantics,
    observer: &str,
) -> Vec<ResponsibilityRecord> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for x in records {
        if seen.insert((x.trace_index, x.pos, x.behavior.clone())) {
            out.push(ResponsibilityRecord::at(
                s,
                x.trace_index,
                x.pos,
                &x.behavior,
                observer,
            ));
        }
    }
    out.sort_by_key(|r| (r.trace_index, r.position()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_tokens_round_trip() {
        for tok in VariantId::ALL {
            let v: VariantId = tok.parse().unwrap();
            assert_eq!(v.to_string(), tok);
        }
        assert!(matches!(
            "X-top".parse::<VariantId>(),
            Err(Error::UnknownVariant(_))
        ));
        assert!("C-".parse::<VariantId>().is_err());
    }
}
