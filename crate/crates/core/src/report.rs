//! Report rows and their JSON / table renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::abstract_analysis::{AbstractResult, Mark, Verdict};
use crate::semantics::MaximalSemantics;
use crate::variants::Sextuple;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Responsible,
    Definite,
    Potential,
}

impl Classification {
    fn as_str(self) -> &'static str {
        match self {
            Classification::Responsible => "responsible",
            Classification::Definite => "definite",
            Classification::Potential => "potential",
        }
    }
}

/// One verdict. For concrete rows `trace` is the analysed trace and
/// `r_index` the position of `R` in it (`= h_len`); for abstract rows
/// `trace` lists the actions of an automaton path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub observer: String,
    pub behavior: String,
    pub variant: String,
    pub trace: Vec<String>,
    pub r_index: usize,
    pub r_event: String,
    pub h_len: usize,
    pub classification: Classification,
    /// Reference trace `H̄RF̄` of six-component variants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_trace: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_r_index: Option<usize>,
}

impl ReportRow {
    pub fn concrete(
        s: &MaximalSemantics,
        x: &Sextuple,
        observer: &str,
        variant: &str,
        with_ref: bool,
    ) -> ReportRow {
        ReportRow {
            observer: observer.to_string(),
            behavior: x.behavior.clone(),
            variant: variant.to_string(),
            trace: s.traces[x.trace_index].displays(),
            r_index: x.pos,
            r_event: x.responsible(s).to_string(),
            h_len: x.pos,
            classification: Classification::Responsible,
            ref_trace: with_ref.then(|| s.traces[x.ref_index].displays()),
            ref_r_index: with_ref.then_some(x.ref_pos),
        }
    }
}

/// Rows of an abstract result: one per definite action and one per action
/// of each potential set, path by path.
pub fn abstract_rows(r: &AbstractResult, behavior: &str) -> Vec<ReportRow> {
    let behavior = match r.target {
        Mark::PnotB => format!("¬{behavior}"),
        _ => behavior.to_string(),
    };
    let mut rows = Vec::new();
    for p in &r.paths {
        let trace = r.path_actions(p);
        let (class, actions) = match &p.verdict {
            Verdict::Definite(a) => (Classification::Definite, vec![a.clone()]),
            Verdict::Potential(v) => (Classification::Potential, v.clone()),
            Verdict::None => continue,
        };
        let mut actions = actions;
        actions.sort();
        for a in actions {
            rows.push(ReportRow {
                observer: "omniscient".into(),
                behavior: behavior.clone(),
                variant: "abstract".into(),
                trace: trace.clone(),
                r_index: a.step,
                r_event: a.display,
                h_len: a.step,
                classification: class,
                ref_trace: None,
                ref_r_index: None,
            });
        }
    }
    rows
}

pub fn to_json(rows: &[ReportRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}

pub fn from_json(text: &str) -> Result<Vec<ReportRow>, serde_json::Error> {
    serde_json::from_str(text)
}

/// Aligned columns; traces joined with ` ▷ `.
pub fn to_table(rows: &[ReportRow]) -> String {
    let header = [
        "observer",
        "behavior",
        "variant",
        "class",
        "R",
        "|H|",
        "trace",
        "reference",
    ];
    let cells: Vec<[String; 8]> = rows
        .iter()
        .map(|r| {
            [
                r.observer.clone(),
                r.behavior.clone(),
                r.variant.clone(),
                r.classification.as_str().to_string(),
                r.r_event.clone(),
                r.h_len.to_string(),
                join(&r.trace),
                r.ref_trace.as_deref().map(join).unwrap_or_default(),
            ]
        })
        .collect();
    let mut width = header.map(|h| h.chars().count());
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cols: Vec<&str>| {
        let mut l = String::new();
        for (i, (c, w)) in cols.iter().zip(width).enumerate() {
            if i > 0 {
                l.push_str("  ");
            }
            l.push_str(c);
            if i + 1 < cols.len() {
                l.extend(std::iter::repeat(' ').take(w - c.chars().count()));
            }
        }
        let _ = writeln!(out, "{}", l.trim_end());
    };
    line(header.to_vec());
    for row in &cells {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

fn join(t: &[String]) -> String {
    if t.is_empty() {
        "ε".into()
    } else {
        t.join(crate::trace::SEPARATOR)
    }
}
