//! Analysis spec files (JSON) and the concrete pipeline they drive.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::abstract_analysis::{
    analyze_abstract, AbstractOptions, AbstractResult, AbstractSpecText, Mark, UserSpec,
};
use crate::lattice::{build_lattice, BehaviorLattice, Predicate};
use crate::observation::{CognizanceSpec, ObservationEngine};
use crate::program::{enumerate_semantics, Program, DEFAULT_STEP_BOUND};
use crate::report::ReportRow;
use crate::semantics::MaximalSemantics;
use crate::variants::{variant_analyze, VariantId};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorSpec {
    pub name: String,
    pub predicate: Predicate,
}

fn omniscient() -> String {
    "omniscient".into()
}

fn simple() -> String {
    "simple".into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisRequest {
    pub behavior: String,
    #[serde(default = "omniscient")]
    pub observer: String,
    /// Analysed traces; all of `S^M` by default.
    #[serde(default = "all")]
    pub traces: Predicate,
    #[serde(default = "simple")]
    pub variant: String,
}

fn all() -> Predicate {
    Predicate::All
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecOptions {
    pub step_bound: Option<usize>,
    pub unroll_k: Option<usize>,
    #[serde(default)]
    pub powerset_lattice: bool,
}

impl SpecOptions {
    pub fn step_bound(&self) -> usize {
        self.step_bound.unwrap_or(DEFAULT_STEP_BOUND)
    }

    pub fn unroll_k(&self) -> usize {
        self.unroll_k.unwrap_or(3)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisSpec {
    pub behaviors: Vec<BehaviorSpec>,
    #[serde(default)]
    pub observers: Vec<CognizanceSpec>,
    #[serde(default)]
    pub requests: Vec<AnalysisRequest>,
    /// Abstract behaviour specs keyed by name.
    #[serde(default, rename = "abstract")]
    pub abstract_specs: BTreeMap<String, AbstractSpecText>,
    #[serde(default)]
    pub options: SpecOptions,
}

impl AnalysisSpec {
    pub fn from_json(text: &str) -> Result<AnalysisSpec, Error> {
        serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))
    }

    /// Observer by name; `omniscient` exists unless redefined.
    pub fn observer(&self, name: &str) -> Option<CognizanceSpec> {
        match self.observers.iter().find(|o| o.observer == name) {
            Some(o) => Some(o.clone()),
            None if name == "omniscient" => Some(CognizanceSpec::omniscient()),
            None => None,
        }
    }

    /// Checks that names resolve and that there is something to do.
    pub fn validate(&self, p: &Program) -> Result<(), Error> {
        if self.requests.is_empty() {
            return Err(Error::Spec("the spec has no requests".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for b in &self.behaviors {
            if !seen.insert(&b.name) {
                return Err(Error::Spec(format!(
                    "behaviour `{}` is defined twice",
                    b.name
                )));
            }
        }
        for o in &self.observers {
            o.validate(p)?;
        }
        for r in &self.requests {
            if !seen.contains(&r.behavior) {
                return Err(Error::UnknownName(r.behavior.clone()));
            }
            if self.observer(&r.observer).is_none() {
                return Err(Error::UnknownName(r.observer.clone()));
            }
            r.variant.parse::<VariantId>()?;
        }
        for text in self.abstract_specs.values() {
            UserSpec::from_text(p, text)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub warnings: Vec<String>,
    pub rows: Vec<ReportRow>,
}

/// The enumerated semantics and behaviour lattice of a spec.
pub fn prepare(
    p: &Program,
    spec: &AnalysisSpec,
) -> Result<(MaximalSemantics, BehaviorLattice), Error> {
    let s = enumerate_semantics(p, spec.options.step_bound())?;
    let named = spec
        .behaviors
        .iter()
        .map(|b| Ok((b.name.clone(), b.predicate.eval(&s)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let l = build_lattice(&s, named, spec.options.powerset_lattice)?;
    Ok((s, l))
}

/// Runs every request, in spec order; `variant` overrides the requests' own.
pub fn run_pipeline(
    p: &Program,
    spec: &AnalysisSpec,
    variant: Option<VariantId>,
) -> Result<Report, Error> {
    spec.validate(p)?;
    let (s, l) = prepare(p, spec)?;
    let mut report = Report {
        warnings: l.warnings.clone(),
        rows: Vec::new(),
    };
    let mut engines: BTreeMap<String, ObservationEngine> = BTreeMap::new();
    for r in &spec.requests {
        let v = match variant {
            Some(v) => v,
            None => r.variant.parse()?,
        };
        let e = engines.entry(r.observer.clone()).or_insert_with(|| {
            ObservationEngine::new(&s, &l, &spec.observer(&r.observer).expect("validated"))
        });
        let b = l
            .get(&r.behavior)
            .ok_or_else(|| Error::UnknownName(r.behavior.clone()))?;
        let t = r.traces.eval(&s)?;
        let label = v.to_string();
        for x in variant_analyze(e, b, &t, v) {
            report.rows.push(ReportRow::concrete(
                &s,
                &x,
                &r.observer,
                &label,
                v.is_sextuple(),
            ));
        }
    }
    Ok(report)
}

/// Runs the abstract analysis for the named abstract spec; `negated` targets
/// `P_¬b` instead of `P_b`.
pub fn run_abstract(
    p: &Program,
    spec: &AnalysisSpec,
    behavior: &str,
    negated: bool,
    oracle: bool,
) -> Result<AbstractResult, Error> {
    let text = spec
        .abstract_specs
        .get(behavior)
        .ok_or_else(|| Error::UnknownName(behavior.to_string()))?;
    let user = UserSpec::from_text(p, text)?;
    let opts = AbstractOptions {
        unroll_k: spec.options.unroll_k(),
        oracle,
        step_bound: spec.options.step_bound(),
    };
    analyze_abstract(p, &user, if negated { Mark::PnotB } else { Mark::Pb }, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse;

    const SPEC: &str = r#"{
        "behaviors": [{"name": "one", "predicate": {"kind": "final", "expr": "x == 1"}}],
        "requests": [{"behavior": "one"}]
    }"#;

    #[test]
    fn defaults_fill_in() {
        let s = AnalysisSpec::from_json(SPEC).unwrap();
        assert_eq!(s.requests[0].observer, "omniscient");
        assert_eq!(s.requests[0].variant, "simple");
        assert_eq!(s.requests[0].traces, Predicate::All);
    }

    #[test]
    fn pipeline_blames_the_input() {
        let p = parse("x = input a in {0,1};").unwrap();
        let r = run_pipeline(&p, &AnalysisSpec::from_json(SPEC).unwrap(), None).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].r_event, "x=1");
    }

    #[test]
    fn unknown_names_are_rejected() {
        let p = parse("x = input a in {0,1};").unwrap();
        let mut s = AnalysisSpec::from_json(SPEC).unwrap();
        s.requests[0].observer = "nobody".into();
        assert_eq!(s.validate(&p), Err(Error::UnknownName("nobody".into())));
        s.requests.clear();
        assert!(matches!(s.validate(&p), Err(Error::Spec(_))));
    }
}
