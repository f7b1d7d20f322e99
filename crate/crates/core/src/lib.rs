//! Responsibility analysis over event-trace semantics.
//!
//! The concrete layer enumerates the maximal traces of a small imperative
//! program, builds a lattice of behaviours, derives what an observer can
//! conclude from each prefix, and names the event responsible for a
//! behaviour in each trace. The abstract layer ([`abstract_analysis`])
//! approximates the same verdicts with interval/equality invariants and
//! Floyd-Hoare automata.

pub mod abstract_analysis;
pub mod checks;
pub mod gen;
pub mod lattice;
pub mod observation;
pub mod program;
pub mod report;
pub mod responsibility;
pub mod semantics;
pub mod spec;
pub mod trace;
pub mod variants;

pub use lattice::{build_lattice, BehaviorLattice, MaximalProperty, Predicate, PredictionProperty};
pub use observation::{CognizanceSpec, ObservationEngine};
pub use program::{enumerate_semantics, parse, Program, DEFAULT_STEP_BOUND};
pub use responsibility::{analyze, ResponsibilityRecord};
pub use semantics::{MaximalSemantics, NodeId};
pub use trace::{Event, EventKind, Point, Trace, TraceSet};
pub use variants::{variant_analyze, Sextuple, VariantId};

use thiserror::Error as ThisError;

#[derive(Debug, ThisError, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("input source `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("an execution exceeded the step bound of {0} events")]
    StepBoundExceeded(usize),
    #[error("evaluation error at {point}: {msg}")]
    Evaluation { point: Point, msg: String },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("not a lattice: {0}")]
    NotALattice(String),
    #[error("the maximal trace semantics is empty")]
    EmptySemantics,
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
    #[error("strengthened specification is empty: {0}")]
    EmptySpec(String),
    #[error("spec error: {0}")]
    Spec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
