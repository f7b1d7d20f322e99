//! Shared fixtures for the benchmarks.

use responsibility::spec::AnalysisSpec;
use responsibility::{parse, Program};

/// A bundled program and its spec from `programs/`.
pub fn bundled(name: &str) -> (Program, AnalysisSpec) {
    let dir = format!("{}/../../programs", env!("CARGO_MANIFEST_DIR"));
    let src = std::fs::read_to_string(format!("{dir}/{name}.prog")).expect("bundled program");
    let spec = std::fs::read_to_string(format!("{dir}/{name}.json")).expect("bundled spec");
    (
        parse(&src).expect("parses"),
        AnalysisSpec::from_json(&spec).expect("valid spec"),
    )
}
