use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use responsibility::abstract_analysis::{AbstractResult, Verdict};
use responsibility::checks::{self, Property, Violation};
use responsibility::report::{abstract_rows, to_json, to_table};
use responsibility::spec::{prepare, run_abstract, run_pipeline, AnalysisSpec};
use responsibility::{
    enumerate_semantics, parse, ObservationEngine, Program, VariantId, DEFAULT_STEP_BOUND,
};

#[derive(Parser)]
#[command(
    name = "responsibility",
    version,
    about = "Responsibility analysis for small imperative programs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum AbstractFormat {
    /// Automaton, marks and a verdict summary.
    Text,
    Json,
    Table,
}

#[derive(Subcommand)]
enum Cmd {
    /// Concrete responsibility for every request of the spec.
    Analyze {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the variant of every request.
        #[arg(long)]
        variant: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Abstract responsibility through a Floyd-Hoare automaton.
    Abstract {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        /// Name of an entry of the spec's `abstract` map.
        #[arg(long)]
        behavior: String,
        /// Target `P_not_b` instead of `P_b`.
        #[arg(long)]
        negate: bool,
        /// Disable the eventuality oracle.
        #[arg(long)]
        no_oracle: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: AbstractFormat,
    },
    /// Lists the maximal traces.
    Semantics {
        #[arg(long)]
        program: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STEP_BOUND)]
        step_bound: usize,
    },
    /// Runs the property suite on the spec's instance and, with `--seed`,
    /// on random programs.
    Check {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Size of the random corpus.
        #[arg(long, default_value_t = 200)]
        programs: usize,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    Input(anyhow::Error),
    Invariant(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<responsibility::Error> for Failure {
    fn from(e: responsibility::Error) -> Self {
        Failure::Input(e.into())
    }
}

fn load_program(path: &Path) -> anyhow::Result<Program> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&src).with_context(|| format!("parsing {}", path.display()))
}

fn load_spec(path: &Path) -> anyhow::Result<AnalysisSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    AnalysisSpec::from_json(&text).with_context(|| format!("in {}", path.display()))
}

fn print_abstract(r: &AbstractResult) {
    let aut = &r.automaton;
    println!("nodes:");
    for n in &aut.nodes {
        println!("  {:<8} {:<10} {}", n.name, n.mark.to_string(), n.invariant);
    }
    println!("edges:");
    for e in &aut.edges {
        println!(
            "  {} -> {}: {}",
            aut.nodes[e.from].name, aut.nodes[e.to].name, e.action
        );
    }
    println!("paths:");
    for p in &r.paths {
        let names: Vec<&str> = p
            .nodes
            .iter()
            .map(|&n| aut.nodes[n].name.as_str())
            .collect();
        let v = match &p.verdict {
            Verdict::Definite(a) => format!("definite: {}", a.display),
            Verdict::Potential(xs) => {
                format!(
                    "potential: {}",
                    xs.iter()
                        .map(|a| a.display.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            }
            Verdict::None => "none".into(),
        };
        println!("  {}  {v}", names.join(" → "));
    }
    let (d, p) = (r.definite(), r.potential());
    if !d.is_empty() {
        println!("definite: {}", d.into_iter().collect::<Vec<_>>().join(", "));
    }
    if !p.is_empty() {
        println!(
            "potential: {{{}}}",
            p.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
}

fn summarize(label: &str, vs: &[Violation]) -> bool {
    let mut bad = false;
    for p in Property::ALL {
        let n = vs.iter().filter(|v| v.property == p).count();
        if n == 0 {
            continue;
        }
        let kind = if p.is_theorem() {
            "violation"
        } else {
            "counterexample"
        };
        println!("{label}: {p}: {n} {kind}(s)");
        if let Some(v) = vs.iter().find(|v| v.property == p) {
            println!("  e.g. {}", v.detail.lines().next().unwrap_or(""));
        }
        bad |= p.is_theorem();
    }
    if !bad {
        println!("{label}: ok");
    }
    bad
}

fn check(program: &Path, spec: &Path, seed: Option<u64>, n: usize) -> Result<(), Failure> {
    let p = load_program(program)?;
    let spec = load_spec(spec)?;
    spec.validate(&p)?;
    let (s, l) = prepare(&p, &spec)?;
    let mut vs = checks::check_galois(&s, &l);
    let mut observers: Vec<String> = spec.requests.iter().map(|r| r.observer.clone()).collect();
    observers.sort();
    observers.dedup();
    for o in &observers {
        let e = ObservationEngine::new(&s, &l, &spec.observer(o).expect("validated"));
        let bs: Vec<_> = spec
            .requests
            .iter()
            .filter(|r| r.observer == *o)
            .filter_map(|r| l.get(&r.behavior).cloned())
            .collect();
        vs.extend(checks::check_instance(&e, &bs));
    }
    for (name, text) in &spec.abstract_specs {
        let (Some(pb), Some(pnb)) = (text.pb.get("exit"), text.pnb.get("exit")) else {
            continue;
        };
        if p.has_division() || !text.t.is_empty() {
            continue;
        }
        let conj = |cs: &[String]| {
            cs.iter()
                .map(|c| format!("({c})"))
                .collect::<Vec<_>>()
                .join(" && ")
        };
        for oracle in [true, false] {
            let c = checks::check_abstract(&p, &conj(pb), &conj(pnb), oracle)?;
            vs.extend(c.violations.into_iter().map(|mut v| {
                v.detail = format!("[{name}] {}", v.detail);
                v
            }));
        }
    }
    let mut bad = summarize("instance", &vs);
    if let Some(seed) = seed {
        let c = checks::run_concrete_corpus(seed, n);
        println!("corpus: {} programs, {} instances", c.programs, c.instances);
        bad |= summarize("corpus", &c.violations);
        let a = checks::run_abstract_corpus(seed, n);
        println!(
            "abstract corpus: {} analyses, {} concrete records, {} definite / {} potential paths",
            a.abstract_instances, a.abstract_records, a.definite_paths, a.potential_paths
        );
        bad |= summarize("abstract corpus", &a.violations);
    }
    if bad {
        Err(Failure::Invariant("property violations found".into()))
    } else {
        Ok(())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Analyze {
            program,
            spec,
            variant,
            format,
        } => {
            let p = load_program(&program)?;
            let spec = load_spec(&spec)?;
            let v = variant.map(|v| v.parse::<VariantId>()).transpose()?;
            let report = run_pipeline(&p, &spec, v)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            match format {
                Format::Json => println!("{}", to_json(&report.rows)),
                Format::Table => print!("{}", to_table(&report.rows)),
            }
        }
        Cmd::Abstract {
            program,
            spec,
            behavior,
            negate,
            no_oracle,
            format,
        } => {
            let p = load_program(&program)?;
            let spec = load_spec(&spec)?;
            let r = run_abstract(&p, &spec, &behavior, negate, !no_oracle)?;
            match format {
                AbstractFormat::Text => print_abstract(&r),
                AbstractFormat::Json => println!("{}", to_json(&abstract_rows(&r, &behavior))),
                AbstractFormat::Table => print!("{}", to_table(&abstract_rows(&r, &behavior))),
            }
        }
        Cmd::Semantics {
            program,
            step_bound,
        } => {
            let p = load_program(&program)?;
            let s = enumerate_semantics(&p, step_bound)?;
            for (i, t) in s.traces.iter().enumerate() {
                let fault = if s.runs[i].faulted { "  (fault)" } else { "" };
                println!("T{}: {t}{fault}", i + 1);
            }
        }
        Cmd::Check {
            program,
            spec,
            seed,
            programs,
        } => check(&program, &spec, seed, programs)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
