//! Property checks over one analysis instance and over random corpora.

use std::collections::BTreeSet;
use std::fmt;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abstract_analysis::{
    analyze_abstract, AbstractOptions, AbstractResult, AbstractSpecText, Mark, Oracle, UserSpec,
    Verdict,
};
use crate::gen::{corpus, exit_split, GenConfig};
use crate::lattice::{build_lattice, prediction_abstraction, prediction_concretization, Members};
use crate::observation::{CognizanceSpec, ObservationEngine};
use crate::program::{enumerate_semantics, Program, DEFAULT_STEP_BOUND};
use crate::responsibility::analyze_with;
use crate::semantics::MaximalSemantics;
use crate::variants::{
    counterfactual_filter, project, strictly_counterfactual_filter, variant_analyze, Sextuple,
    VariantId,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    /// At most one responsible event per trace.
    Uniqueness,
    /// The basic abstraction is contained in the projected bottom variant.
    SimpleInBottom,
    /// `α^SC ⊆ α^C ⊆ α_R` after projection.
    CounterfactualChain,
    /// Counterfactual filters are idempotent.
    FilterIdempotent,
    /// `α⊥ = αH ∩ αF`.
    BottomIsMeet,
    /// `α⊤ = αH ∪ αF`; not a theorem, reported for information.
    TopIsJoin,
    /// `α^{C-F} ⊆ α^{Pearl}`.
    CounterfactualFutureInPearl,
    InquiryMonotone,
    ObservationMonotone,
    /// `I(σ) = ⋁ I(σe)` over the valid one-event extensions.
    InquiryOneStep,
    /// The same for observations; fails when a hidden fault ends a run
    /// early, holds on division-free programs.
    ObservationOneStep,
    /// `γ(α(P)) = P` for every lattice element.
    Galois,
    /// Concrete responsibility is covered by the abstract verdicts.
    AbstractCoverage,
    /// A definite action is concretely responsible on some run of its path.
    DefiniteRealized,
}

impl Property {
    pub const ALL: [Property; 14] = [
        Property::Uniqueness,
        Property::SimpleInBottom,
        Property::CounterfactualChain,
        Property::FilterIdempotent,
        Property::BottomIsMeet,
        Property::TopIsJoin,
        Property::CounterfactualFutureInPearl,
        Property::InquiryMonotone,
        Property::ObservationMonotone,
        Property::InquiryOneStep,
        Property::ObservationOneStep,
        Property::Galois,
        Property::AbstractCoverage,
        Property::DefiniteRealized,
    ];

    /// Whether a violation indicates a bug rather than a known
    /// counterexample to the stated identity.
    pub fn is_theorem(self) -> bool {
        !matches!(self, Property::TopIsJoin | Property::ObservationOneStep)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub property: Property,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.property, self.detail)
    }
}

fn sextuples(e: &ObservationEngine, b: &Members, t: &FixedBitSet, v: &str) -> BTreeSet<Sextuple> {
    variant_analyze(e, b, t, v.parse::<VariantId>().expect("known token"))
        .into_iter()
        .collect()
}

/// Checks on every valid prefix: inquiry and observation only
/// shrink along extensions, and equal the join over one-event extensions.
pub fn check_prefixes(e: &ObservationEngine) -> Vec<Violation> {
    let s = e.semantics();
    let l = e.lattice();
    let mut out = Vec::new();
    let name = |m: &Members| l.name_of(m);
    for id in s.node_ids() {
        let kids = s.children(id);
        for &c in kids {
            for (prop, f) in [
                (
                    Property::InquiryMonotone,
                    e.inquiry_node(c).is_subset(e.inquiry_node(id)),
                ),
                (
                    Property::ObservationMonotone,
                    e.observation_node(c).is_subset(e.observation_node(id)),
                ),
            ] {
                if !f {
                    out.push(Violation {
                        property: prop,
                        detail: format!(
                            "`{}` ⋠ `{}` [{}]",
                            s.trace_of(c),
                            s.trace_of(id),
                            e.spec().observer
                        ),
                    });
                }
            }
        }
        if kids.is_empty() {
            continue;
        }
        let get = |obs: bool, n: usize| {
            if obs {
                e.observation_node(n)
            } else {
                e.inquiry_node(n)
            }
        };
        for (prop, obs) in [
            (Property::InquiryOneStep, false),
            (Property::ObservationOneStep, true),
        ] {
            let j = kids
                .iter()
                .fold(l.bottom(), |acc, &c| l.join(&acc, get(obs, c)));
            if j != *get(obs, id) {
                out.push(Violation {
                    property: prop,
                    detail: format!(
                        "at `{}` [{}]: {} ≠ ⋁ = {}",
                        s.trace_of(id),
                        e.spec().observer,
                        name(get(obs, id)),
                        name(&j)
                    ),
                });
            }
        }
    }
    out
}

/// `γ(α(P)) = P` for the lattice's explicit elements (or its named
/// behaviours in powerset mode).
pub fn check_galois(s: &MaximalSemantics, l: &crate::lattice::BehaviorLattice) -> Vec<Violation> {
    let props: Vec<crate::lattice::MaximalProperty> = match l.elements() {
        Some(es) => es.to_vec(),
        None => l
            .named()
            .map(|(n, m)| crate::lattice::MaximalProperty {
                name: n.clone(),
                members: m.clone(),
            })
            .collect(),
    };
    props
        .into_iter()
        .filter(|p| {
            prediction_concretization(s, &prediction_abstraction(s, p)).members != p.members
        })
        .map(|p| Violation {
            property: Property::Galois,
            detail: format!("γ(α({})) ≠ {}", p.name, p.name),
        })
        .collect()
}

/// Variant-algebra checks for behaviour `b` over all traces.
pub fn check_variants(e: &ObservationEngine, b: &Members) -> Vec<Violation> {
    let s = e.semantics();
    let t = s.universe();
    let bname = e.lattice().name_of(b);
    let ctx = || format!("B={bname} [{}]", e.spec().observer);
    let mut out = Vec::new();
    let mut v = |property, ok: bool, what: String| {
        if !ok {
            out.push(Violation {
                property,
                detail: format!("{what} for {}", ctx()),
            });
        }
    };

    let simple = analyze_with(e, b, &t);
    let mut per_trace = BTreeSet::new();
    let dup = simple.iter().find(|r| !per_trace.insert(r.trace_index));
    v(
        Property::Uniqueness,
        dup.is_none(),
        format!("two records in trace {:?}", dup.map(|r| r.trace_index)),
    );

    let bot = sextuples(e, b, &t, "bot");
    let pb: BTreeSet<(usize, usize)> = project(&bot.iter().cloned().collect::<Vec<_>>());
    let ps: BTreeSet<(usize, usize)> = simple
        .iter()
        .map(|r| (r.trace_index, r.position()))
        .collect();
    v(
        Property::SimpleInBottom,
        ps.is_subset(&pb),
        "basic record outside ᾱ(α⊥)".into(),
    );

    let proj = |tok: &str| project(&sextuples(e, b, &t, tok).into_iter().collect::<Vec<_>>());
    let (c, sc) = (proj("C"), proj("SC"));
    v(
        Property::CounterfactualChain,
        sc.is_subset(&c) && c.is_subset(&pb),
        "α^SC ⊆ α^C ⊆ α_R fails".into(),
    );

    let bot_v: Vec<Sextuple> = bot.iter().cloned().collect();
    let cf = counterfactual_filter(&bot_v, e, b);
    let scf = strictly_counterfactual_filter(&bot_v, e, b);
    v(
        Property::FilterIdempotent,
        counterfactual_filter(&cf, e, b) == cf && strictly_counterfactual_filter(&scf, e, b) == scf,
        "filter not idempotent".into(),
    );

    let (top, h, f) = (
        sextuples(e, b, &t, "top"),
        sextuples(e, b, &t, "H"),
        sextuples(e, b, &t, "F"),
    );
    let meet: BTreeSet<Sextuple> = h.intersection(&f).cloned().collect();
    v(
        Property::BottomIsMeet,
        meet == bot,
        format!("|α⊥| = {}, |αH ∩ αF| = {}", bot.len(), meet.len()),
    );
    let join: BTreeSet<Sextuple> = h.union(&f).cloned().collect();
    v(
        Property::TopIsJoin,
        join == top,
        format!("|α⊤| = {}, |αH ∪ αF| = {}", top.len(), join.len()),
    );

    let (cfut, pearl) = (sextuples(e, b, &t, "C-F"), sextuples(e, b, &t, "pearl"));
    v(
        Property::CounterfactualFutureInPearl,
        cfut.is_subset(&pearl),
        format!(
            "{} C-F records outside Pearl",
            cfut.difference(&pearl).count()
        ),
    );
    out
}

/// Every concrete check for one instance.
pub fn check_instance(e: &ObservationEngine, behaviors: &[Members]) -> Vec<Violation> {
    let mut out = check_prefixes(e);
    for b in behaviors {
        out.extend(check_variants(e, b));
    }
    out
}

/// Outcome of one abstract-versus-concrete comparison.
#[derive(Clone, Debug, Default)]
pub struct AbstractCheck {
    pub violations: Vec<Violation>,
    /// Concrete `(trace, position)` records.
    pub concrete: usize,
    pub definite_paths: usize,
    pub potential_paths: usize,
}

/// Soundness of the abstract analysis against the concrete one for the
/// omniscient observer, with `B = P_b` in the lattice `{∅, P_b, P_¬b, ⊤}`.
pub fn check_abstract(
    p: &Program,
    pb: &str,
    pnb: &str,
    oracle: bool,
) -> Result<AbstractCheck, crate::Error> {
    let text = AbstractSpecText {
        pb: [("exit".to_string(), vec![pb.to_string()])].into(),
        pnb: [("exit".to_string(), vec![pnb.to_string()])].into(),
        t: Default::default(),
    };
    let user = UserSpec::from_text(p, &text)?;
    let opts = AbstractOptions {
        oracle,
        ..AbstractOptions::default()
    };
    let r = match analyze_abstract(p, &user, Mark::Pb, opts) {
        Ok(r) => r,
        Err(crate::Error::EmptySpec(_)) => return Ok(AbstractCheck::default()),
        Err(e) => return Err(e),
    };
    let o = Oracle::for_program(p, &user.pb_exit, &user.pnb_exit, DEFAULT_STEP_BOUND)
        .ok_or_else(|| crate::Error::Spec("enumeration failed".into()))?;
    let s = o.semantics();
    let members = |f: &dyn Fn(usize) -> bool| {
        let mut m = FixedBitSet::with_capacity(s.len());
        (0..s.len()).filter(|&i| f(i)).for_each(|i| m.insert(i));
        m
    };
    let bset = members(&|i| o.outcome(i).pb);
    let nbset = members(&|i| o.outcome(i).pnb);
    let l = build_lattice(
        s,
        vec![("Pb".into(), bset.clone()), ("PnotB".into(), nbset)],
        false,
    )?;
    let e = ObservationEngine::new(s, &l, &CognizanceSpec::omniscient());
    let concrete: BTreeSet<(usize, usize)> = analyze_with(&e, &bset, &s.universe())
        .iter()
        .map(|r| (r.trace_index, r.position()))
        .collect();
    Ok(AbstractCheck {
        violations: compare_abstract(&r, &o, &concrete, p),
        concrete: concrete.len(),
        definite_paths: r
            .paths
            .iter()
            .filter(|x| matches!(x.verdict, Verdict::Definite(_)))
            .count(),
        potential_paths: r
            .paths
            .iter()
            .filter(|x| matches!(x.verdict, Verdict::Potential(_)))
            .count(),
    })
}

fn compare_abstract(
    r: &AbstractResult,
    o: &Oracle,
    concrete: &BTreeSet<(usize, usize)>,
    p: &Program,
) -> Vec<Violation> {
    let s = o.semantics();
    let mut out = Vec::new();
    let covers = |v: &Verdict, k: usize| match v {
        Verdict::Definite(a) => a.step == k,
        Verdict::Potential(xs) => xs.iter().any(|a| a.step == k),
        Verdict::None => false,
    };
    for &(i, k) in concrete {
        let ok = r
            .paths
            .iter()
            .any(|pv| o.concretizes(&r.automaton, &pv.nodes, i) && covers(&pv.verdict, k));
        if !ok {
            out.push(Violation {
                property: Property::AbstractCoverage,
                detail: format!("`{}` at step {k} not covered\n{p}", s.traces[i]),
            });
        }
    }
    for pv in &r.paths {
        if let Verdict::Definite(a) = &pv.verdict {
            let ok = (0..s.len()).any(|i| {
                o.concretizes(&r.automaton, &pv.nodes, i) && concrete.contains(&(i, a.step))
            });
            if !ok {
                out.push(Violation {
                    property: Property::DefiniteRealized,
                    detail: format!("definite `{}` never concretely responsible\n{p}", a.display),
                });
            }
        }
    }
    out
}

/// Outcome of a corpus run.
#[derive(Clone, Debug, Default)]
pub struct CorpusReport {
    pub programs: usize,
    /// Checked (program, observer, behaviour) instances.
    pub instances: usize,
    pub abstract_instances: usize,
    /// Concrete records compared against abstract verdicts.
    pub abstract_records: usize,
    pub definite_paths: usize,
    pub potential_paths: usize,
    pub violations: Vec<Violation>,
}

impl CorpusReport {
    pub fn count(&self, p: Property) -> usize {
        self.violations.iter().filter(|v| v.property == p).count()
    }

    pub fn theorem_violations(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.property.is_theorem())
    }
}

fn random_members<R: Rng>(rng: &mut R, n: usize) -> Members {
    let mut m = FixedBitSet::with_capacity(n);
    for i in 0..n {
        m.set(i, rng.gen_bool(0.5));
    }
    m
}

/// Concrete checks on `n` random programs: one behaviour from an exit
/// split (or a random trace set) plus a second random one, the omniscient
/// observer and one hiding a random input source.
pub fn run_concrete_corpus(seed: u64, n: usize) -> CorpusReport {
    let cfg = GenConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut rep = CorpusReport::default();
    for (_, p) in corpus(seed, n, &cfg) {
        let s = enumerate_semantics(&p, DEFAULT_STEP_BOUND).expect("corpus programs enumerate");
        let first = match exit_split(&mut rng, &s) {
            Some((pb, _)) => crate::lattice::Predicate::Final { expr: pb }
                .eval(&s)
                .unwrap_or_else(|_| s.universe()),
            None => random_members(&mut rng, s.len()),
        };
        let named = vec![
            ("B1".to_string(), first),
            ("B2".to_string(), random_members(&mut rng, s.len())),
        ];
        let powerset = s.len() <= 8 && rng.gen_bool(0.25);
        let l = match build_lattice(&s, named, powerset) {
            Ok(l) => l,
            Err(_) => continue,
        };
        rep.programs += 1;
        rep.violations.extend(check_galois(&s, &l));
        let mut observers = vec![CognizanceSpec::omniscient()];
        if let Some(src) = p.sources.choose(&mut rng) {
            observers.push(CognizanceSpec::hiding("hider", [src.name.clone()]));
        }
        let bs: Vec<Members> = ["B1", "B2"]
            .iter()
            .filter_map(|b| l.get(b).cloned())
            .collect();
        for spec in &observers {
            let e = ObservationEngine::new(&s, &l, spec);
            rep.instances += bs.len();
            rep.violations.extend(check_instance(&e, &bs));
        }
    }
    rep
}

/// Abstract soundness on `n` random programs, with and without the oracle.
pub fn run_abstract_corpus(seed: u64, n: usize) -> CorpusReport {
    let cfg = GenConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xab5);
    let mut rep = CorpusReport::default();
    for (_, p) in corpus(seed, n, &cfg) {
        rep.programs += 1;
        let s = enumerate_semantics(&p, DEFAULT_STEP_BOUND).expect("corpus programs enumerate");
        let Some((pb, pnb)) = exit_split(&mut rng, &s) else {
            continue;
        };
        for oracle in [true, false] {
            match check_abstract(&p, &pb, &pnb, oracle) {
                Ok(c) => {
                    rep.abstract_instances += 1;
                    rep.abstract_records += c.concrete;
                    rep.definite_paths += c.definite_paths;
                    rep.potential_paths += c.potential_paths;
                    rep.violations.extend(c.violations);
                }
                Err(e) => rep.violations.push(Violation {
                    property: Property::AbstractCoverage,
                    detail: format!("analysis failed: {e}\n{p}"),
                }),
            }
        }
    }
    rep
}
