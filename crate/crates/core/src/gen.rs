//! Random small loop-free programs for property testing.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::program::{enumerate_semantics, parse, CmpOp, Program, DEFAULT_STEP_BOUND};
use crate::semantics::MaximalSemantics;

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub max_inputs: usize,
    pub max_domain: usize,
    pub max_stmts: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_inputs: 3,
            max_domain: 3,
            max_stmts: 12,
        }
    }
}

const INPUT_VARS: [&str; 3] = ["a", "b", "c"];
const LOCALS: [&str; 4] = ["x", "y", "z", "w"];
const OPS: [&str; 6] = ["==", "!=", "<", "<=", ">", ">="];

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    out: String,
    budget: usize,
    inputs_left: Vec<usize>,
    domains: Vec<Vec<i64>>,
}

impl<R: Rng> Gen<'_, R> {
    fn atom(&mut self, defined: &BTreeSet<String>) -> String {
        let vars: Vec<&String> = defined.iter().collect();
        if vars.is_empty() || self.rng.gen_bool(0.25) {
            self.rng.gen_range(-2..=2).to_string()
        } else {
            vars.choose(self.rng).unwrap().to_string()
        }
    }

    fn var(&mut self, defined: &BTreeSet<String>) -> Option<String> {
        let vars: Vec<&String> = defined.iter().collect();
        vars.choose(self.rng).map(|v| v.to_string())
    }

    fn cond(&mut self, defined: &BTreeSet<String>) -> String {
        let one = |g: &mut Self| {
            let l = g.var(defined).unwrap_or_else(|| "0".into());
            let r = g.atom(defined);
            format!("{l} {} {r}", OPS.choose(g.rng).unwrap())
        };
        match self.rng.gen_range(0..10) {
            0 => format!("{} && {}", one(self), one(self)),
            1 => format!("{} || {}", one(self), one(self)),
            2 => format!("!({})", one(self)),
            _ => one(self),
        }
    }

    fn expr(&mut self, defined: &BTreeSet<String>) -> String {
        match self.rng.gen_range(0..9) {
            0 => self.rng.gen_range(-2..=2).to_string(),
            1 | 2 => self.atom(defined),
            3 => format!("{} + {}", self.atom(defined), self.rng.gen_range(1..=2)),
            4 => format!("{} - {}", self.atom(defined), self.atom(defined)),
            5 => format!("{} * {}", self.atom(defined), self.atom(defined)),
            6 => format!("{} + {}", self.atom(defined), self.atom(defined)),
            7 => {
                let c = self.cond(defined);
                format!("({c}) ? {} : {}", self.atom(defined), self.atom(defined))
            }
            _ => format!("-{}", self.atom(defined)),
        }
    }

    fn input(&mut self, defined: &mut BTreeSet<String>, pad: &str) {
        let i = self.inputs_left.remove(0);
        let dom: Vec<String> = self.domains[i].iter().map(i64::to_string).collect();
        self.out.push_str(&format!(
            "{pad}{} = input in{} in {{{}}};\n",
            INPUT_VARS[i],
            i + 1,
            dom.join(",")
        ));
        defined.insert(INPUT_VARS[i].to_string());
    }

    fn block(&mut self, defined: &mut BTreeSet<String>, depth: usize, max_len: usize) {
        let pad = "    ".repeat(depth);
        let len = self.rng.gen_range(1..=max_len);
        for _ in 0..len {
            if self.budget == 0 {
                return;
            }
            self.budget -= 1;
            let roll = self.rng.gen_range(0..10);
            if !self.inputs_left.is_empty() && (roll < 3 || defined.is_empty()) {
                self.input(defined, &pad);
            } else if roll < 5 && depth < 2 && self.budget >= 2 {
                let c = self.cond(defined);
                self.out.push_str(&format!("{pad}if ({c}) {{\n"));
                let mut then_d = defined.clone();
                self.block(&mut then_d, depth + 1, 2);
                if self.rng.gen_bool(0.5) && self.budget > 0 {
                    self.out.push_str(&format!("{pad}}} else {{\n"));
                    let mut else_d = defined.clone();
                    self.block(&mut else_d, depth + 1, 2);
                    *defined = then_d.intersection(&else_d).cloned().collect();
                } else {
                    // Without an else branch only earlier definitions survive.
                    *defined = defined.intersection(&then_d).cloned().collect();
                }
                self.out.push_str(&format!("{pad}}}\n"));
            } else {
                let e = self.expr(defined);
                let v = if defined.is_empty() || self.rng.gen_bool(0.7) {
                    LOCALS.choose(self.rng).unwrap().to_string()
                } else {
                    self.var(defined).unwrap()
                };
                self.out.push_str(&format!("{pad}{v} = {e};\n"));
                defined.insert(v);
            }
        }
    }
}

/// Source text of a random program: at most `max_inputs` input sources with
/// domains of at most `max_domain` values, at most `max_stmts` statements, no
/// loops or division, and every variable assigned before it is read.
pub fn random_source<R: Rng>(rng: &mut R, cfg: &GenConfig) -> String {
    let n_inputs = rng.gen_range(1..=cfg.max_inputs.clamp(1, 3));
    let domains: Vec<Vec<i64>> = (0..n_inputs)
        .map(|_| {
            let k = rng.gen_range(1..=cfg.max_domain.max(1));
            let mut pool: Vec<i64> = (-2..=2).collect();
            pool.shuffle(rng);
            let mut d: Vec<i64> = pool.into_iter().take(k).collect();
            d.sort();
            d
        })
        .collect();
    let mut g = Gen {
        rng,
        out: String::new(),
        budget: cfg.max_stmts.max(1),
        inputs_left: (0..n_inputs).collect(),
        domains,
    };
    let mut defined = BTreeSet::new();
    g.block(&mut defined, 0, cfg.max_stmts.max(1));
    g.out
}

pub fn random_program<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Program {
    parse(&random_source(rng, cfg)).expect("generated programs parse")
}

/// `n` programs from a fixed seed. Programs whose enumeration fails (integer
/// overflow) are skipped.
pub fn corpus(seed: u64, n: usize, cfg: &GenConfig) -> Vec<(String, Program)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let src = random_source(&mut rng, cfg);
        let p = parse(&src).expect("generated programs parse");
        if enumerate_semantics(&p, DEFAULT_STEP_BOUND).is_ok() {
            out.push((src, p));
        }
    }
    out
}

/// A pair of complementary exit constraints `(P_b, P_¬b)` on a variable
/// defined at the exit of every execution, chosen so that both sides are
/// usually inhabited.
pub fn exit_split<R: Rng>(rng: &mut R, s: &MaximalSemantics) -> Option<(String, String)> {
    let envs: Vec<_> = s
        .runs
        .iter()
        .filter(|r| !r.faulted)
        .map(|r| &r.final_env)
        .collect();
    let common: BTreeSet<&String> = envs
        .first()?
        .keys()
        .filter(|k| envs.iter().all(|e| e.contains_key(*k)))
        .collect();
    let v = common
        .into_iter()
        .collect::<Vec<_>>()
        .choose(rng)
        .map(|v| v.to_string())?;
    let values: Vec<i64> = envs.iter().map(|e| e[&v]).collect();
    let c = *values.choose(rng)?;
    let op = *[CmpOp::Eq, CmpOp::Lt, CmpOp::Le].choose(rng)?;
    Some((
        format!("{v} {} {c}", op.symbol()),
        format!("{v} {} {c}", op.negate().symbol()),
    ))
}
