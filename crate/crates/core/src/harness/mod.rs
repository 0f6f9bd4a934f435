//! Program generation, shrinking, property checks and the fuzzing campaign.

pub mod checks;
pub mod declarative;
pub mod gen;
pub mod shrink;

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::bigstep::run_big;
use crate::correspondence::{from_small_step, load, OutcomeClass, SmallConfig, Verdict};
use crate::machine::{measure_l, run_machine_fuel};
use crate::mutant::{EvalOptions, Fuel};
use crate::smallstep::run_small_fuel;
use crate::stacked::run_stacked_fuel;
use crate::syntax::pretty;
use crate::correspondence::RunOutcome;

pub use checks::{check_program, Property, Violation};
pub use gen::{gen_corpus, gen_welltyped, GenParams, Generator, GiveUp, Program, Weights};
pub use shrink::shrink;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    Big,
    Small,
    Stacked,
    Machine,
}

impl Semantics {
    pub const ALL: [Semantics; 4] = [Semantics::Big, Semantics::Small, Semantics::Stacked, Semantics::Machine];

    pub fn name(self) -> &'static str {
        match self {
            Semantics::Big => "big",
            Semantics::Small => "small",
            Semantics::Stacked => "stacked",
            Semantics::Machine => "machine",
        }
    }
}

/// Runs one evaluator; `observe` receives one log line per step.
pub fn run_traced(
    sem: Semantics,
    cfg: &SmallConfig,
    fuel: u64,
    opts: &EvalOptions,
    observe: &mut dyn FnMut(String),
) -> RunOutcome {
    match sem {
        Semantics::Big => {
            let out = run_big(cfg, fuel, opts);
            observe(format!("⇓ {}", out.summary()));
            out
        }
        Semantics::Small => {
            let mut i = 0;
            run_small_fuel(cfg, &mut Fuel::new(fuel), opts, &mut |ev| {
                i += 1;
                observe(format!("{i:>6} {:<6} {}  gates={}", ev.rule.name(), ev.redex, ev.after.circuit.gate_count()))
            })
        }
        Semantics::Stacked => {
            let mut i = 0;
            run_stacked_fuel(&from_small_step(cfg), &mut Fuel::new(fuel), opts, &mut |_, rule, after| {
                i += 1;
                observe(format!("{i:>6} depth={} {rule}", after.depth()))
            })
        }
        Semantics::Machine => {
            let mut i = 0;
            run_machine_fuel(&load(cfg), &mut Fuel::new(fuel), opts, &mut |_, rule, after| {
                i += 1;
                observe(format!("{i:>6} {:<12} L={} stack={}", rule.name(), measure_l(after), after.stack.len()))
            })
        }
    }
}

pub fn run_semantics(sem: Semantics, cfg: &SmallConfig, fuel: u64, opts: &EvalOptions) -> RunOutcome {
    run_traced(sem, cfg, fuel, opts, &mut |_| {})
}

/// Program text with its inputs declaration, suitable for `parse_program`.
pub fn program_text(p: &Program) -> String {
    let mut s = String::new();
    if !p.labels.is_empty() {
        let decls: Vec<String> = p.labels.iter().map(|(l, w)| format!("{l}:{w}")).collect();
        let _ = writeln!(s, "-- inputs: {}", decls.join(", "));
    }
    let _ = writeln!(s, "-- type: {}", p.ty);
    s.push_str(&pretty(&p.term));
    s.push('\n');
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusEntry {
    pub file: String,
    pub seed: u64,
    #[serde(rename = "type")]
    pub ty: String,
    pub expected: OutcomeClass,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub seed: u64,
    pub params: GenParams,
    pub fuel: u64,
    pub cases: Vec<CorpusEntry>,
}

/// Writes `.pqm` files and `manifest.json` into `dir`.
pub fn write_corpus(dir: &Path, params: &GenParams, fuel: u64, cases: &[(u64, Program, OutcomeClass)]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for (i, (seed, p, class)) in cases.iter().enumerate() {
        let file = format!("case_{i:05}.pqm");
        std::fs::write(dir.join(&file), program_text(p))?;
        entries.push(CorpusEntry { file, seed: *seed, ty: p.ty.to_string(), expected: *class });
    }
    let manifest = Manifest { seed: params.seed, params: params.clone(), fuel, cases: entries };
    let json = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    std::fs::write(dir.join("manifest.json"), json + "\n")
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub violations: Vec<Violation>,
    pub program: String,
    pub shrunk: Option<String>,
    pub traces: Vec<(Semantics, Vec<String>)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseResult {
    pub index: usize,
    pub seed: u64,
    pub program: String,
    #[serde(rename = "type")]
    pub ty: String,
    pub outcomes: [OutcomeClass; 4],
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gave_up: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FuzzReport {
    pub seed: u64,
    pub count: usize,
    pub max_depth: usize,
    pub fuel: u64,
    pub agreed: usize,
    pub inconclusive: usize,
    pub disagreements: usize,
    pub gave_up: usize,
    pub cases: Vec<CaseResult>,
}

#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub params: GenParams,
    pub count: usize,
    pub fuel: u64,
    pub shrink: bool,
    pub opts: EvalOptions,
    pub properties: Vec<Property>,
}

fn traces_of(p: &Program, fuel: u64, opts: &EvalOptions) -> Vec<(Semantics, Vec<String>)> {
    let cfg = checks::initial_config(p);
    Semantics::ALL
        .iter()
        .map(|&sem| {
            let mut lines = Vec::new();
            let out = run_traced(sem, &cfg, fuel, opts, &mut |l| lines.push(l));
            lines.push(out.summary());
            (sem, lines)
        })
        .collect()
}

pub fn fuzz_case(index: usize, p: &Program, seed: u64, cfg: &FuzzConfig) -> CaseResult {
    let (report, violations) = check_program(p, cfg.fuel, &cfg.opts, &cfg.properties);
    let failure = (!violations.is_empty()).then(|| {
        let shrunk = cfg.shrink.then(|| {
            let props: Vec<Property> = violations.iter().map(|v| v.property).collect();
            let failing = |q: &Program| !check_program(q, cfg.fuel, &cfg.opts, &props).1.is_empty();
            let s = shrink(p, &failing);
            program_text(&s)
        });
        Failure { violations, program: program_text(p), shrunk, traces: traces_of(p, cfg.fuel, &cfg.opts) }
    });
    let verdict = match &failure {
        Some(f) => Verdict::Disagree(
            f.violations.iter().map(|v| format!("{:?}: {}", v.property, v.detail)).collect::<Vec<_>>().join("; "),
        ),
        None => report.verdict.clone(),
    };
    CaseResult {
        index,
        seed,
        program: pretty(&p.term),
        ty: p.ty.to_string(),
        outcomes: report.classes(),
        verdict,
        failure,
        gave_up: None,
    }
}

/// Generates `count` programs from consecutive seeds and checks each one.
pub fn fuzz(cfg: &FuzzConfig) -> FuzzReport {
    let cases: Vec<CaseResult> = (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.params.seed.wrapping_add(i as u64);
            match Generator::new(GenParams { seed, ..cfg.params.clone() }).program() {
                Ok(p) => fuzz_case(i, &p, seed, cfg),
                Err(e) => CaseResult {
                    index: i,
                    seed,
                    program: String::new(),
                    ty: String::new(),
                    outcomes: [OutcomeClass::FuelExhausted; 4],
                    verdict: Verdict::Inconclusive(e.0.clone()),
                    failure: None,
                    gave_up: Some(e.0),
                },
            }
        })
        .collect();
    let count = |f: fn(&Verdict) -> bool| cases.iter().filter(|c| c.gave_up.is_none() && f(&c.verdict)).count();
    FuzzReport {
        seed: cfg.params.seed,
        count: cfg.count,
        max_depth: cfg.params.max_depth,
        fuel: cfg.fuel,
        agreed: count(|v| matches!(v, Verdict::Agree)),
        inconclusive: count(|v| matches!(v, Verdict::Inconclusive(_))),
        disagreements: count(|v| matches!(v, Verdict::Disagree(_))),
        gave_up: cases.iter().filter(|c| c.gave_up.is_some()).count(),
        cases,
    }
}
