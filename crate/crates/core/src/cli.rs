//! The `pqm` command-line tool.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::circuit::{GateSignature, LabelContext, LabelledCircuit};
use crate::correspondence::{RunOutcome, SmallConfig};
use crate::harness::{self, FuzzConfig, GenParams, Generator, Property, Semantics};
use crate::mutant::{EvalOptions, Mutant};
use crate::syntax::{free_labels, parse_program, parse_type, pretty, Span, SpanTree, Term};
use crate::typecheck::{typecheck, TypeError, TypeErrorKind, TypingContext};
use crate::types::{TypeExpr, WireType};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TYPE: i32 = 1;
pub const EXIT_DEADLOCK: i32 = 2;
pub const EXIT_FUEL: i32 = 3;
pub const EXIT_USAGE: i32 = 4;
pub const EXIT_DISAGREE: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "pqm", version, about = "Typecheck, run and cross-check Proto-Quipper-M programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Typecheck a program and print its type.
    Check(CheckArgs),
    /// Evaluate a program.
    Run(RunArgs),
    /// Evaluate a program, logging every step.
    Trace(RunArgs),
    /// Generate programs and run the four evaluators against each other.
    Fuzz(FuzzArgs),
    /// Evaluate a program and export the circuit it builds.
    Emit(RunArgs),
}

#[derive(Args, Debug)]
struct CheckArgs {
    file: PathBuf,
    /// Expected type; a different inferred type is a type error.
    #[arg(long = "type")]
    ty: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CircuitFormat {
    Json,
    Dot,
}

#[derive(Args, Debug)]
struct RunArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "machine")]
    semantics: Semantics,
    #[arg(long, default_value_t = 100_000)]
    fuel: u64,
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    json: bool,
    #[arg(long = "emit-circuit", value_enum)]
    emit_circuit: Option<CircuitFormat>,
}

#[derive(Args, Debug)]
struct FuzzArgs {
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 6)]
    depth: usize,
    #[arg(long, default_value_t = 100_000)]
    fuel: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of input labels per program.
    #[arg(long, default_value_t = 3)]
    labels: usize,
    #[arg(long)]
    shrink: bool,
    /// Accepted for uniformity; the report is always JSON.
    #[arg(long)]
    json: bool,
    /// Also write the generated programs and a manifest here.
    #[arg(long = "corpus-dir")]
    corpus_dir: Option<PathBuf>,
    /// Run with a deliberately broken rule.
    #[arg(long, value_parser = parse_mutant, hide = true)]
    mutant: Option<Mutant>,
}

fn parse_mutant(s: &str) -> Result<Mutant, String> {
    Mutant::ALL
        .into_iter()
        .find(|m| format!("{m:?}").eq_ignore_ascii_case(s))
        .ok_or_else(|| format!("unknown mutant `{s}`"))
}

/// A failure that ends the invocation with a diagnostic.
struct Diag {
    code: i32,
    kind: String,
    span: Option<Span>,
    message: String,
}

impl Diag {
    fn usage(kind: &str, message: impl Into<String>) -> Diag {
        Diag { code: EXIT_USAGE, kind: kind.to_string(), span: None, message: message.into() }
    }

    fn render(&self) -> String {
        match self.span {
            Some(s) => format!("{} @ {}:{} — {}", self.kind, s.line, s.col, self.message),
            None => format!("{} — {}", self.kind, self.message),
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "error": {
                "kind": self.kind,
                "line": self.span.map(|s| s.line),
                "col": self.span.map(|s| s.col),
                "message": self.message,
            }
        })
    }
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn line(&mut self, s: &str) {
        let _ = writeln!(self.out, "{s}");
    }

    fn json(&mut self, v: &Value) {
        let _ = writeln!(self.out, "{}", serde_json::to_string_pretty(v).expect("json value"));
    }

    fn fail(&mut self, d: &Diag, json: bool) -> i32 {
        let _ = writeln!(self.err, "{}", d.render());
        if json {
            self.json(&d.to_json());
        }
        d.code
    }
}

fn signature() -> Result<GateSignature, Diag> {
    match std::env::var_os("PQM_SIGNATURE") {
        None => Ok(GateSignature::default_signature()),
        Some(path) => {
            let src = std::fs::read_to_string(&path)
                .map_err(|e| Diag::usage("SignatureError", format!("{}: {e}", Path::new(&path).display())))?;
            GateSignature::from_json(&src).map_err(|e| Diag::usage("SignatureError", e.to_string()))
        }
    }
}

struct Loaded {
    term: Term,
    spans: SpanTree,
    labels: LabelContext,
    ty: TypeExpr,
}

fn type_diag(e: &TypeError, spans: &SpanTree) -> Diag {
    Diag { code: EXIT_TYPE, kind: e.kind.name().to_string(), span: Some(spans.lookup(&e.path)), message: e.kind.message() }
}

fn load_file(path: &Path, sig: &GateSignature) -> Result<Loaded, Diag> {
    let src = std::fs::read_to_string(path).map_err(|e| Diag::usage("IoError", format!("{}: {e}", path.display())))?;
    let parsed = parse_program(&src, sig).map_err(|e| Diag {
        code: EXIT_TYPE,
        kind: "ParseError".to_string(),
        span: Some(e.span),
        message: e.message,
    })?;
    // labels without a declaration are taken to be qubits
    let labels = parsed
        .inputs
        .unwrap_or_else(|| free_labels(&parsed.term).into_iter().map(|l| (l, WireType::qubit())).collect());
    let ty = typecheck(&TypingContext::with_labels(labels.clone()), &parsed.term)
        .map_err(|e| type_diag(&e, &parsed.spans))?;
    Ok(Loaded { term: parsed.term, spans: parsed.spans, labels, ty })
}

fn check(a: &CheckArgs, io: &mut Io) -> i32 {
    let result = (|| {
        let sig = signature()?;
        let l = load_file(&a.file, &sig)?;
        if let Some(src) = &a.ty {
            let want = parse_type(src, &sig).map_err(|e| Diag::usage("ParseError", format!("in --type: {}", e.message)))?;
            if want != l.ty {
                let e = TypeError { kind: TypeErrorKind::Mismatch { expected: want, found: l.ty }, path: Vec::new() };
                return Err(type_diag(&e, &l.spans));
            }
        }
        Ok(l.ty)
    })();
    match result {
        Ok(ty) => {
            if a.json {
                io.json(&json!({ "type": ty.to_string() }));
            } else {
                io.line(&ty.to_string());
            }
            EXIT_OK
        }
        Err(d) => io.fail(&d, a.json),
    }
}

/// The circuit a value denotes: a boxed literal's own circuit, otherwise the final one.
fn produced_circuit<'a>(final_circuit: &'a LabelledCircuit, value: &'a Term) -> &'a LabelledCircuit {
    match value {
        Term::BoxedCirc(_, c, _) => c,
        _ => final_circuit,
    }
}

fn run(a: &RunArgs, trace: bool, emit: Option<CircuitFormat>, io: &mut Io) -> i32 {
    let (sig, l) = match signature().and_then(|sig| load_file(&a.file, &sig).map(|l| (sig, l))) {
        Ok(x) => x,
        Err(d) => return io.fail(&d, a.json),
    };
    let cfg = SmallConfig { circuit: crate::circuit::identity(&l.labels), term: l.term };
    let mut lines = Vec::new();
    let outcome = harness::run_traced(a.semantics, &cfg, a.fuel, &EvalOptions::default(), &mut |s| {
        if trace {
            lines.push(s)
        }
    });
    if !a.json {
        for s in &lines {
            io.line(s);
        }
    }
    let base = json!({
        "semantics": a.semantics.name(),
        "type": l.ty.to_string(),
        "outcome": outcome.class().to_string(),
        "steps": outcome.steps(),
    });
    let mut report = base;
    if trace {
        report["trace"] = json!(lines);
    }
    match &outcome {
        RunOutcome::Converged { circuit, value, .. } => {
            let emitted = produced_circuit(circuit, value);
            if a.json {
                report["value"] = json!(pretty(value));
                report["circuit"] = serde_json::to_value(circuit).expect("circuit json");
                if let Some(f) = emit {
                    report["emitted"] = match f {
                        CircuitFormat::Json => serde_json::to_value(emitted).expect("circuit json"),
                        CircuitFormat::Dot => json!(emitted.to_dot(&sig)),
                    };
                }
                io.json(&report);
            } else {
                match emit {
                    Some(CircuitFormat::Json) => io.line(&emitted.to_json()),
                    Some(CircuitFormat::Dot) => {
                        let _ = write!(io.out, "{}", emitted.to_dot(&sig));
                    }
                    None => io.line(&pretty(value)),
                }
            }
            EXIT_OK
        }
        RunOutcome::Deadlocked { reason, state, .. } => {
            report["reason"] = json!(reason);
            report["state"] = json!(state);
            if a.json {
                io.json(&report);
            }
            let _ = writeln!(io.err, "Deadlocked — {reason}");
            EXIT_DEADLOCK
        }
        RunOutcome::FuelExhausted { state, steps } => {
            report["state"] = json!(state);
            if a.json {
                io.json(&report);
            }
            let _ = writeln!(io.err, "FuelExhausted — no result after {steps} steps");
            EXIT_FUEL
        }
    }
}

fn fuzz(a: &FuzzArgs, io: &mut Io) -> i32 {
    let params = GenParams { max_depth: a.depth, label_budget: a.labels, seed: a.seed, ..GenParams::default() };
    let cfg = FuzzConfig {
        params: params.clone(),
        count: a.count,
        fuel: a.fuel,
        shrink: a.shrink,
        opts: EvalOptions { mutant: a.mutant },
        properties: Property::ALL.to_vec(),
    };
    let report = harness::fuzz(&cfg);
    if let Some(dir) = &a.corpus_dir {
        let cases: Vec<_> = report
            .cases
            .iter()
            .filter(|c| c.gave_up.is_none())
            .filter_map(|c| {
                let p = Generator::new(GenParams { seed: c.seed, ..params.clone() }).program().ok()?;
                Some((c.seed, p, c.outcomes[1]))
            })
            .collect();
        if let Err(e) = harness::write_corpus(dir, &params, a.fuel, &cases) {
            return io.fail(&Diag::usage("IoError", format!("{}: {e}", dir.display())), false);
        }
    }
    io.json(&serde_json::to_value(&report).expect("report json"));
    if report.disagreements > 0 {
        let _ = writeln!(io.err, "{} of {} cases disagree", report.disagreements, report.count);
        EXIT_DISAGREE
    } else {
        EXIT_OK
    }
}

/// Runs one invocation against the given streams and returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut io = Io { out, err };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(io.out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(io.err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match &cli.command {
        Command::Check(a) => check(a, &mut io),
        Command::Run(a) => run(a, a.trace, a.emit_circuit, &mut io),
        Command::Trace(a) => run(a, true, a.emit_circuit, &mut io),
        Command::Emit(a) => run(a, a.trace, Some(a.emit_circuit.unwrap_or(CircuitFormat::Json)), &mut io),
        Command::Fuzz(a) => fuzz(a, &mut io),
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    let _ = std::io::stdout().flush();
    code
}
