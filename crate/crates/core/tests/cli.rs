use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn pqm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqm")).args(args).env_remove("PQM_SIGNATURE").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn check_prints_the_type() {
    let o = pqm(&["check", example("hadamard.pqm").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "Circ(Qubit, Qubit)\n");
}

#[test]
fn check_against_an_expected_type() {
    let f = example("hadamard.pqm");
    let ok = pqm(&["check", f.to_str().unwrap(), "--type", "Circ(Qubit, Qubit)"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = pqm(&["check", f.to_str().unwrap(), "--type", "Qubit"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(stderr(&bad), "Mismatch @ 2:1 — expected Qubit, found Circ(Qubit, Qubit)\n");
}

#[test]
fn run_emits_one_h_node_as_dot() {
    let o = pqm(&["run", example("hadamard.pqm").to_str().unwrap(), "--emit-circuit", "dot"]);
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("label=\"H\"").count(), 1, "{dot}");
    assert_eq!(dot.matches("shape=box").count(), 1, "{dot}");
}

#[test]
fn clone_is_a_type_error() {
    let o = pqm(&["run", example("clone.pqm").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o), "LinearReuse @ 2:15 — linear resource `x` used more than once\n");
    assert!(stdout(&o).is_empty());
}

#[test]
fn parse_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.pqm", "\\x:Qubit. <x,");
    let o = pqm(&["check", &f]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ParseError @ 1:"), "{}", stderr(&o));
}

#[test]
fn every_semantics_gives_the_same_value() {
    let f = example("bell.pqm");
    for sem in ["big", "small", "stacked", "machine"] {
        let o = pqm(&["run", f.to_str().unwrap(), "--semantics", sem]);
        assert_eq!(o.status.code(), Some(0), "{sem}");
        assert_eq!(stdout(&o), "<#5, #6>\n", "{sem}");
    }
}

#[test]
fn machine_trace_lines() {
    let o = pqm(&["trace", example("bell.pqm").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let first = out.lines().next().unwrap();
    assert_eq!(first.split_whitespace().collect::<Vec<_>>(), ["1", "let-split", "L=7", "stack=1"]);
    assert_eq!(out.lines().last(), Some("<#5, #6>"));
}

#[test]
fn small_trace_lines() {
    let o = pqm(&["run", example("bell.pqm").to_str().unwrap(), "--semantics", "small", "--trace"]);
    let out = stdout(&o);
    let first = out.lines().next().unwrap();
    assert_eq!(first.split_whitespace().collect::<Vec<_>>(), ["1", "apply", "apply(gate", "H,", "#0)", "gates=1"]);
}

#[test]
fn stacked_trace_reports_depth() {
    let o = pqm(&["trace", example("hadamard.pqm").to_str().unwrap(), "--semantics", "stacked"]);
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.contains("depth=2") && l.contains("step-in")), "{out}");
    assert!(out.lines().any(|l| l.contains("depth=1") && l.contains("step-out")), "{out}");
}

#[test]
fn fuel_exhaustion_exits_three() {
    let o = pqm(&["run", example("bell.pqm").to_str().unwrap(), "--fuel", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("FuelExhausted"));
}

#[test]
fn usage_errors_exit_four() {
    assert_eq!(pqm(&["run"]).status.code(), Some(4));
    assert_eq!(pqm(&["check", "x.pqm", "--bogus"]).status.code(), Some(4));
    assert_eq!(pqm(&["run", "/nonexistent/file.pqm"]).status.code(), Some(4));
    assert_eq!(pqm(&["run", example("bell.pqm").to_str().unwrap(), "--semantics", "cek"]).status.code(), Some(4));
    assert_eq!(pqm(&[]).status.code(), Some(4));
}

#[test]
fn json_output_for_every_subcommand() {
    let h = example("hadamard.pqm");
    let h = h.to_str().unwrap();
    let clone = example("clone.pqm");
    let runs: [&[&str]; 6] = [
        &["check", h, "--json"],
        &["run", h, "--json", "--emit-circuit", "dot"],
        &["trace", h, "--json"],
        &["emit", h, "--json"],
        &["fuzz", "--count", "3", "--json"],
        &["check", clone.to_str().unwrap(), "--json"],
    ];
    for args in runs {
        let o = pqm(args);
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert!(v.is_object(), "{args:?}");
    }
    let v: serde_json::Value = serde_json::from_str(&stdout(&pqm(&["check", h, "--json"]))).unwrap();
    assert_eq!(v["type"], "Circ(Qubit, Qubit)");
    let v: serde_json::Value = serde_json::from_str(&stdout(&pqm(runs[5]))).unwrap();
    assert_eq!(v["error"]["kind"], "LinearReuse");
    assert_eq!(v["error"]["line"], 2);
}

#[test]
fn emit_defaults_to_circuit_json() {
    let o = pqm(&["emit", example("bell.pqm").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let c = pqm::LabelledCircuit::from_json(&stdout(&o)).unwrap();
    let names: Vec<&str> = c.gates.iter().map(|g| g.name.as_str()).collect();
    assert_eq!(names, ["H", "CNOT", "Meas", "Meas"]);
}

#[test]
fn fuzz_is_reproducible_and_agrees() {
    let a = pqm(&["fuzz", "--count", "40", "--seed", "11", "--depth", "5"]);
    let b = pqm(&["fuzz", "--count", "40", "--seed", "11", "--depth", "5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["disagreements"], 0);
    assert_eq!(v["cases"].as_array().unwrap().len(), 40);
}

#[test]
fn fuzz_reports_a_shrunk_disagreement() {
    let o = pqm(&["fuzz", "--count", "20", "--seed", "1", "--shrink", "--mutant", "MachineLetJoinSwap"]);
    assert_eq!(o.status.code(), Some(5));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let failed = v["cases"].as_array().unwrap().iter().find(|c| c.get("failure").is_some()).unwrap();
    assert!(failed["failure"]["shrunk"].as_str().unwrap().contains("let"));
    assert_eq!(failed["failure"]["traces"].as_array().unwrap().len(), 4);
}

#[test]
fn fuzz_writes_a_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let o = pqm(&["fuzz", "--count", "5", "--corpus-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let cases = manifest["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 5);
    for c in cases {
        let file = dir.path().join(c["file"].as_str().unwrap());
        let o = pqm(&["check", file.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).trim(), c["type"].as_str().unwrap());
        assert_eq!(c["expected"], "Converged");
    }
}

#[test]
fn custom_signature_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let sig = write(
        dir.path(),
        "sig.json",
        r#"{"wire_types":["Qubit","Bit"],"gates":{"T":{"ins":["Qubit"],"outs":["Qubit"]}}}"#,
    );
    let prog = write(dir.path(), "t.pqm", "-- inputs: #0:Qubit\napply(gate T, #0)\n");
    let run = |env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_pqm"));
        c.args(["run", &prog]);
        match env {
            Some(s) => c.env("PQM_SIGNATURE", s),
            None => c.env_remove("PQM_SIGNATURE"),
        };
        c.output().unwrap()
    };
    assert_eq!(run(Some(&sig)).status.code(), Some(0));
    assert_eq!(stdout(&run(Some(&sig))), "#1\n");
    assert_eq!(run(None).status.code(), Some(1));
    let broken = write(dir.path(), "broken.json", "{");
    assert_eq!(run(Some(&broken)).status.code(), Some(4));
}
