use std::ffi::{CStr, CString};
use std::ptr;

use pqm_ffi::*;

fn parse(src: &str) -> *mut PqmProgram {
    let src = CString::new(src).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { pqm_parse(src.as_ptr(), &mut p) }, PqmStatus::Ok);
    p
}

fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { pqm_string_free(s) };
    out
}

fn last_error() -> String {
    let e = pqm_last_error();
    assert!(!e.is_null());
    unsafe { CStr::from_ptr(e) }.to_str().unwrap().to_string()
}

#[test]
fn check_reports_the_type() {
    let p = parse("box[Qubit] lift \\x:Qubit. apply(gate H, x)");
    let mut ty = ptr::null_mut();
    assert_eq!(unsafe { pqm_check(p, &mut ty) }, PqmStatus::Ok);
    assert_eq!(take(ty), "Circ(Qubit, Qubit)");
    unsafe { pqm_program_free(p) };
}

#[test]
fn every_semantics_runs_the_bell_program() {
    let p = parse("-- inputs: #0:Qubit, #1:Qubit\napply(gate CNOT, <apply(gate H, #0), #1>)");
    for sem in [PqmSemantics::Big, PqmSemantics::Small, PqmSemantics::Stacked, PqmSemantics::Machine] {
        let mut o = ptr::null_mut();
        assert_eq!(unsafe { pqm_run(p, sem, 1000, &mut o) }, PqmStatus::Ok);
        assert_eq!(unsafe { pqm_outcome_kind(o) }, PqmOutcomeKind::Converged);
        assert_eq!(take(unsafe { pqm_outcome_value(o) }), "<#3, #4>");
        let json = take(unsafe { pqm_outcome_circuit_json(o) });
        assert!(json.contains("\"CNOT\"") && json.contains("\"H\""), "{json}");
        unsafe { pqm_outcome_free(o) };
    }
    unsafe { pqm_program_free(p) };
}

#[test]
fn type_errors_set_the_last_error() {
    let p = parse("\\x:Qubit. <x, x>");
    let mut ty = ptr::null_mut();
    assert_eq!(unsafe { pqm_check(p, &mut ty) }, PqmStatus::TypeError);
    assert!(ty.is_null());
    assert!(last_error().starts_with("LinearReuse"), "{}", last_error());
    let mut o = ptr::null_mut();
    assert_eq!(unsafe { pqm_run(p, PqmSemantics::Machine, 10, &mut o) }, PqmStatus::TypeError);
    assert!(o.is_null());
    unsafe { pqm_program_free(p) };
}

#[test]
fn parse_errors_carry_a_position() {
    let src = CString::new("\\x:Qubit. <x").unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { pqm_parse(src.as_ptr(), &mut p) }, PqmStatus::ParseError);
    assert!(p.is_null());
    assert!(last_error().starts_with("ParseError @ 1:"), "{}", last_error());
}

#[test]
fn null_arguments_are_rejected() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { pqm_parse(ptr::null(), &mut p) }, PqmStatus::NullArgument);
    assert_eq!(unsafe { pqm_check(ptr::null(), ptr::null_mut()) }, PqmStatus::NullArgument);
    unsafe { pqm_program_free(ptr::null_mut()) };
    unsafe { pqm_outcome_free(ptr::null_mut()) };
    unsafe { pqm_string_free(ptr::null_mut()) };
}

#[test]
fn fuel_exhaustion_is_an_outcome() {
    let p = parse("-- inputs: #0:Qubit\napply(gate X, apply(gate H, #0))");
    let mut o = ptr::null_mut();
    assert_eq!(unsafe { pqm_run(p, PqmSemantics::Machine, 1, &mut o) }, PqmStatus::Ok);
    assert_eq!(unsafe { pqm_outcome_kind(o) }, PqmOutcomeKind::FuelExhausted);
    assert!(unsafe { pqm_outcome_value(o) }.is_null());
    assert_eq!(unsafe { pqm_outcome_steps(o) }, 1);
    assert!(take(unsafe { pqm_outcome_summary(o) }).starts_with("FuelExhausted"));
    unsafe { pqm_outcome_free(o) };
    unsafe { pqm_program_free(p) };
}
