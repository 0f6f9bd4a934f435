//! C interface to the pqm toolchain.
//!
//! Programs and outcomes are opaque handles owned by the caller and released
//! with the matching `_free` function. Strings returned by this library are
//! released with [`pqm_string_free`]. When a call fails, [`pqm_last_error`]
//! describes the failure until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pqm::circuit::{identity, GateSignature, LabelContext};
use pqm::correspondence::{RunOutcome, SmallConfig};
use pqm::harness::{run_semantics, Semantics};
use pqm::mutant::EvalOptions;
use pqm::syntax::{free_labels, parse_program, pretty};
use pqm::typecheck::{typecheck, TypingContext};
use pqm::{Term, WireType};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PqmStatus {
    Ok = 0,
    ParseError = 1,
    TypeError = 2,
    NullArgument = 3,
    InvalidUtf8 = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PqmSemantics {
    Big = 0,
    Small = 1,
    Stacked = 2,
    Machine = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PqmOutcomeKind {
    Converged = 0,
    Deadlocked = 1,
    FuelExhausted = 2,
}

/// A parsed program with its label context.
pub struct PqmProgram {
    term: Term,
    labels: LabelContext,
}

/// The result of one evaluation.
pub struct PqmOutcome {
    inner: RunOutcome,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: PqmStatus, msg: impl Into<String>) -> PqmStatus {
    set_error(msg);
    status
}

fn guarded(f: impl FnOnce() -> PqmStatus) -> PqmStatus {
    clear_error();
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(PqmStatus::Panic, "internal panic"))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Parses `src`. Labels without an inputs declaration default to `Qubit`.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pqm_parse(src: *const c_char, out: *mut *mut PqmProgram) -> PqmStatus {
    guarded(|| {
        if src.is_null() || out.is_null() {
            return fail(PqmStatus::NullArgument, "null argument");
        }
        let Ok(text) = CStr::from_ptr(src).to_str() else {
            return fail(PqmStatus::InvalidUtf8, "source is not UTF-8");
        };
        match parse_program(text, &GateSignature::default_signature()) {
            Ok(p) => {
                let labels = p
                    .inputs
                    .unwrap_or_else(|| free_labels(&p.term).into_iter().map(|l| (l, WireType::qubit())).collect());
                *out = Box::into_raw(Box::new(PqmProgram { term: p.term, labels }));
                PqmStatus::Ok
            }
            Err(e) => fail(PqmStatus::ParseError, format!("ParseError @ {}:{} — {}", e.span.line, e.span.col, e.message)),
        }
    })
}

/// # Safety
/// `p` must be null or a handle from [`pqm_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pqm_program_free(p: *mut PqmProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Typechecks `p`; on success `*type_out` receives the printed type.
///
/// # Safety
/// `p` must be a live program handle and `type_out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pqm_check(p: *const PqmProgram, type_out: *mut *mut c_char) -> PqmStatus {
    guarded(|| {
        let (Some(p), false) = (p.as_ref(), type_out.is_null()) else {
            return fail(PqmStatus::NullArgument, "null argument");
        };
        match typecheck(&TypingContext::with_labels(p.labels.clone()), &p.term) {
            Ok(t) => {
                *type_out = to_c_string(t.to_string());
                PqmStatus::Ok
            }
            Err(e) => fail(PqmStatus::TypeError, e.to_string()),
        }
    })
}

/// Typechecks and evaluates `p` with at most `fuel` steps. Deadlock and fuel
/// exhaustion are outcomes, not errors.
///
/// # Safety
/// `p` must be a live program handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pqm_run(
    p: *const PqmProgram,
    semantics: PqmSemantics,
    fuel: u64,
    out: *mut *mut PqmOutcome,
) -> PqmStatus {
    guarded(|| {
        let (Some(p), false) = (p.as_ref(), out.is_null()) else {
            return fail(PqmStatus::NullArgument, "null argument");
        };
        if let Err(e) = typecheck(&TypingContext::with_labels(p.labels.clone()), &p.term) {
            return fail(PqmStatus::TypeError, e.to_string());
        }
        let sem = match semantics {
            PqmSemantics::Big => Semantics::Big,
            PqmSemantics::Small => Semantics::Small,
            PqmSemantics::Stacked => Semantics::Stacked,
            PqmSemantics::Machine => Semantics::Machine,
        };
        let cfg = SmallConfig { circuit: identity(&p.labels), term: p.term.clone() };
        let inner = run_semantics(sem, &cfg, fuel, &EvalOptions::default());
        *out = Box::into_raw(Box::new(PqmOutcome { inner }));
        PqmStatus::Ok
    })
}

/// # Safety
/// `o` must be null or a handle from [`pqm_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pqm_outcome_free(o: *mut PqmOutcome) {
    if !o.is_null() {
        drop(Box::from_raw(o));
    }
}

/// # Safety
/// `o` must be a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn pqm_outcome_kind(o: *const PqmOutcome) -> PqmOutcomeKind {
    match o.as_ref().map(|o| &o.inner) {
        Some(RunOutcome::Converged { .. }) => PqmOutcomeKind::Converged,
        Some(RunOutcome::FuelExhausted { .. }) => PqmOutcomeKind::FuelExhausted,
        Some(RunOutcome::Deadlocked { .. }) | None => PqmOutcomeKind::Deadlocked,
    }
}

/// # Safety
/// `o` must be a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn pqm_outcome_steps(o: *const PqmOutcome) -> u64 {
    o.as_ref().map_or(0, |o| o.inner.steps())
}

/// The printed value, or null unless the run converged.
///
/// # Safety
/// `o` must be a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn pqm_outcome_value(o: *const PqmOutcome) -> *mut c_char {
    match o.as_ref().map(|o| &o.inner) {
        Some(RunOutcome::Converged { value, .. }) => to_c_string(pretty(value)),
        _ => ptr::null_mut(),
    }
}

/// The final circuit as JSON, or null unless the run converged.
///
/// # Safety
/// `o` must be a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn pqm_outcome_circuit_json(o: *const PqmOutcome) -> *mut c_char {
    match o.as_ref().map(|o| &o.inner) {
        Some(RunOutcome::Converged { circuit, .. }) => to_c_string(circuit.to_json()),
        _ => ptr::null_mut(),
    }
}

/// One-line description of the outcome.
///
/// # Safety
/// `o` must be a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn pqm_outcome_summary(o: *const PqmOutcome) -> *mut c_char {
    o.as_ref().map_or(ptr::null_mut(), |o| to_c_string(o.inner.summary()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pqm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. Owned by the
/// library; valid until the next call.
#[no_mangle]
pub extern "C" fn pqm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
