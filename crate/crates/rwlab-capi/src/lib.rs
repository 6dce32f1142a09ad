//! C ABI for the rwlab laboratory.
//!
//! Objects cross the boundary as opaque handles; rationals cross as
//! `p/q` strings (arbitrary precision survives the trip), and instance,
//! allocation, and transcript data cross in the same text formats the
//! CLI reads and writes. Every fallible function returns an
//! [`RwStatus`]; results come back through out-pointers. Strings
//! returned by this library must be freed with `rwlab_string_free`,
//! handles with their matching `_free` function.
//!
//! The generated header lives at `include/rwlab.h`.

use std::ffi::{c_char, CStr, CString};

use rwlab::adversary::{attack, query_budget, AdversaryInstance};
use rwlab::analysis::{exact_split_tail, hoeffding_tail_bound, union_bound_log};
use rwlab::cake::Valuation;
use rwlab::io;
use rwlab::protocol::QueriedPointSet;
use rwlab::rational::{format_rational, parse_rational};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RwStatus {
    /// Success.
    Ok = 0,
    /// A pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Input text failed to parse or violated an invariant.
    ParseError = 3,
    /// Arguments were structurally valid but out of domain.
    InvalidArgument = 4,
    /// The requested cut does not exist (`[x, 1]` is worth less than
    /// `alpha`); not an error for transcripts, but surfaced as a status
    /// here so callers need no sentinel encoding.
    NoSuchCut = 5,
}

/// Opaque piecewise-constant valuation handle.
pub struct RwValuation(Valuation);

/// Opaque adversarial instance handle.
pub struct RwInstance(AdversaryInstance);

fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, RwStatus> {
    if ptr.is_null() {
        return Err(RwStatus::NullPointer);
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| RwStatus::InvalidUtf8)
}

fn string_out(out: *mut *mut c_char, value: String) -> RwStatus {
    if out.is_null() {
        return RwStatus::NullPointer;
    }
    match CString::new(value) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            RwStatus::Ok
        }
        Err(_) => RwStatus::InvalidArgument,
    }
}

/// Frees a string returned by this library. Passing null is a no-op.
///
/// # Safety
/// `s` must have been returned by an `rwlab_*` function and not freed
/// before.
#[no_mangle]
pub unsafe extern "C" fn rwlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn rwlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// The query budget `8 * floor((n - 1) / 32)^2`. Requires `n >= 33`.
#[no_mangle]
pub extern "C" fn rwlab_query_budget(n: u32, out: *mut u64) -> RwStatus {
    if out.is_null() {
        return RwStatus::NullPointer;
    }
    if n < 33 {
        return RwStatus::InvalidArgument;
    }
    unsafe { *out = query_budget(n as usize) };
    RwStatus::Ok
}

/// Parses a valuation from its text record
/// (`<b0> <d0> <b1> <d1> ... <bk>`, rationals as `p/q`).
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn rwlab_valuation_parse(
    text: *const c_char,
    out: *mut *mut RwValuation,
) -> RwStatus {
    if out.is_null() {
        return RwStatus::NullPointer;
    }
    let text = match str_arg(text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() < 3 || tokens.len() % 2 == 0 {
        return RwStatus::ParseError;
    }
    let mut breakpoints = Vec::with_capacity(tokens.len() / 2 + 1);
    let mut densities = Vec::with_capacity(tokens.len() / 2);
    for (k, token) in tokens.iter().enumerate() {
        match parse_rational(token) {
            Ok(value) => {
                if k % 2 == 0 {
                    breakpoints.push(value);
                } else {
                    densities.push(value);
                }
            }
            Err(_) => return RwStatus::ParseError,
        }
    }
    match Valuation::new(breakpoints, densities) {
        Ok(v) => {
            unsafe { *out = Box::into_raw(Box::new(RwValuation(v))) };
            RwStatus::Ok
        }
        Err(_) => RwStatus::ParseError,
    }
}

/// Frees a valuation handle. Passing null is a no-op.
///
/// # Safety
/// `v` must have come from `rwlab_valuation_parse` and not been freed.
#[no_mangle]
pub unsafe extern "C" fn rwlab_valuation_free(v: *mut RwValuation) {
    if !v.is_null() {
        drop(unsafe { Box::from_raw(v) });
    }
}

/// `eval` query: writes the value of `[x, y]` as a `p/q` string.
///
/// # Safety
/// `v` must be a live valuation handle; `x`, `y` valid strings; `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rwlab_valuation_eval(
    v: *const RwValuation,
    x: *const c_char,
    y: *const c_char,
    out: *mut *mut c_char,
) -> RwStatus {
    if v.is_null() {
        return RwStatus::NullPointer;
    }
    let (x, y) = match (str_arg(x), str_arg(y)) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    let (x, y) = match (parse_rational(x), parse_rational(y)) {
        (Ok(x), Ok(y)) => (x, y),
        _ => return RwStatus::ParseError,
    };
    let valuation = unsafe { &(*v).0 };
    match valuation.eval(&x, &y) {
        Ok(value) => string_out(out, format_rational(&value)),
        Err(_) => RwStatus::InvalidArgument,
    }
}

/// `cut` query: writes the minimal `y` with `[x, y]` worth `alpha`, or
/// returns `NoSuchCut`.
///
/// # Safety
/// Same contract as `rwlab_valuation_eval`.
#[no_mangle]
pub unsafe extern "C" fn rwlab_valuation_cut(
    v: *const RwValuation,
    x: *const c_char,
    alpha: *const c_char,
    out: *mut *mut c_char,
) -> RwStatus {
    if v.is_null() {
        return RwStatus::NullPointer;
    }
    let (x, alpha) = match (str_arg(x), str_arg(alpha)) {
        (Ok(x), Ok(a)) => (x, a),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    let (x, alpha) = match (parse_rational(x), parse_rational(alpha)) {
        (Ok(x), Ok(a)) => (x, a),
        _ => return RwStatus::ParseError,
    };
    let valuation = unsafe { &(*v).0 };
    match valuation.cut(&x, &alpha) {
        Ok(Some(y)) => string_out(out, format_rational(&y)),
        Ok(None) => RwStatus::NoSuchCut,
        Err(_) => RwStatus::InvalidArgument,
    }
}

/// Builds an adversarial instance (`n >= 33`).
#[no_mangle]
pub extern "C" fn rwlab_instance_build(
    n: u32,
    seed: u64,
    out: *mut *mut RwInstance,
) -> RwStatus {
    if out.is_null() {
        return RwStatus::NullPointer;
    }
    match AdversaryInstance::build(n as usize, seed) {
        Ok(instance) => {
            unsafe { *out = Box::into_raw(Box::new(RwInstance(instance))) };
            RwStatus::Ok
        }
        Err(_) => RwStatus::InvalidArgument,
    }
}

/// Parses an instance from its text record.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rwlab_instance_parse(
    text: *const c_char,
    out: *mut *mut RwInstance,
) -> RwStatus {
    if out.is_null() {
        return RwStatus::NullPointer;
    }
    let text = match str_arg(text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match io::parse_instance(text) {
        Ok(instance) => {
            unsafe { *out = Box::into_raw(Box::new(RwInstance(instance))) };
            RwStatus::Ok
        }
        Err(_) => RwStatus::ParseError,
    }
}

/// Serializes an instance to its text record.
///
/// # Safety
/// `instance` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rwlab_instance_to_text(
    instance: *const RwInstance,
    out: *mut *mut c_char,
) -> RwStatus {
    if instance.is_null() {
        return RwStatus::NullPointer;
    }
    let text = io::write_instance(unsafe { &(*instance).0 });
    string_out(out, text)
}

/// Frees an instance handle. Passing null is a no-op.
///
/// # Safety
/// `instance` must have come from this library and not been freed.
#[no_mangle]
pub unsafe extern "C" fn rwlab_instance_free(instance: *mut RwInstance) {
    if !instance.is_null() {
        drop(unsafe { Box::from_raw(instance) });
    }
}

/// Runs the full attack pipeline on serialized allocation + transcript
/// against an instance handle; writes the verdict text record.
///
/// # Safety
/// `instance` must be a live handle; the text arguments valid strings;
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rwlab_attack(
    instance: *const RwInstance,
    allocation_text: *const c_char,
    transcript_text: *const c_char,
    out: *mut *mut c_char,
) -> RwStatus {
    if instance.is_null() {
        return RwStatus::NullPointer;
    }
    let (allocation_text, transcript_text) =
        match (str_arg(allocation_text), str_arg(transcript_text)) {
            (Ok(a), Ok(t)) => (a, t),
            (Err(s), _) | (_, Err(s)) => return s,
        };
    let instance = unsafe { &(*instance).0 };
    let allocation = match io::parse_allocation(allocation_text) {
        Ok(a) => a,
        Err(_) => return RwStatus::ParseError,
    };
    let transcript = match io::parse_transcript(transcript_text) {
        Ok(t) => t,
        Err(_) => return RwStatus::ParseError,
    };
    if allocation.n() != instance.n()
        || transcript
            .entries()
            .iter()
            .any(|e| e.query.agent >= instance.n())
    {
        return RwStatus::InvalidArgument;
    }
    let points = QueriedPointSet::from_transcript(&transcript, instance.n());
    let verdict = attack(&allocation, &transcript, &points, instance);
    string_out(out, io::write_verdict(&verdict))
}

/// `exp(-m/128)`.
#[no_mangle]
pub extern "C" fn rwlab_hoeffding_tail_bound(m: u32, out: *mut f64) -> RwStatus {
    if out.is_null() {
        return RwStatus::NullPointer;
    }
    unsafe { *out = hoeffding_tail_bound(m as usize) };
    RwStatus::Ok
}

/// Exact enumerated tail probability at `m = 32`, as a `p/q` string.
#[no_mangle]
pub extern "C" fn rwlab_exact_split_tail(m: u32, out: *mut *mut c_char) -> RwStatus {
    match exact_split_tail(m as usize) {
        Ok(tail) => string_out(out, format_rational(&tail)),
        Err(_) => RwStatus::InvalidArgument,
    }
}

/// Natural log of the union-bound expression at scale `m` (a positive
/// multiple of 32).
#[no_mangle]
pub extern "C" fn rwlab_union_bound_log(m: u32, out: *mut f64) -> RwStatus {
    if out.is_null() {
        return RwStatus::NullPointer;
    }
    match union_bound_log(m as usize) {
        Ok(components) => {
            unsafe { *out = components.total };
            RwStatus::Ok
        }
        Err(_) => RwStatus::InvalidArgument,
    }
}
