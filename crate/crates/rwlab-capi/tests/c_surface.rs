//! Exercises the C surface the way a foreign binding would: through the
//! exported extern "C" functions, raw pointers and all.

use std::ffi::{CStr, CString};
use std::ptr;

use rwlab_capi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take_string(ptr: *mut std::ffi::c_char) -> String {
    assert!(!ptr.is_null());
    let s = CStr::from_ptr(ptr).to_str().unwrap().to_string();
    rwlab_string_free(ptr);
    s
}

#[test]
fn version_is_a_static_string() {
    let v = rwlab_version();
    assert!(!v.is_null());
    let text = unsafe { CStr::from_ptr(v) }.to_str().unwrap();
    assert!(!text.is_empty());
}

#[test]
fn budget_and_domain_checks() {
    let mut out = 0u64;
    assert_eq!(rwlab_query_budget(65, &mut out), RwStatus::Ok);
    assert_eq!(out, 32);
    assert_eq!(rwlab_query_budget(20, &mut out), RwStatus::InvalidArgument);
    assert_eq!(rwlab_query_budget(65, ptr::null_mut()), RwStatus::NullPointer);
}

#[test]
fn valuation_parse_eval_cut_roundtrip() {
    unsafe {
        let mut v: *mut RwValuation = ptr::null_mut();
        let text = c("0/1 4/1 1/4 0/1 1/1");
        assert_eq!(rwlab_valuation_parse(text.as_ptr(), &mut v), RwStatus::Ok);

        let mut out: *mut std::ffi::c_char = ptr::null_mut();
        let x = c("0/1");
        let y = c("1/8");
        assert_eq!(
            rwlab_valuation_eval(v, x.as_ptr(), y.as_ptr(), &mut out),
            RwStatus::Ok
        );
        assert_eq!(take_string(out), "1/2");

        let alpha = c("1/2");
        let mut cut: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(
            rwlab_valuation_cut(v, x.as_ptr(), alpha.as_ptr(), &mut cut),
            RwStatus::Ok
        );
        assert_eq!(take_string(cut), "1/8");

        // Nothing of value remains right of 1/4 for this valuation.
        let far = c("1/4");
        let mut none: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(
            rwlab_valuation_cut(v, far.as_ptr(), alpha.as_ptr(), &mut none),
            RwStatus::NoSuchCut
        );
        assert!(none.is_null());

        rwlab_valuation_free(v);
    }
}

#[test]
fn valuation_parse_rejects_garbage() {
    unsafe {
        let mut v: *mut RwValuation = ptr::null_mut();
        let bad_mass = c("0/1 2/1 1/1");
        assert_eq!(
            rwlab_valuation_parse(bad_mass.as_ptr(), &mut v),
            RwStatus::ParseError
        );
        let not_numbers = c("a b c");
        assert_eq!(
            rwlab_valuation_parse(not_numbers.as_ptr(), &mut v),
            RwStatus::ParseError
        );
        assert_eq!(
            rwlab_valuation_parse(ptr::null(), &mut v),
            RwStatus::NullPointer
        );
    }
}

#[test]
fn instance_build_serialize_parse_attack() {
    unsafe {
        let mut inst: *mut RwInstance = ptr::null_mut();
        assert_eq!(rwlab_instance_build(33, 7, &mut inst), RwStatus::Ok);

        let mut text_out: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(rwlab_instance_to_text(inst, &mut text_out), RwStatus::Ok);
        let text = take_string(text_out);
        assert!(text.starts_with("33 32 1 7"));

        let mut reparsed: *mut RwInstance = ptr::null_mut();
        let text_c = c(&text);
        assert_eq!(
            rwlab_instance_parse(text_c.as_ptr(), &mut reparsed),
            RwStatus::Ok
        );

        // Contiguous equal split in id order, zero queries: the attack
        // must refute it by perturbation.
        let mut allocation = String::new();
        for k in 0..33 {
            allocation.push_str(&format!("{k} {k}/33..{}/33\n", k + 1));
        }
        let allocation = c(&allocation);
        let transcript = c("");
        let mut verdict_out: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(
            rwlab_attack(
                reparsed,
                allocation.as_ptr(),
                transcript.as_ptr(),
                &mut verdict_out
            ),
            RwStatus::Ok
        );
        let verdict = take_string(verdict_out);
        assert!(verdict.contains("verdict: refuted"));
        assert!(verdict.contains("method: perturbation"));

        rwlab_instance_free(inst);
        rwlab_instance_free(reparsed);
    }
}

#[test]
fn attack_rejects_mismatched_sizes() {
    unsafe {
        let mut inst: *mut RwInstance = ptr::null_mut();
        assert_eq!(rwlab_instance_build(33, 7, &mut inst), RwStatus::Ok);
        let allocation = c("0 0/1..1/1\n");
        let transcript = c("");
        let mut out: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(
            rwlab_attack(inst, allocation.as_ptr(), transcript.as_ptr(), &mut out),
            RwStatus::InvalidArgument
        );
        rwlab_instance_free(inst);
    }
}

#[test]
fn bound_functions() {
    let mut out = 0.0f64;
    assert_eq!(rwlab_hoeffding_tail_bound(32, &mut out), RwStatus::Ok);
    assert!((out - (-0.25f64).exp()).abs() < 1e-12);

    assert_eq!(rwlab_union_bound_log(32, &mut out), RwStatus::Ok);
    assert!(out > 0.0);
    assert_eq!(rwlab_union_bound_log(33, &mut out), RwStatus::InvalidArgument);

    let mut tail: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(rwlab_exact_split_tail(32, &mut tail), RwStatus::Ok);
    assert_eq!(unsafe { take_string(tail) }, "7/39");
    assert_eq!(rwlab_exact_split_tail(64, &mut tail), RwStatus::InvalidArgument);
}

#[test]
fn string_free_tolerates_null() {
    unsafe { rwlab_string_free(ptr::null_mut()) };
}
