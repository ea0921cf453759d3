use std::ffi::CStr;
use std::ptr;

use mittag_ffi::*;

#[test]
fn evaluator_handle_round_trip() {
    let mut h: *mut MittagEvaluator = ptr::null_mut();
    let st = unsafe { mittag_evaluator_new(1.0, 1.0, 1.0, 1.0, &mut h) };
    assert_eq!(st, MittagStatus::Ok);
    assert!(!h.is_null());
    let r = [0.0, 0.5, 3.0, 40.0];
    let (mut re, mut im) = ([0.0; 4], [0.0; 4]);
    let st = unsafe { mittag_evaluator_eval(h, r.as_ptr(), r.len(), re.as_mut_ptr(), im.as_mut_ptr()) };
    assert_eq!(st, MittagStatus::Ok);
    for (k, &x) in r.iter().enumerate() {
        let want = (-x).exp();
        assert!((re[k] - want).abs() <= 1e-13 * want.max(1e-300) + 1e-300, "r={x}");
        assert!(im[k].abs() < 1e-13);
    }
    let bad = [-1.0];
    let st = unsafe { mittag_evaluator_eval(h, bad.as_ptr(), 1, re.as_mut_ptr(), im.as_mut_ptr()) };
    assert_eq!(st, MittagStatus::Invalid);
    unsafe { mittag_evaluator_free(h) };
    unsafe { mittag_evaluator_free(ptr::null_mut()) };
}

#[test]
fn non_decay_evaluator_rejected_with_message() {
    let mut h: *mut MittagEvaluator = ptr::null_mut();
    let st = unsafe { mittag_evaluator_new(0.5, 1.0, 0.1, 1.0, &mut h) };
    assert_eq!(st, MittagStatus::Invalid);
    assert!(h.is_null());
    let msg = unsafe { CStr::from_ptr(mittag_last_error()) }.to_string_lossy().into_owned();
    assert!(msg.contains("non-decay"), "{msg}");
}

#[test]
fn ray_and_bessel_values() {
    let (mut re, mut im) = (0.0, 0.0);
    // E_{2,1}(z) = cosh √z
    let st = unsafe { mittag_mlf_series(2.0, 1.0, 2.25, 0.0, &mut re, &mut im) };
    assert_eq!(st, MittagStatus::Ok);
    assert!((re - 1.5f64.cosh()).abs() < 1e-12 * 1.5f64.cosh());
    // E_{1,1}(−r) along s = 1, past the series radius
    let st = unsafe { mittag_mlf_ray(1.0, 1.0, 1.0, 1.0, 9.0, &mut re, &mut im) };
    assert_eq!(st, MittagStatus::Ok);
    assert!((re - (-9.0f64).exp()).abs() < 1e-12 * (-9.0f64).exp());
    let mut j = 0.0;
    let st = unsafe { mittag_bessel_j(0.5, 2.0, &mut j) };
    assert_eq!(st, MittagStatus::Ok);
    let want = (2.0 / (std::f64::consts::PI * 2.0)).sqrt() * 2f64.sin();
    assert!((j - want).abs() < 1e-14);
    let st = unsafe { mittag_bessel_j(-1.0, 2.0, &mut j) };
    assert_eq!(st, MittagStatus::Invalid);
}

#[test]
fn admissible_range() {
    let (mut lo, mut hi, mut inc) = (0.0, 0.0, 0);
    let st = unsafe { mittag_admissible_exponents(0.5, 2, &mut lo, &mut hi, &mut inc) };
    assert_eq!(st, MittagStatus::Ok);
    // γp′ > d with γ = 1/2, d = 2 gives p < 4/3
    assert_eq!(lo, 1.0);
    assert!((hi - 4.0 / 3.0).abs() < 1e-15);
    assert_eq!(inc, 0);
}

#[test]
fn kernel_handle_gaussian_case() {
    // E_1(−|ξ|²) = e^{−|ξ|²}; its transform in d = 1 is √π e^{−π²x²}
    let mut h: *mut MittagKernel = ptr::null_mut();
    assert_eq!(unsafe { mittag_kernel_new(1.0, 1.0, 1.0, 2.0, 1, &mut h) }, MittagStatus::Ok);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { mittag_kernel_eval(h, 0.25, &mut re, &mut im) }, MittagStatus::Ok);
    let want = std::f64::consts::PI.sqrt() * (-(std::f64::consts::PI * 0.25).powi(2)).exp();
    assert!((re - want).abs() < 1e-10 * want);
    assert_eq!(unsafe { mittag_kernel_eval(h, 0.0, &mut re, &mut im) }, MittagStatus::Invalid);
    unsafe { mittag_kernel_free(h) };
}

#[test]
fn problem_handle_solves_heat() {
    let mut h: *mut MittagProblem = ptr::null_mut();
    assert_eq!(unsafe { mittag_problem_new(1.0, 2.0, 0.0, 1.0, 1.0, &mut h) }, MittagStatus::Ok);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { mittag_problem_multiplier(h, 0.5, 2.0, &mut re, &mut im) }, MittagStatus::Ok);
    assert!((re - (-2.0f64).exp()).abs() < 1e-15);
    let n = 256;
    let (mut ur, mut ui) = (vec![0.0; n], vec![0.0; n]);
    let t = 0.3;
    let st = unsafe { mittag_problem_solve(h, 1, n, 40.0, t, ur.as_mut_ptr(), ui.as_mut_ptr(), n) };
    assert_eq!(st, MittagStatus::Ok);
    // centre sample sits at x = 0
    let c = 1.0 + t / (std::f64::consts::PI * std::f64::consts::PI);
    assert!((ur[n / 2] - c.powf(-0.5)).abs() < 1e-12);
    let st = unsafe { mittag_problem_solve(h, 1, n, 40.0, t, ur.as_mut_ptr(), ui.as_mut_ptr(), n - 1) };
    assert_eq!(st, MittagStatus::NullPointer);
    unsafe { mittag_problem_free(h) };
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/mittag.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 14);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    for ty in ["typedef struct MittagEvaluator", "typedef struct MittagKernel", "typedef struct MittagProblem"] {
        assert!(header.contains(ty));
    }
}
