use std::ffi::{CStr, CString};
use std::ptr;

use qrw_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(qrw_last_error()).to_string_lossy().into_owned() }
}

fn one() -> [QrwComplex; 1] {
    [QrwComplex { re: 1.0, im: 0.0 }]
}

unsafe fn vacuum_label() -> *mut QrwLabel {
    let mut l = ptr::null_mut();
    assert_eq!(qrw_label_new(one().as_ptr(), 1, 1, ptr::null(), ptr::null(), 0, 0.0, &mut l), QRW_OK);
    l
}

unsafe fn constant_label(c: f64, end: f64) -> *mut QrwLabel {
    let mut l = ptr::null_mut();
    let bps = [0.0];
    let vals = [QrwComplex { re: c, im: 0.0 }];
    assert_eq!(qrw_label_new(one().as_ptr(), 1, 1, bps.as_ptr(), vals.as_ptr(), 1, end, &mut l), QRW_OK);
    l
}

#[test]
fn scalar_walk_matches_the_compound_interest_limit() {
    unsafe {
        let (mut walk, mut theta) = (ptr::null_mut(), ptr::null_mut());
        let h = 2f64.powi(-10);
        assert_eq!(qrw_generator_example7(0.0, h, &mut walk), QRW_OK);
        assert_eq!(qrw_generator_example7(0.0, 0.0, &mut theta), QRW_OK);
        let (mut d_h, mut d_k) = (0, 0);
        assert_eq!(qrw_generator_dims(walk, &mut d_h, &mut d_k), QRW_OK);
        assert_eq!((d_h, d_k), (1, 1));
        let (bra, v) = (constant_label(1.0, 1.0), vacuum_label());
        let (mut w, mut l) = (QrwComplex::default(), QrwComplex::default());
        assert_eq!(qrw_walk_element(walk, h, 1.0, QRW_IDENTITY, one().as_ptr(), bra, v, &mut w), QRW_OK);
        assert_eq!(qrw_cocycle_element(theta, 1.0, QRW_IDENTITY, one().as_ptr(), bra, v, &mut l), QRW_OK);
        // e - (1 + 2^-10)^1024, computed to 30 digits independently.
        assert!((l.re - w.re - 0.0013260989926096904).abs() < 1e-12, "{} {}", w.re, l.re);
        assert!(w.im.abs() < 1e-14 && l.im.abs() < 1e-14);
        qrw_label_free(bra);
        qrw_label_free(v);
        qrw_generator_free(walk);
        qrw_generator_free(theta);
    }
}

#[test]
fn elements_agree_with_the_core_crate() {
    use qrw_core::cocycle::semigroup_element_vacuum;
    use qrw_core::generators::example7_theta;
    use qrw_core::linops::Operator;
    use qrw_core::signals::StepFunction;
    use qrw_core::toywalk::ExpVectorLabel;
    unsafe {
        let mut theta = ptr::null_mut();
        assert_eq!(qrw_generator_example7(0.5, 0.0, &mut theta), QRW_OK);
        let ket = constant_label(0.3, 1.0);
        let bra = vacuum_label();
        let mut got = QrwComplex::default();
        assert_eq!(qrw_cocycle_element(theta, 0.7, QRW_VACUUM, one().as_ptr(), bra, ket, &mut got), QRW_OK);
        let a = Operator::from_data(&[1], &[1], vec![1.0.into()]).unwrap();
        let f = StepFunction::new(1, vec![0.0], vec![vec![0.3.into()]], 1.0).unwrap();
        let want = semigroup_element_vacuum(
            &example7_theta(0.5),
            0.7,
            &a,
            &ExpVectorLabel::new(vec![1.0.into()], StepFunction::zero(1)),
            &ExpVectorLabel::new(vec![1.0.into()], f),
        )
        .unwrap();
        assert_eq!((got.re, got.im), (want.re, want.im));
        qrw_label_free(bra);
        qrw_label_free(ket);
        qrw_generator_free(theta);
    }
}

#[test]
fn generator_from_json_and_bad_input() {
    unsafe {
        let mut g = ptr::null_mut();
        let json = CString::new(r#"{"kind": "random_gksl", "d_h": 2, "d_k": 1, "scale": 0.5}"#).unwrap();
        assert_eq!(qrw_generator_from_json(json.as_ptr(), 3, &mut g), QRW_OK);
        let (mut d_h, mut d_k) = (0, 0);
        qrw_generator_dims(g, &mut d_h, &mut d_k);
        assert_eq!(d_h, 2);
        assert!(d_k >= 1);
        // A 1x1 operator is wrong for a 2-dimensional generator.
        let v = vacuum_label();
        let mut out = QrwComplex::default();
        assert_eq!(qrw_walk_element(g, 0.1, 1.0, QRW_VACUUM, one().as_ptr(), v, v, &mut out), QRW_ERR_INPUT);
        assert!(!last_error().is_empty());
        let a = [QrwComplex::default(); 4];
        assert_eq!(qrw_walk_element(g, 0.1, 1.0, 7, a.as_ptr(), v, v, &mut out), QRW_ERR_INPUT);
        assert!(last_error().contains("adaptedness"));
        qrw_label_free(v);
        qrw_generator_free(g);

        let broken = CString::new("{ nope").unwrap();
        assert_eq!(qrw_generator_from_json(broken.as_ptr(), 0, &mut g), QRW_ERR_INPUT);
        assert_eq!(qrw_generator_from_json(ptr::null(), 0, &mut g), QRW_ERR_NULL);
        assert!(last_error().contains("json"));
    }
}

#[test]
fn null_handles_are_reported() {
    unsafe {
        let mut out = QrwComplex::default();
        let rc = qrw_walk_element(ptr::null(), 0.1, 1.0, QRW_VACUUM, one().as_ptr(), ptr::null(), ptr::null(), &mut out);
        assert_eq!(rc, QRW_ERR_NULL);
        assert_eq!(qrw_sweep_passed(ptr::null()), -1);
        assert_eq!(qrw_sweep_len(ptr::null()), 0);
        qrw_generator_free(ptr::null_mut());
        qrw_label_free(ptr::null_mut());
        qrw_sweep_free(ptr::null_mut());
        qrw_string_free(ptr::null_mut());
    }
}

#[test]
fn sweep_round_trip() {
    let cfg = CString::new(
        r#"{
          "limit": {"kind": "random_gksl", "d_h": 2, "d_k": 1, "scale": 0.5, "seed": 1},
          "family": "euler",
          "adaptedness": "vacuum",
          "h_exponents": [1, 2, 3, 4],
          "t_max": 1.0,
          "tests": [{"bra": {"u": [1, 0]}, "ket": {"u": [0, 1], "f": {"breakpoints": [0, 0.5], "values": [[0.8], [0]]}}}],
          "a_list": "units",
          "tol": 0.5
        }"#,
    )
    .unwrap();
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(qrw_sweep_run(cfg.as_ptr(), 0, &mut r), QRW_OK, "{}", last_error());
        assert_eq!(qrw_sweep_passed(r), 1);
        let n = qrw_sweep_len(r);
        assert_eq!(n, 4);
        let mut sups = Vec::new();
        for i in 0..n {
            let (mut h, mut s) = (0.0, 0.0);
            assert_eq!(qrw_sweep_sup(r, i, &mut h, &mut s), QRW_OK);
            assert_eq!(h, 0.5f64.powi(i as i32 + 1));
            sups.push(s);
        }
        assert!(sups.windows(2).all(|w| w[1] < w[0]), "{sups:?}");
        let (mut h, mut s) = (0.0, 0.0);
        assert_eq!(qrw_sweep_sup(r, n, &mut h, &mut s), QRW_ERR_INPUT);

        let mut csv = ptr::null_mut();
        assert_eq!(qrw_sweep_csv(r, &mut csv), QRW_OK);
        assert!(CStr::from_ptr(csv).to_str().unwrap().starts_with("h,t,test_id"));
        qrw_string_free(csv);
        let mut json = ptr::null_mut();
        assert_eq!(qrw_sweep_json(r, &mut json), QRW_OK);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(v["passed"], serde_json::json!(true));
        qrw_string_free(json);
        qrw_sweep_free(r);
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qrw.h")).unwrap();
    for name in [
        "qrw_last_error",
        "qrw_generator_from_json",
        "qrw_generator_example7",
        "qrw_generator_free",
        "qrw_label_new",
        "qrw_walk_element",
        "qrw_cocycle_element",
        "qrw_sweep_run",
        "qrw_sweep_sup",
        "qrw_string_free",
        "typedef struct QrwGenerator QrwGenerator",
        "#define QRW_ERR_BUDGET 3",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
