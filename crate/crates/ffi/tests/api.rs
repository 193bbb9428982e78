use std::ffi::{CStr, CString};
use std::ptr;

use stochexp_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(se_last_error_message()) }.to_string_lossy().into_owned()
}

fn integrand(json: &str) -> *mut SeIntegrand {
    let text = CString::new(json).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { se_integrand_from_json(text.as_ptr(), &mut h) }, SeStatus::Ok, "{}", last_error());
    h
}

#[test]
fn integrand_round_trip() {
    let h = integrand(r#"{"kind": "polynomial", "params": [0, 1]}"#);
    let mut v = 0.0;
    unsafe {
        assert_eq!(se_eval_psi(h, 0.5, &mut v), SeStatus::Ok);
        assert_eq!(v, 0.5);
        assert_eq!(se_phi(h, 2.0, &mut v), SeStatus::Ok);
        assert!((v - 8.0 / 3.0).abs() < 1e-12);
        se_integrand_free(h);
    }
}

#[test]
fn parse_errors_are_reported() {
    let text = CString::new(r#"{"params": [1]}"#).unwrap();
    let mut h = ptr::null_mut();
    let status = unsafe { se_integrand_from_json(text.as_ptr(), &mut h) };
    assert_eq!(status, SeStatus::Parse);
    assert!(h.is_null());
    assert!(last_error().contains("kind"));

    assert_eq!(unsafe { se_integrand_from_json(ptr::null(), &mut h) }, SeStatus::NullPointer);
    assert_eq!(unsafe { se_integrand_constant(f64::NAN, &mut h) }, SeStatus::InvalidArgument);
    assert!(h.is_null());
}

#[test]
fn novikov_through_ffi() {
    let h = integrand(r#"{"kind": "inverse_sqrt_blowup", "params": [1], "blowup_time": 1}"#);
    let (mut div, mut half) = (-1, 0.0);
    unsafe {
        assert_eq!(se_novikov_check(h, 1.0, &mut div, &mut half), SeStatus::Ok);
        assert_eq!((div, half), (1, f64::INFINITY));
        assert_eq!(se_novikov_check(h, 0.5, &mut div, &mut half), SeStatus::Ok);
        assert_eq!(div, 0);
        assert!((half - 0.5 * std::f64::consts::LN_2).abs() < 1e-9);

        let times = [0.0, 0.5, 1.0];
        let mut b = ptr::null_mut();
        let s = se_bundle_simulate(h, times.as_ptr(), 3, 100, 1, 0, SeScheme::Exact, false, &mut b);
        assert_eq!(s, SeStatus::Divergent);
        assert!(b.is_null());
        se_integrand_free(h);
    }
}

#[test]
fn bundle_and_estimates() {
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(se_integrand_constant(1.0, &mut h), SeStatus::Ok);
        let times: Vec<f64> = (0..=4).map(|i| i as f64 / 4.0).collect();
        let mut b = ptr::null_mut();
        let s = se_bundle_simulate(h, times.as_ptr(), times.len(), 20_000, 3, 0, SeScheme::Exact, false, &mut b);
        assert_eq!(s, SeStatus::Ok);
        assert_eq!((se_bundle_n_paths(b), se_bundle_n_nodes(b)), (20_000, 5));

        let mut z = vec![0.0; 20_000 * 5];
        assert_eq!(se_bundle_copy_z(b, z.as_mut_ptr(), z.len()), SeStatus::Ok);
        assert!(z.chunks(5).all(|row| row[0] == 1.0));
        assert_eq!(se_bundle_copy_z(b, z.as_mut_ptr(), 3), SeStatus::InvalidArgument);

        let mut comp = [0.0; 5];
        assert_eq!(se_bundle_copy_compensator(b, comp.as_mut_ptr(), 5), SeStatus::Ok);
        assert_eq!(comp, [0.0, 0.25, 0.5, 0.75, 1.0]);

        let mut est = std::mem::zeroed::<SeEstimate>();
        assert_eq!(se_estimate_p_moment(b, 4, 2.0, &mut est), SeStatus::Ok);
        assert_eq!(est.target, std::f64::consts::E);
        assert_eq!(est.n, 20_000);
        assert_eq!(est.pass, 1);
        let rust_mean = z.chunks(5).map(|r| r[4] * r[4]).sum::<f64>() / 20_000.0;
        assert!((est.estimate - rust_mean).abs() < 1e-12);

        let (mut gap, mut pass) = (0.0, -1);
        assert_eq!(se_martingale_test(b, 2, 4, 16, &mut gap, &mut pass), SeStatus::Ok);
        assert_eq!(pass, 1);
        assert_eq!(se_martingale_test(b, 4, 2, 16, &mut gap, &mut pass), SeStatus::InvalidArgument);

        se_bundle_free(b);
        se_integrand_free(h);
        assert_eq!(se_bundle_n_paths(ptr::null()), 0);
        se_bundle_free(ptr::null_mut());
    }
}

#[test]
fn wick_functions() {
    let mut v = 0.0;
    let mut c = 0u64;
    unsafe {
        assert_eq!(se_gaussian_moment(2.0, 4, &mut v), SeStatus::Ok);
        assert_eq!(v, 12.0);
        assert_eq!(se_gaussian_moment(1.0, 16, &mut v), SeStatus::Capacity);
        assert_eq!(se_pairing_count(14, &mut c), SeStatus::Ok);
        assert_eq!(c, 135_135);
        assert_eq!(se_pairing_count(7, &mut c), SeStatus::Ok);
        assert_eq!(c, 0);

        let mut h = ptr::null_mut();
        se_integrand_constant(1.0, &mut h);
        let mut total = 0.0;
        assert_eq!(se_mgf_truncated(h, 1.0, 14, &mut total), SeStatus::Ok);
        assert!((total.ln() - 0.5).abs() < 1e-6);
        let mut terms = [f64::NAN; 14];
        assert_eq!(se_cgf_truncated(h, 1.0, 14, terms.as_mut_ptr(), 14, &mut total), SeStatus::Ok);
        assert_eq!(terms[1], 0.5);
        assert_eq!(terms[0].to_bits(), 0);
        assert!(terms[2..].iter().all(|t| t.to_bits() == 0));
        assert_eq!(total, 0.5);
        let (mut gap, mut bound, mut pass) = (0.0, 0.0, 0);
        assert_eq!(se_log_relation(h, 1.0, 14, &mut gap, &mut bound, &mut pass), SeStatus::Ok);
        assert_eq!(pass, 1);
        assert!(gap <= bound);
        assert_eq!(se_log_relation(h, 1.0, 3, &mut gap, &mut bound, &mut pass), SeStatus::InvalidArgument);
        se_integrand_free(h);
    }
}
