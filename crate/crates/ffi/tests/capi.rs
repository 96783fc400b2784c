use std::ffi::{CStr, CString};
use std::ptr;

use asyncap_ffi::*;

fn bsc() -> *mut AsyncapChannel {
    let rows = [0.9, 0.1, 0.1, 0.9];
    let mut ch = ptr::null_mut();
    let s = unsafe { asyncap_channel_new(rows.as_ptr(), 2, 2, 0, &mut ch) };
    assert_eq!(s, AsyncapStatus::Ok);
    ch
}

fn last_error() -> String {
    let p = asyncap_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn capacity_and_threshold() {
    let ch = bsc();
    let (mut c, mut t) = (0.0, 0.0);
    unsafe {
        assert_eq!(asyncap_capacity(ch, &mut c), AsyncapStatus::Ok);
        assert_eq!(asyncap_sync_threshold(ch, &mut t), AsyncapStatus::Ok);
        assert_eq!((asyncap_channel_inputs(ch), asyncap_channel_outputs(ch)), (2, 2));
        asyncap_channel_free(ch);
    }
    let h = -(0.1f64 * 0.1f64.ln() + 0.9 * 0.9f64.ln());
    assert!((c - (2f64.ln() - h)).abs() < 1e-8);
    assert!((t - 0.8 * 9f64.ln()).abs() < 1e-12);
    assert!(asyncap_last_error().is_null());
}

#[test]
fn bounds_are_ordered() {
    let ch = bsc();
    let grid = asyncap_grid_default();
    let (mut lo, mut hi) = (0.0, 0.0);
    let mut tb = AsyncapTrainingBounds::default();
    unsafe {
        assert_eq!(asyncap_lower_bound(ch, 0.2, &grid, &mut lo), AsyncapStatus::Ok);
        assert_eq!(asyncap_upper_bound(ch, 0.2, ptr::null(), &mut hi), AsyncapStatus::Ok);
        assert_eq!(asyncap_training_bounds(ch, 0.2, ptr::null(), &mut tb), AsyncapStatus::Ok);
    }
    assert!(lo > 0.0 && lo <= hi + 1e-9, "{lo} {hi}");
    assert!(tb.lower <= tb.upper + 1e-9);
    assert!((tb.m1 - (5.0f64 / 3.0).ln()).abs() < 1e-9, "{}", tb.m1);

    let mut x = 0.0;
    let s = unsafe { asyncap_lower_bound(ch, 0.5, &grid, &mut x) };
    assert_eq!(s, AsyncapStatus::RateOutOfRange);
    assert!(last_error().contains("0.5"));
    unsafe { asyncap_channel_free(ch) };
}

#[test]
fn chernoff_symmetric_pair() {
    let (a, b) = ([0.9, 0.1], [0.1, 0.9]);
    let (mut v, mut l) = (0.0, 0.0);
    let s = unsafe { asyncap_chernoff(a.as_ptr(), b.as_ptr(), 2, &mut v, &mut l) };
    assert_eq!(s, AsyncapStatus::Ok);
    assert!((v + 0.6f64.ln()).abs() < 1e-9);
    assert!((l - 0.5).abs() < 1e-6);
    let s = unsafe { asyncap_chernoff(a.as_ptr(), b.as_ptr(), 2, &mut v, ptr::null_mut()) };
    assert_eq!(s, AsyncapStatus::Ok);
}

#[test]
fn gaussian_bound_is_positive() {
    let mut g = 0.0;
    let s = unsafe { asyncap_gaussian_lower_bound(1.0, 0.1, 8.0, 0.05, &mut g) };
    assert_eq!(s, AsyncapStatus::Ok);
    assert!(g > 0.0 && g.is_finite());
    let s = unsafe { asyncap_gaussian_lower_bound(-1.0, 0.1, 8.0, 0.05, &mut g) };
    assert_eq!(s, AsyncapStatus::InvalidArgument);
}

#[test]
fn constructors_reject_bad_input() {
    let mut ch = ptr::null_mut();
    let rows = [0.5, 0.4, 0.1, 0.9];
    unsafe {
        assert_eq!(asyncap_channel_new(rows.as_ptr(), 2, 2, 0, &mut ch), AsyncapStatus::InvalidChannel);
        assert!(ch.is_null());
        assert_eq!(asyncap_channel_new(ptr::null(), 2, 2, 0, &mut ch), AsyncapStatus::NullPointer);
        let bad = CString::new("{").unwrap();
        assert_eq!(asyncap_channel_from_json(bad.as_ptr(), &mut ch), AsyncapStatus::InvalidChannel);
        let name = CString::new("nope").unwrap();
        assert_eq!(asyncap_channel_bundled(name.as_ptr(), &mut ch), AsyncapStatus::InvalidArgument);
        let mut c = 0.0;
        assert_eq!(asyncap_capacity(ptr::null(), &mut c), AsyncapStatus::NullPointer);
        asyncap_channel_free(ptr::null_mut());
    }
}

#[test]
fn json_and_bundled_agree() {
    let json = CString::new(
        r#"{"schema_version":1,"name":"z","input_alphabet":["0","1"],"output_alphabet":["0","1"],
            "star":"0","rows":[[1,0],[0.5,0.5]]}"#,
    )
    .unwrap();
    let name = CString::new("zchannel").unwrap();
    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    let (mut ca, mut cb, mut ta) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(asyncap_channel_from_json(json.as_ptr(), &mut a), AsyncapStatus::Ok);
        assert_eq!(asyncap_channel_bundled(name.as_ptr(), &mut b), AsyncapStatus::Ok);
        asyncap_capacity(a, &mut ca);
        asyncap_capacity(b, &mut cb);
        asyncap_sync_threshold(a, &mut ta);
        asyncap_channel_free(a);
        asyncap_channel_free(b);
    }
    assert_eq!(ca, cb);
    assert!(ta.is_infinite());
}

#[test]
fn simulate_genie_and_config_errors() {
    let ch = bsc();
    let mut cfg = asyncap_sim_config_default(AsyncapScheme::Genie);
    cfg.n = 40;
    cfg.alpha = 0.05;
    cfg.messages = 4;
    cfg.trials = 10;
    cfg.seed = 7;
    let mut r = AsyncapSimResult::default();
    assert_eq!(unsafe { asyncap_simulate(ch, &cfg, &mut r) }, AsyncapStatus::Ok);
    assert_eq!(r.trials_per_message, 10);
    assert!(r.avg_error_rate <= r.max_error_rate && r.max_error_rate <= 1.0);
    assert!(r.mean_reaction_delay > 0.0);
    assert_eq!(r.async_level, (0.05f64 * 40.0).exp().floor() as u64);

    let mut again = AsyncapSimResult::default();
    cfg.threads = 1;
    unsafe { asyncap_simulate(ch, &cfg, &mut again) };
    assert_eq!(r.avg_error_rate.to_bits(), again.avg_error_rate.to_bits());

    let mut train = asyncap_sim_config_default(AsyncapScheme::Training);
    train.n = 40;
    let s = unsafe { asyncap_simulate(ch, &train, &mut r) };
    assert_eq!(s, AsyncapStatus::InvalidConfig);
    assert!(!last_error().is_empty());

    let p = [0.5, 0.5, 0.0];
    cfg.input_dist = p.as_ptr();
    cfg.input_dist_len = 3;
    assert_ne!(unsafe { asyncap_simulate(ch, &cfg, &mut r) }, AsyncapStatus::Ok);
    unsafe { asyncap_channel_free(ch) };
}

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(asyncap_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
