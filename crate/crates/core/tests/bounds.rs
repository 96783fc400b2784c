use asyncap::bounds::{
    alpha_bar, discontinuity_at_capacity, discontinuity_at_zero, gaussian_lower_bound, lower_bound_alpha, sweep,
    sync_threshold, training_bounds, upper_bound_alpha, Quantization, DEFAULT_DISCONTINUITY_TOL,
};
use asyncap::channel_file::bundled;
use asyncap::prob::{blahut_arimoto, DEFAULT_BA_TOL};
use asyncap::simplex::GridSpec;
use asyncap::{Channel, Error};

fn channel(name: &str) -> Channel {
    bundled(name).unwrap().to_channel().unwrap()
}

fn capacity(q: &Channel) -> f64 {
    blahut_arimoto(q, None, DEFAULT_BA_TOL).unwrap().capacity
}

/// Min-max divergence between two binary laws, found by bisection on the
/// equalization condition of the tilted family.
fn binary_chernoff(a: f64, b: f64) -> f64 {
    let tilt = |l: f64| {
        let u = a.powf(l) * b.powf(1.0 - l);
        let v = (1.0 - a).powf(l) * (1.0 - b).powf(1.0 - l);
        u / (u + v)
    };
    let d = |p: f64, q: f64| p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln();
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = tilt(mid);
        if d(v, a) > d(v, b) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    d(tilt(lo), a)
}

#[test]
fn fig3_lower_bound_at_capacity_matches_bisection_oracle() {
    let q = channel("fig3");
    let p = lower_bound_alpha(&q, capacity(&q), &GridSpec::default()).unwrap();
    let oracle = binary_chernoff(0.5, 0.9);
    assert!((p.alpha - oracle).abs() < 1e-7, "{} vs {oracle}", p.alpha);
    assert!((p.alpha - 0.12).abs() < 0.01);
}

#[test]
fn zchannel_constants() {
    let q = channel("zchannel");
    let c = capacity(&q);
    assert!((c - 1.25f64.ln()).abs() < 1e-8);
    let g = GridSpec::default();
    assert!((alpha_bar(&q, &g).unwrap().alpha - 2f64.ln()).abs() < 1e-9);
    assert!((lower_bound_alpha(&q, c, &g).unwrap().alpha + 0.8f64.ln()).abs() < 1e-6);
    assert!(discontinuity_at_zero(&q));
    assert_eq!(sync_threshold(&q), f64::INFINITY);
    for r in [0.3 * c, c] {
        assert!((upper_bound_alpha(&q, r, &g).unwrap().alpha - 2f64.ln()).abs() < 1e-6);
    }
}

#[test]
fn fig3_training_constants() {
    let q = channel("fig3");
    let c = capacity(&q);
    let t = training_bounds(&q, 0.5 * c, &GridSpec::default()).unwrap();
    assert!((t.m1 - (5.0f64 / 3.0).ln()).abs() < 1e-9);
    assert!((t.m2 - 10f64.ln()).abs() < 1e-12);
    assert!((t.eta - 0.5).abs() < 1e-12);
    assert!((t.lower.alpha - 0.5 * t.m1).abs() < 1e-9);
    assert!(t.lower.alpha <= t.upper.alpha);
}

#[test]
fn fig4_is_continuous_and_fig3_is_not() {
    assert!(!discontinuity_at_capacity(&channel("fig4"), DEFAULT_DISCONTINUITY_TOL).unwrap());
    assert!(discontinuity_at_capacity(&channel("fig3"), DEFAULT_DISCONTINUITY_TOL).unwrap());
    let fig4 = channel("fig4");
    assert!((sync_threshold(&fig4) - binary_kl(0.9, 0.5)).abs() < 1e-12);
}

fn binary_kl(p: f64, q: f64) -> f64 {
    p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln()
}

#[test]
fn ternary_sweep_is_ordered_and_monotone() {
    let q = Channel::new(
        vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.8, 0.1], vec![0.2, 0.2, 0.6]],
        0,
    )
    .unwrap();
    let c = capacity(&q);
    let rates: Vec<f64> = (1..=5).map(|k| c * k as f64 / 5.0).collect();
    let s = sweep(&q, &rates, &GridSpec::default()).unwrap();
    let rows: Vec<_> = s.rows.iter().map(|r| r.values.as_ref().unwrap()).collect();
    for v in &rows {
        assert!(v.alpha_lower.alpha <= v.alpha_upper.alpha + 1e-9);
        assert!(v.train_lower <= v.train_upper + 1e-9);
        assert!(v.alpha_upper.alpha <= s.header.sync_threshold + 1e-9);
    }
    for w in rows.windows(2) {
        assert!(w[1].alpha_lower.alpha <= w[0].alpha_lower.alpha);
        assert!(w[1].alpha_upper.alpha <= w[0].alpha_upper.alpha);
    }
}

#[test]
fn large_alphabet_uses_ascent() {
    let q = Channel::new(
        vec![
            vec![0.6, 0.2, 0.1, 0.1],
            vec![0.1, 0.7, 0.1, 0.1],
            vec![0.1, 0.1, 0.7, 0.1],
            vec![0.1, 0.1, 0.1, 0.7],
        ],
        0,
    )
    .unwrap();
    let c = capacity(&q);
    let g = GridSpec::default();
    let lo = lower_bound_alpha(&q, 0.5 * c, &g).unwrap();
    let hi = upper_bound_alpha(&q, 0.5 * c, &g).unwrap();
    assert!(lo.alpha > 0.0 && lo.alpha <= hi.alpha + 1e-9);
}

#[test]
fn rates_outside_range_are_rejected() {
    let q = channel("fig3");
    let g = GridSpec::default();
    for r in [0.0, -0.1, 0.5] {
        assert!(matches!(lower_bound_alpha(&q, r, &g), Err(Error::RateOutOfRange { .. })));
    }
}

#[test]
fn gaussian_bound_decreases_with_rate() {
    let quant = Quantization { range: 20.0, cell: 0.02 };
    let cap = 0.5 * 2f64.ln();
    let vals: Vec<f64> = [0.05, 0.1, 0.2, 0.3]
        .iter()
        .map(|&r| gaussian_lower_bound(1.0, r, &quant).unwrap().alpha)
        .collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    // at capacity the mean vanishes: zero-mean laws with variances 2 and 1
    let closed = (0..=100_000)
        .map(|i| {
            let l = i as f64 * 1e-5;
            let (s0, s1) = (2f64, 1f64);
            0.5 * (l * s0.ln() + (1.0 - l) * s1.ln()) + 0.5 * (l / s0 + (1.0 - l) / s1).ln()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let at_cap = gaussian_lower_bound(1.0, cap, &quant).unwrap().alpha;
    assert!((at_cap - closed).abs() < 1e-4, "{at_cap} vs {closed}");
}
