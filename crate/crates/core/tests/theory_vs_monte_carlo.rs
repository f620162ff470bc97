//! Closed-form toral predictions against `mu(A_n^(q)) / mu(U_n)` sampled in the tube.

use hypex_core::diagnostics::{aq_ratio, DiagnosticsOptions};
use hypex_core::geometry::LineSegment;
use hypex_core::observables::Observable;
use hypex_core::systems::{System, ToralAutomorphism};
use hypex_core::theory::{predict_theta_toral, stable_displayed_theta};

const N: usize = 10_000;
const SAMPLES: usize = 100_000;

fn opts() -> DiagnosticsOptions {
    DiagnosticsOptions { burn_in: 100, ..Default::default() }
}

/// Segment `[a, b]` in line parameter from the fixed point at the origin.
fn from_origin(dir: [f64; 2], a: f64, len: f64) -> LineSegment {
    LineSegment::new([a * dir[0], a * dir[1]], dir, len).unwrap()
}

#[test]
fn unstable_offset_segment() {
    let cat = ToralAutomorphism::cat_map();
    let seg = from_origin(cat.v_plus(), 0.1, 0.5);
    let p = predict_theta_toral(&cat, &seg, 12).unwrap();
    assert_eq!(p.case_label, "Thm2.1-case5");
    let big = cat.lambda_plus();
    // [0.1, 0.6] against its preimage [0.1/L, 0.6/L]
    let want = 1.0 - (0.6 / big - 0.1) / 0.5;
    assert!((p.value - want).abs() < 1e-12);
    let r = aq_ratio(&System::cat_map(), &Observable::NegLogSegment(seg), 1, N, SAMPLES, 41, &opts()).unwrap();
    assert_eq!(r.sampler, "tube");
    assert!((r.ratio - p.value).abs() < 3.0 * r.stderr, "{r:?} vs {}", p.value);
}

#[test]
fn stable_offset_segment_follows_overlap_value() {
    let cat = ToralAutomorphism::cat_map();
    let seg = from_origin(cat.v_minus(), 0.05, 0.55);
    let p = predict_theta_toral(&cat, &seg, 12).unwrap();
    assert_eq!(p.case_label, "Thm2.1-case6");
    let big = cat.lambda_plus();
    assert!(p.lo <= p.value && p.value <= p.hi && (p.lo - (1.0 - 1.0 / big)).abs() < 1e-12);
    let r = aq_ratio(&System::cat_map(), &Observable::NegLogSegment(seg), 1, N, SAMPLES, 42, &opts()).unwrap();
    assert!((r.ratio - p.value).abs() < 3.0 * r.stderr, "{r:?} vs {}", p.value);
    // the alternative closed form sits well outside the sampling error
    let displayed = stable_displayed_theta(0.05, 0.6, big);
    assert!((r.ratio - displayed).abs() > 20.0 * r.stderr, "{displayed}");
}

#[test]
fn aq_ratio_non_increasing_in_q() {
    let cat = ToralAutomorphism::cat_map();
    let seg = LineSegment::centered([0.2, 0.4], cat.v_plus(), 0.5).unwrap();
    let obs = Observable::NegLogSegment(seg);
    let ratios: Vec<f64> = (0..=4)
        .map(|q| aq_ratio(&System::cat_map(), &obs, q, 1_000, 20_000, 7, &opts()).unwrap().ratio)
        .collect();
    assert_eq!(ratios[0], 1.0);
    assert!(ratios.windows(2).all(|w| w[1] <= w[0]), "{ratios:?}");
    // the period-2 return is what removes mass
    assert!(ratios[1] > 0.99 && ratios[2] < 0.9, "{ratios:?}");
}
