use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use proptest::prelude::*;
use stband::experiments::{
    bonnet_myers, counterexample_audit, dice, waist_average, width_bound, WidthTheorem,
};
use stband::geometry::MetricSpec;
use stband::Error;

#[test]
fn round_band_saturates_ricci_width() {
    let m = MetricSpec::round_band(FRAC_PI_4, FRAC_PI_4, 3).unwrap();
    let v = width_bound(&m, m.band().unwrap(), WidthTheorem::Ricci).unwrap();
    assert!((v.width - PI / 2.0).abs() < 1e-12);
    assert!((v.h_minus - 2.0).abs() < 1e-12 && (v.h_plus - 2.0).abs() < 1e-12);
    assert!(v.saturated && v.holds, "{v:?}");
}

#[test]
fn asymmetric_round_band_saturates() {
    // H± = (n−1) tan θ± on the unit sphere
    let m = MetricSpec::round_band(0.3, 1.1, 4).unwrap();
    let v = width_bound(&m, m.band().unwrap(), WidthTheorem::Ricci).unwrap();
    assert!((v.h_minus - 3.0 * 0.3f64.tan()).abs() < 1e-10);
    assert!((v.bound - 1.4).abs() < 1e-10 && v.saturated);
    let inner = width_bound(&m, (-0.2, 0.9), WidthTheorem::Ricci).unwrap();
    assert!(inner.saturated);
}

#[test]
fn torus_extremal_saturates_scalar_width() {
    let m = MetricSpec::torus_extremal(PI / 3.0).unwrap();
    let v = width_bound(&m, m.band().unwrap(), WidthTheorem::Torus).unwrap();
    assert!((v.h0 - 2.0).abs() < 1e-10, "{}", v.h0);
    assert!((v.bound - PI / 3.0).abs() < 1e-10);
    assert!(v.saturated && v.holds);
    assert!(v.curvature_min >= 6.0 - 1e-9);
}

#[test]
fn upsilon_family_saturates_two_ricci_width() {
    for ups in [0.0, 0.3, 0.5, 1.0] {
        let m = MetricSpec::g_upsilon(ups, FRAC_PI_8).unwrap();
        let v = width_bound(&m, m.band().unwrap(), WidthTheorem::TwoRicci).unwrap();
        assert!((v.h0 - 2.0).abs() < 1e-10, "Υ = {ups}: {}", v.h0);
        assert!(v.saturated, "Υ = {ups}: {v:?}");
    }
    // at H₀ = 2 the 2-Ricci bound sits strictly below the scalar one
    assert!((2.0f64 / 2.0).atan() < 4.0 / 3.0 * (2.0f64 / 2.0).atan());
}

#[test]
fn narrower_upsilon_band_is_strict() {
    let m = MetricSpec::g_upsilon(0.5, 0.3).unwrap();
    let v = width_bound(&m, (-0.1, 0.2), WidthTheorem::TwoRicci).unwrap();
    assert!(v.holds && !v.saturated && v.width < v.bound);
}

#[test]
fn hypotheses_are_enforced() {
    let flat = MetricSpec::flat(1.0).unwrap();
    for t in [WidthTheorem::Ricci, WidthTheorem::Torus, WidthTheorem::TwoRicci] {
        assert!(matches!(width_bound(&flat, (0.0, 1.0), t), Err(Error::Hypothesis(_))), "{t:?}");
    }
    // sphere fibers are excluded from the torus theorems even with R ≥ 6
    let round = MetricSpec::round_band(FRAC_PI_4, FRAC_PI_4, 3).unwrap();
    assert!(matches!(width_bound(&round, (-0.5, 0.5), WidthTheorem::Torus), Err(Error::Hypothesis(_))));
    assert!(matches!(width_bound(&round, (-1.0, 0.5), WidthTheorem::Ricci), Err(Error::Param(_))));
}

#[test]
fn bonnet_myers_sum_is_length() {
    let round = MetricSpec::sine_warped(1.0, 1.0, 0.0, 3).unwrap();
    let r = bonnet_myers(&round, 0.1).unwrap();
    assert!((r.sum - PI).abs() < 1e-12 && r.saturated && r.holds);
    let small = MetricSpec::sine_warped(1.0, 0.9, 0.0, 4).unwrap();
    let r = bonnet_myers(&small, 0.2).unwrap();
    assert!((r.sum - 0.9 * PI).abs() < 1e-12 && !r.saturated && r.holds);
    let big = MetricSpec::sine_warped(1.0, 2.0, 0.0, 3).unwrap();
    assert!(matches!(bonnet_myers(&big, 0.1), Err(Error::Hypothesis(_))));
    assert!(matches!(bonnet_myers(&round, 4.0), Err(Error::Param(_))));
}

#[test]
fn round_sphere_waist_average() {
    // u is linear in arclength, so the average area is vol(S³)/(π − 2ε) = 2π(1 + 2ε/π)
    let m = MetricSpec::sine_warped(1.0, 1.0, 0.0, 3).unwrap();
    let r = waist_average(&m, 6.0, 0, 1e-8, 2000).unwrap();
    assert!((r.avg_area - 2.0 * PI).abs() < 1e-6, "{}", r.avg_area);
    assert!(r.holds && r.avg_area <= 8.0 * PI / 3.0);
    let eps = 0.05;
    let r = waist_average(&m, 6.0, 0, eps, 2000).unwrap();
    let band_vol = 2.0 * PI * (PI - 2.0 * eps + (2.0 * eps).sin());
    assert!((r.avg_area - band_vol / (PI - 2.0 * eps)).abs() < 1e-8, "{}", r.avg_area);
}

#[test]
fn waist_on_larger_sphere_and_gates() {
    // radius 2: vol = 16π², diam = 2π, R = 3/2
    let m = MetricSpec::sine_warped(1.0, 2.0, 0.0, 3).unwrap();
    let r = waist_average(&m, 1.5, 0, 1e-8, 2000).unwrap();
    assert!((r.avg_area - 8.0 * PI).abs() < 1e-5, "{}", r.avg_area);
    assert!(r.holds);
    assert!(matches!(waist_average(&m, 2.0, 0, 1e-8, 400), Err(Error::Hypothesis(_))));
    let cap = MetricSpec::capsule(1.0, 0.0).unwrap();
    // diam = π < 4π/√6 with R ≡ 2
    assert!(matches!(waist_average(&cap, 2.0, 0, 1e-8, 400), Err(Error::Hypothesis(_))));
}

#[test]
fn waist_on_capsule_respects_bound() {
    let m = MetricSpec::capsule(1.0, 6.0).unwrap();
    let r = waist_average(&m, 2.0, 0, 1e-6, 4000).unwrap();
    assert!(r.holds && r.avg_area <= 8.0 * PI, "{r:?}");
    // a long neck carries area 4π on most levels
    assert!(r.avg_area > 4.0 * PI * 0.9);
}

#[test]
fn capsule_dice() {
    let m = MetricSpec::capsule(1.0, 20.0).unwrap();
    let d = dice(&m, 2.0, 0.01 * 4.0 * PI / 6f64.sqrt(), 1000).unwrap();
    assert_eq!(d.count, 3, "{:?}", d.regions);
    assert!((d.interfaces[0].rho - 7.7).abs() < 0.3, "{:?}", d.interfaces);
    assert!((d.interfaces[1].rho - 15.4).abs() < 0.4, "{:?}", d.interfaces);
    for c in &d.interfaces {
        assert!((c.area - 4.0 * PI).abs() < 1e-9 && c.components == 1);
    }
    for b in &d.bands {
        assert!(b.boundary_signs_ok && b.avg_area <= d.area_bound, "{b:?}");
    }
    assert!(d.properties.all(), "{:?}", d.properties);
}

#[test]
fn round_sphere_is_one_die() {
    let m = MetricSpec::sine_warped(1.0, 1.0, 0.0, 3).unwrap();
    let d = dice(&m, 6.0, 0.01 * 4.0 * PI / 18f64.sqrt(), 400).unwrap();
    assert_eq!(d.count, 1);
    assert_eq!(d.regions, vec![(0.0, PI)]);
    assert!(d.properties.all());
}

#[test]
fn dice_cuts_avoid_grid_nodes() {
    let m = MetricSpec::capsule(0.8, 12.0).unwrap();
    let r0: f64 = 2.0 / 0.64;
    let w0 = 4.0 * PI / (3.0 * r0).sqrt();
    let d = dice(&m, r0, 0.01 * w0, 801).unwrap();
    for (b, c) in d.bands.iter().zip(&d.interfaces) {
        let h = (b.hi - b.lo) / 801.0;
        let frac = ((c.rho - b.lo) / h).fract();
        assert!((frac - 0.5).abs() < 1e-6, "{frac}");
    }
    assert!(d.properties.all());
}

#[test]
fn counterexample_audit_family() {
    let a = counterexample_audit(0.0).unwrap();
    assert!(a.holds && a.ricci_two && a.smooth_closure, "{a:?}");
    assert!((a.torus_to_core.0 - FRAC_PI_4).abs() < 1e-12 && (a.torus_to_core.1 - FRAC_PI_4).abs() < 1e-12);
    assert!((a.core_to_core - PI / 2.0).abs() < 1e-12);
    for delta in [0.25, 0.5, 1.0] {
        let a = counterexample_audit(delta).unwrap();
        assert!(a.holds, "δ = {delta}: {a:?}");
        assert!(a.two_ricci_min >= 4.0 - 1e-9);
        assert!(!a.ricci_two && a.ricci_min < 2.0 - 1e-6, "δ = {delta}: {}", a.ricci_min);
    }
    let one = counterexample_audit(1.0).unwrap();
    assert!(one.ricci_min < -1.9, "{}", one.ricci_min);
    assert!(matches!(counterexample_audit(1.5), Err(Error::Param(_))));
    assert!(matches!(counterexample_audit(-0.1), Err(Error::Param(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ricci_width_never_exceeds_bound(a in 0.05f64..1.4, b in 0.05f64..1.4, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let m = MetricSpec::round_band(a, b, 3).unwrap();
        let lo = -a * (1.0 - 0.9 * s);
        let hi = b * (1.0 - 0.9 * t);
        let v = width_bound(&m, (lo, hi), WidthTheorem::Ricci).unwrap();
        prop_assert!(v.holds && v.saturated);
    }

    #[test]
    fn two_ricci_width_holds_on_subbands(ups in 0.0f64..1.0, rho0 in 0.05f64..0.7, s in 0.0f64..1.0) {
        let m = MetricSpec::g_upsilon(ups, rho0).unwrap();
        let v = width_bound(&m, (-rho0 * s, rho0), WidthTheorem::TwoRicci).unwrap();
        prop_assert!(v.holds, "{:?}", v);
    }

    #[test]
    fn counterexample_keeps_two_ricci(delta in 0.0f64..=1.0) {
        let a = counterexample_audit(delta).unwrap();
        prop_assert!(a.two_ricci_min >= 4.0 - 1e-9 && a.tx_certificate_min >= -1e-9);
    }
}
