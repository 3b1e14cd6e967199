use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use proptest::prelude::*;
use stband::geometry::{Jet, MetricSpec, Warping};

fn catalog() -> &'static [MetricSpec] {
    static CAT: OnceLock<Vec<MetricSpec>> = OnceLock::new();
    CAT.get_or_init(|| vec![
        MetricSpec::round_band(FRAC_PI_4, FRAC_PI_4, 3).unwrap(),
        MetricSpec::round_band(0.3, 1.1, 4).unwrap(),
        MetricSpec::g_upsilon(0.0, 0.3).unwrap(),
        MetricSpec::g_upsilon(0.6, 0.3).unwrap(),
        MetricSpec::g_upsilon(1.0, 0.3).unwrap(),
        MetricSpec::torus_extremal(PI / 3.0).unwrap(),
        MetricSpec::counterexample(0.0).unwrap(),
        MetricSpec::counterexample(0.7).unwrap(),
        MetricSpec::sine_warped(1.2, 1.0, 0.0, 3).unwrap(),
        MetricSpec::sine_warped(1.0, 0.9, 0.1, 3).unwrap(),
        MetricSpec::capsule(1.0, 3.0).unwrap(),
        MetricSpec::schwarzschild(1.0, 3).unwrap(),
        MetricSpec::schwarzschild(0.5, 5).unwrap(),
        MetricSpec::flat(2.0).unwrap(),
        MetricSpec::custom(0.0, 1.0, &[1.0, 1.2, 1.1, 1.3], &[0.8, 0.9, 1.0, 1.05]).unwrap(),
    ])
}

fn jets(m: &MetricSpec, rho: f64) -> Vec<Jet> {
    match m.warping(rho) {
        Warping::Doubly { phi, psi } => vec![phi, psi],
        Warping::Single { w, .. } => vec![w],
    }
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Samples interior points away from the closure ends and from kinks.
fn interior(m: &MetricSpec, s: f64) -> f64 {
    let (lo, hi) = m.domain();
    let hi = if hi.is_finite() { hi } else { 50.0 };
    let lo = if m.family == stband::geometry::Family::AFSymmetric { 0.05 } else { lo };
    lo + (hi - lo) * (0.02 + 0.96 * s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn analytic_derivatives_match_five_point_stencil(idx in 0usize..15, s in 0.0f64..1.0) {
        let m = &catalog()[idx];
        let rho = interior(m, s);
        let (lo, hi) = m.domain();
        let h = (1e-3 * (hi.min(50.0) - lo).min(1.0)).min(2e-3 * (rho - lo).min(hi - rho));
        // Derivatives are with respect to arclength; convert stencil steps accordingly.
        let a = m.arclength_factor(rho);
        let f = |x: f64| jets(m, x);
        let (jm2, jm1, jp1, jp2) = (f(rho - 2.0 * h), f(rho - h), f(rho + h), f(rho + 2.0 * h));
        let j0 = f(rho);
        // capsule is only C^1 at the cap junctions; skip samples straddling them
        if m.params.contains_key("cap_radius") {
            let cap = PI / 2.0;
            prop_assume!((rho - cap).abs() > 3.0 * h && (rho - cap - 3.0).abs() > 3.0 * h);
        }
        // spline second derivatives kink at the knots 1/3, 2/3
        if m.family == stband::geometry::Family::CustomDoublyWarped {
            prop_assume!((1..3).all(|k| (rho - k as f64 / 3.0).abs() > 3.0 * h));
        }
        for k in 0..j0.len() {
            let d1 = (jm2[k].v - 8.0 * jm1[k].v + 8.0 * jp1[k].v - jp2[k].v) / (12.0 * h) / a;
            prop_assert!(rel_close(d1, j0[k].d1, 1e-6), "{:?} ρ={} d1 fd={} exact={}", m.family, rho, d1, j0[k].d1);
            if m.family != stband::geometry::Family::AFSymmetric {
                let d2 = (jm2[k].d1 - 8.0 * jm1[k].d1 + 8.0 * jp1[k].d1 - jp2[k].d1) / (12.0 * h);
                prop_assert!(rel_close(d2, j0[k].d2, 1e-6), "{:?} ρ={} d2 fd={} exact={}", m.family, rho, d2, j0[k].d2);
            }
        }
    }

    #[test]
    fn scalar_is_trace(idx in 0usize..15, s in 0.0f64..1.0) {
        let m = &catalog()[idx];
        let c = m.curvature_at(interior(m, s)).unwrap();
        let sum: f64 = c.ricci_eigs.iter().sum();
        prop_assert!((sum - c.scalar).abs() <= 1e-10 * c.scalar.abs().max(1.0));
        prop_assert_eq!(c.two_ricci, c.ricci_eigs[0] + c.ricci_eigs[1]);
        prop_assert!(c.ricci_eigs.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn counterexample_reflection_symmetry(delta in 0.0f64..=1.0, t in -0.78f64..0.78) {
        let m = MetricSpec::counterexample(delta).unwrap();
        let (Warping::Doubly { phi: a, .. }, Warping::Doubly { psi: b, .. }) = (m.warping(t), m.warping(-t)) else { unreachable!() };
        prop_assert!((a.v - b.v).abs() <= 1e-12);
        let (c1, c2) = (m.curvature_at(t).unwrap(), m.curvature_at(-t).unwrap());
        for (x, y) in c1.ricci_eigs.iter().zip(&c2.ricci_eigs) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn g_upsilon_mean_curvature_and_transverse_scalar(ups in 0.0f64..=1.0, rho in -0.75f64..0.75) {
        let m = MetricSpec::g_upsilon(ups, 0.3).unwrap();
        let c = m.curvature_at(rho).unwrap();
        prop_assert!((c.mean_curv + 2.0 * (2.0 * rho).tan()).abs() <= 1e-10 * (1.0 + (2.0 * rho).tan().abs()));
        prop_assert!((c.scalar - c.ric_normal - 4.0).abs() <= 1e-9 * c.scalar.abs().max(1.0));
        let c0 = 2.0 * (2.0 * ups - ups * ups);
        let sec2 = 1.0 / (2.0 * rho).cos().powi(2);
        prop_assert!((c.ric_normal - 2.0 - c0 * sec2).abs() <= 1e-9 * c.ric_normal.abs().max(1.0));
    }
}

#[test]
fn symbolic_oracle_values() {
    // sympy differentiation of the closed forms, 20 digits
    let c = MetricSpec::counterexample(0.5).unwrap().curvature_at(0.3).unwrap();
    let want = [0.87071505320992928560, 3.1292849467900707144, 3.6594105613808316056];
    for (a, b) in c.ricci_eigs.iter().zip(want) {
        assert!((a - b).abs() < 1e-13, "{a} vs {b}");
    }
    let c = MetricSpec::g_upsilon(0.25, 0.3).unwrap().curvature_at(0.1).unwrap();
    let want = [2.0, 2.0, 2.9109549386839363517];
    for (a, b) in c.ricci_eigs.iter().zip(want) {
        assert!((a - b).abs() < 1e-13, "{a} vs {b}");
    }
    let c = MetricSpec::torus_extremal(PI / 3.0).unwrap().curvature_at(0.4).unwrap();
    let want = [1.2659784137360212768, 1.2659784137360212768, 3.4680431725279574464];
    for (a, b) in c.ricci_eigs.iter().zip(want) {
        assert!((a - b).abs() < 1e-13, "{a} vs {b}");
    }
    let c = MetricSpec::sine_warped(1.0, 1.0, 0.1, 3).unwrap().curvature_at(1.1).unwrap();
    assert!((c.ric_normal - 2.0655913010539550534).abs() < 1e-13);
    assert!((c.ricci_eigs.iter().sum::<f64>() - 2.0655913010539550534 - 2.0 * 1.7724743092396439057).abs() < 1e-12);
}

#[test]
fn counterexample_two_ricci_floor() {
    for &delta in &[0.0, 0.25, 0.5, 0.75, 1.0] {
        let m = MetricSpec::counterexample(delta).unwrap();
        let n = 10_000;
        let min = (1..n)
            .map(|i| -FRAC_PI_4 + PI / 2.0 * i as f64 / n as f64)
            .map(|t| m.curvature_at(t).unwrap().two_ricci)
            .fold(f64::INFINITY, f64::min);
        assert!(min >= 4.0 - 1e-9, "δ={delta}: {min}");
    }
}

#[test]
fn counterexample_smooth_closure() {
    for &delta in &[0.0, 0.3, 1.0] {
        let m = MetricSpec::counterexample(delta).unwrap();
        let Warping::Doubly { phi, .. } = m.warping(FRAC_PI_4) else { unreachable!() };
        assert!(phi.v.abs() < 1e-15 && (phi.d1.abs() - 1.0).abs() < 1e-9);
        let Warping::Doubly { psi, .. } = m.warping(-FRAC_PI_4) else { unreachable!() };
        assert!(psi.v.abs() < 1e-15 && (psi.d1.abs() - 1.0).abs() < 1e-9);
        assert!(m.curvature_at(FRAC_PI_4).is_err());
    }
}

#[test]
fn torus_extremal_scalar_is_six() {
    let m = MetricSpec::torus_extremal(PI / 3.0).unwrap();
    for i in 0..=10_000 {
        let s = -PI / 6.0 + PI / 3.0 * i as f64 / 10_000.0;
        assert!((m.curvature_at(s).unwrap().scalar - 6.0).abs() < 1e-12);
    }
}
