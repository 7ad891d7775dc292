//! End-to-end runs of the library on curves with known answers.

use std::f64::consts::PI;

use amoeba_core::classify::{classify_full, ClassifyConfig, Verdict};
use amoeba_core::curvature::total_curvature;
use amoeba_core::gauss::{totally_real_scan, FiberTolerances};
use amoeba_core::tracer::{trace_all, TraceConfig};
use amoeba_core::{newton_polygon, LaurentPoly32, LaurentPoly64};

fn cfg(window: f64) -> ClassifyConfig {
    ClassifyConfig {
        trace: TraceConfig {
            window,
            ..TraceConfig::default()
        },
        theta_samples: 256,
        ..ClassifyConfig::default()
    }
}

fn harnack_cubic() -> LaurentPoly64 {
    let mut terms = Vec::new();
    for i in 0..=3i32 {
        for j in 0..=3 - i {
            let sign = if i % 2 == 0 && j % 2 == 0 { 1.0 } else { -1.0 };
            terms.push((i, j, sign * 0.1f64.powi(i * i + i * j + j * j - 2 * (i + j))));
        }
    }
    LaurentPoly64::from_triples(&terms).unwrap()
}

#[test]
fn line_in_single_precision() {
    let p: LaurentPoly32 = "1 + x + y".parse().unwrap();
    let poly = newton_polygon(&p).unwrap();
    let set = trace_all(&p, &TraceConfig::default()).unwrap();
    let k = total_curvature(&set, &p, &poly, None).unwrap();
    assert_eq!(set.arcs.len(), 3);
    assert!((k.total as f64 - PI).abs() < 2e-2, "total {}", k.total);
    assert_eq!(k.inflections, 0);
}

#[test]
fn harnack_cubic_has_convex_pieces() {
    let c = classify_full(&harnack_cubic(), &cfg(12.0)).unwrap();
    let k = c.curvature.unwrap();
    assert_eq!(c.verdict.verdict, Verdict::Harnack);
    assert_eq!(k.inflections, 0);
    assert!((k.bound - 9.0 * PI).abs() < 1e-12);
    // a tentacle per boundary lattice point
    assert_eq!(c.arcs.unwrap().tentacle_count() as u64, c.lattice.s);
}

// Side polynomial with two close positive roots: the arc joining their
// tentacles lies far out along the diagonal.
const FAR_BRIDGE: &str =
    "-1.733632642949383*y - 1.0695742114016007*y^2 + 1.6204637588530209*x*y - 0.6136993867801508*x^2";

#[test]
fn missing_bridge_is_inconclusive_not_negative() {
    let p: LaurentPoly64 = FAR_BRIDGE.parse().unwrap();
    let c = classify_full(&p, &cfg(8.0)).unwrap();
    let v = &c.verdict;
    assert_eq!(c.arcs.as_ref().unwrap().unpaired_tentacles(), 2);
    assert!(!v.max_curvature.firm);
    assert!(!v.cond2.firm);
    assert_ne!(v.verdict, Verdict::NotHarnack);

    // the fibers see the whole curve regardless of the window
    let poly = newton_polygon(&p).unwrap();
    let scan = totally_real_scan(&p, &poly, 128, 0, &FiberTolerances::default()).unwrap();
    assert!(scan.totally_real);
}

#[test]
fn wider_window_recovers_the_bridge() {
    let p: LaurentPoly64 = FAR_BRIDGE.parse().unwrap();
    let c = classify_full(&p, &cfg(20.0)).unwrap();
    let v = &c.verdict;
    assert_eq!(c.arcs.as_ref().unwrap().unpaired_tentacles(), 0);
    assert!((c.curvature.unwrap().total - 2.0 * PI).abs() < 1e-2);
    assert!(v.max_curvature.firm_true());
    assert!(v.cond2.firm_true() && v.cond3.firm_true());
}

#[test]
fn opposite_roots_of_equal_modulus_share_an_asymptote() {
    // the side x = 0 carries c y^2 - 0.1 with roots +-r
    let p: LaurentPoly64 = "-0.1 + 1.023137363622077*y^2 - 0.1*x - 0.1*x*y".parse().unwrap();
    let v = classify_full(&p, &cfg(8.0)).unwrap().verdict;
    assert_eq!(v.verdict, Verdict::NotHarnack);
    assert!(v.cond2.firm_false());
    assert_eq!(v.amoeba_smooth, amoeba_core::classify::Signal::soft(false));
    assert!(v.evidence.conditions_consistent);
}

#[test]
fn reducible_curve_reports_its_node() {
    // (1 + y)(y - 1 - x): the two lines meet at (-2, -1)
    let p: LaurentPoly64 = "-1 - x + y^2 - x*y".parse().unwrap();
    let c = classify_full(&p, &cfg(8.0)).unwrap();
    assert!(c.scan.unwrap().singular_points >= 1);
    assert!(!c.verdict.amoeba_smooth.value);
}
