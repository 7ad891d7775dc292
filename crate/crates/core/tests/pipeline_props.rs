//! Property tests across tracing, fibers, curvature, raster and classification.
//! Polynomials are kept to degree two so every case stays fast.

use amoeba_core::classify::{classify_full, ClassifyConfig};
use amoeba_core::curvature::arc_total_curvature;
use amoeba_core::gauss::{count_fiber, gauss_direction, FiberTolerances, RP1Angle};
use amoeba_core::raster::{rasterize, LogRect};
use amoeba_core::tracer::{trace_all, TraceConfig};
use amoeba_core::{newton_polygon, LaurentPoly64};
use num_complex::Complex64;
use proptest::prelude::*;

fn quadratic() -> impl Strategy<Value = LaurentPoly64> {
    prop::collection::vec(prop_oneof![Just(0.0), -2.0f64..-0.1, 0.1f64..2.0], 6).prop_filter_map(
        "degenerate support",
        |c| {
            let exps = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
            let terms: Vec<_> = exps.iter().zip(&c).map(|(&(i, j), &c)| (i, j, c)).collect();
            let p = LaurentPoly64::from_triples(&terms).ok()?;
            newton_polygon(&p).is_ok().then_some(p)
        },
    )
}

fn trace_cfg() -> TraceConfig {
    TraceConfig {
        window: 8.0,
        ..TraceConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fiber_parity_and_back_substitution(p in quadratic(), theta in 0.01f64..3.13) {
        let poly = newton_polygon(&p).unwrap();
        let tol = FiberTolerances::default();
        let Ok(r) = count_fiber(&p, &poly, RP1Angle::new(theta), &tol) else { return Ok(()) };
        prop_assert!(r.total_count <= r.expected);
        prop_assert_eq!((r.total_count - r.real_count) % 2, 0);
        for s in r.solutions.iter().filter(|s| s.real) {
            let (x, y) = (s.x.0, s.y.0);
            let z = (Complex64::new(x, 0.0), Complex64::new(y, 0.0));
            prop_assert!(p.relative_residual(z.0, z.1) < 1e-7);
            let g = gauss_direction(&p, x, y).unwrap();
            prop_assert!(g.diff(RP1Angle::new(theta)).abs() < 1e-5);
        }
    }

    #[test]
    fn traced_points_lie_on_the_curve(p in quadratic()) {
        let Ok(set) = trace_all(&p, &trace_cfg()) else { return Ok(()) };
        for a in &set.arcs {
            for &(x, y) in &a.points {
                let r = p.relative_residual(Complex64::new(x, 0.0), Complex64::new(y, 0.0));
                prop_assert!(r < 1e-8, "residual {r} at ({x}, {y})");
            }
        }
    }

    #[test]
    fn positive_even_polynomials_have_empty_real_locus(c in prop::collection::vec(0.1f64..3.0, 4)) {
        let p = LaurentPoly64::from_triples(&[
            (0, 0, c[0]),
            (2, 0, c[1]),
            (0, 2, c[2]),
            (2, 2, c[3]),
        ])
        .unwrap();
        let set = trace_all(&p, &trace_cfg()).unwrap();
        prop_assert!(set.arcs.is_empty());
    }

    #[test]
    fn reversing_an_arc_keeps_its_curvature(p in quadratic()) {
        let Ok(set) = trace_all(&p, &trace_cfg()) else { return Ok(()) };
        for a in &set.arcs {
            let (Ok((fwd, _)), Ok((back, _))) = (arc_total_curvature(a, &p), arc_total_curvature(&a.reversed(), &p))
            else { continue };
            prop_assert_eq!(fwd.to_bits(), back.to_bits());
        }
    }

    #[test]
    fn swap_invariant_polynomials_give_symmetric_rasters(c in prop::collection::vec(prop_oneof![-2.0f64..-0.1, 0.1f64..2.0], 4)) {
        let p = LaurentPoly64::from_triples(&[
            (0, 0, c[0]),
            (1, 0, c[1]),
            (0, 1, c[1]),
            (2, 0, c[2]),
            (0, 2, c[2]),
            (1, 1, c[3]),
        ])
        .unwrap();
        let poly = newton_polygon(&p).unwrap();
        let n = 48;
        let r = rasterize(&p, &poly, LogRect::square(4.0), (n, n), 32).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(r.get(i, j), r.get(j, i));
            }
        }
        prop_assert!(r.area_estimate <= r.area_bound * 1.05);
    }

    #[test]
    fn classification_never_contradicts_itself(p in quadratic()) {
        let cfg = ClassifyConfig { trace: trace_cfg(), theta_samples: 256, ..ClassifyConfig::default() };
        let c = classify_full(&p, &cfg).unwrap();
        let v = &c.verdict;
        let legs = [v.totally_real, v.amoeba_smooth, v.is_m_curve, v.cond1, v.cond2, v.cond3];
        prop_assert!(!(v.max_curvature.firm_true() && legs.iter().any(|s| s.firm_false())));
        prop_assert!(!v.evidence.contradiction);
        prop_assert!(v.evidence.conditions_consistent);
        if let Some(k) = &c.curvature {
            prop_assert!(k.total <= k.bound * 1.02);
            let complete = c.arcs.as_ref().is_some_and(|a| a.unpaired_tentacles() == 0);
            if let (Some(cr), true) = (k.crofton_total, complete) {
                // turning left outside the window is bounded by the end-angle gap
                let slack = (0.02 * k.bound).max(0.05) + k.truncation_uncertainty;
                prop_assert!((k.total - cr).abs() <= slack);
            }
        }
    }
}
