use num_complex::Complex64;
use proptest::prelude::*;
use quasizeros::regions::{
    classify, level_curve_point, signed_offset, Branch, RegionLabel, RegionParams,
};
use quasizeros::zeros::{fixed_point_refine, newton_refine, refine_branch};
use quasizeros::QuasiPolynomial;

fn coefficient() -> impl Strategy<Value = Complex64> {
    prop_oneof![
        Just(Complex64::new(1.0, 0.0)),
        Just(Complex64::new(2.0, 1.0)),
        Just(Complex64::new(0.0, 0.5)),
        (-3.0..3.0f64, -3.0..3.0f64)
            .prop_filter("nonzero", |(re, im)| re.hypot(*im) > 1e-2)
            .prop_map(|(re, im)| Complex64::new(re, im)),
    ]
}

fn quasipoly() -> impl Strategy<Value = QuasiPolynomial> {
    (1u32..=3, coefficient()).prop_map(|(k, a)| QuasiPolynomial::new(k, a).unwrap())
}

fn point(bound: f64) -> impl Strategy<Value = Complex64> {
    (-bound..bound, -bound..bound)
        .prop_filter("inside disk, off origin", move |(re, im)| {
            let r = re.hypot(*im);
            r <= bound && r > 1e-3
        })
        .prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn scaled_matches_direct(qp in quasipoly(), z in point(50.0)) {
        let direct = qp.evaluate(z).unwrap().norm();
        let scaled = qp.evaluate_scaled(z).unwrap().log_magnitude.exp();
        // Cancellation makes both sides inaccurate when |f| is tiny next to its terms.
        prop_assume!(qp.relative_residual(z) > 1e-4);
        prop_assert!((scaled - direct).abs() <= 1e-10 * direct, "{scaled} vs {direct}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn real_coefficient_commutes_with_conjugation(k in 1u32..=3, a in -3.0..3.0f64, z in point(40.0)) {
        prop_assume!(a.abs() > 1e-2);
        let qp = QuasiPolynomial::new(k, Complex64::new(a, 0.0)).unwrap();
        let f = qp.evaluate(z).unwrap();
        let g = qp.evaluate(z.conj()).unwrap();
        let scale = z.re.exp().max(a.abs() * z.norm().powi(k as i32));
        prop_assert!((g - f.conj()).norm() <= 1e-12 * scale);
    }

    #[test]
    fn derivative_matches_central_difference(qp in quasipoly(), z in point(20.0)) {
        let eps = 1e-6 * z.norm().max(1.0);
        let step = Complex64::new(eps, 0.0);
        let fd = (qp.evaluate(z + step).unwrap() - qp.evaluate(z - step).unwrap()) / (2.0 * eps);
        let d = qp.derivative(z).unwrap();
        let scale = z.re.exp().max(qp.k() as f64 * qp.a().norm() * z.norm().powi(qp.k() as i32 - 1));
        prop_assume!(d.norm() > 1e-3 * scale);
        prop_assert!((fd - d).norm() <= 1e-6 * d.norm(), "{fd} vs {d}");
    }

    #[test]
    fn classification_matches_definitions(
        qp in quasipoly(),
        z in point(1e3),
        h in 0.01..10.0f64,
        r in 0.5..50.0f64,
        s in prop_oneof![Just(Branch::One), Just(Branch::Two)],
    ) {
        let params = RegionParams::new(h, r, s).unwrap();
        let label = classify(&qp, z, &params);
        let expected = if z.norm() <= r {
            RegionLabel::OriginDisk
        } else {
            let u = signed_offset(&qp, z, s).unwrap();
            if u < -h {
                RegionLabel::TExterior1
            } else if u > h {
                RegionLabel::TExterior2
            } else {
                label
            }
        };
        prop_assert_eq!(label, expected);
        if let RegionLabel::Strip(half) = label {
            prop_assert_eq!(half.index(), if z.im >= 0.0 { 1 } else { 2 });
        }
    }

    #[test]
    fn strips_nest(qp in quasipoly(), z in point(1e3), h1 in 0.01..5.0f64, dh in 0.0..5.0f64, r in 0.5..20.0f64) {
        for s in [Branch::One, Branch::Two] {
            let narrow = RegionParams::new(h1, r, s).unwrap();
            let wide = RegionParams::new(h1 + dh, r, s).unwrap();
            if let RegionLabel::Strip(_) = classify(&qp, z, &narrow) {
                prop_assert!(matches!(classify(&qp, z, &wide), RegionLabel::Strip(_)));
            }
        }
    }

    #[test]
    fn level_curve_points_have_requested_offset(
        qp in quasipoly(),
        y in 5.0..1e3f64,
        upper in any::<bool>(),
        u in -3.0..3.0f64,
        s in prop_oneof![Just(Branch::One), Just(Branch::Two)],
    ) {
        let y = if upper { y } else { -y };
        let z = level_curve_point(&qp, y, u, s).unwrap();
        prop_assert_eq!(z.im, y);
        prop_assert!((signed_offset(&qp, z, s).unwrap() - u).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn refined_zeros_meet_tolerance(qp in quasipoly(), nu in 1i64..60, upper in any::<bool>()) {
        let nu = if upper { nu } else { -nu };
        let rec = refine_branch(&qp, nu, 1e-12).unwrap();
        prop_assert!(rec.residual < 1e-12);
        prop_assert!(qp.relative_residual(rec.value) < 1e-12);
        let scaled = qp.evaluate_scaled(rec.value).unwrap();
        let terms = rec.value.re.max(qp.ln_abs_a() + qp.k() as f64 * rec.value.norm().ln());
        prop_assert!(scaled.log_magnitude - terms < (1e-12f64).ln());
    }

    #[test]
    fn fixed_point_and_newton_agree(qp in quasipoly(), nu in 5i64..60, upper in any::<bool>()) {
        let nu = if upper { nu } else { -nu };
        let (fp, _) = fixed_point_refine(&qp, nu, 1e-14, 500).unwrap();
        let nt = newton_refine(&qp, fp.seed, 1e-12, 100).unwrap();
        prop_assert!((fp.value - nt.value).norm() < 1e-10, "{} vs {}", fp.value, nt.value);
    }
}
