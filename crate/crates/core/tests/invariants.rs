use std::f64::consts::{E, PI};

use num_complex::Complex64;
use quasizeros::bounds::{self, CDeltaConfig, Exterior};
use quasizeros::certify::{self, Contour};
use quasizeros::regions::{self, Branch, RegionLabel, RegionParams};
use quasizeros::zeros::{self, ZeroIndex, ZeroRecord};
use quasizeros::QuasiPolynomial;

const TOL: f64 = 1e-8;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn qp(k: u32, a: Complex64) -> QuasiPolynomial {
    QuasiPolynomial::new(k, a).unwrap()
}

fn nine() -> Vec<QuasiPolynomial> {
    let mut out = Vec::new();
    for k in 1..=3 {
        for a in [c(1.0, 0.0), c(2.0, 1.0), c(0.0, 0.5)] {
            out.push(qp(k, a));
        }
    }
    out
}

fn branches(q: &QuasiPolynomial, n: i64) -> Vec<ZeroRecord> {
    zeros::zeros_in_index_range(q, -n, n, 1e-12).unwrap()
}

#[test]
fn zeros_lie_in_the_first_strip() {
    for q in nine() {
        let h =
            bounds::h_threshold(&q, Exterior::T1).max(bounds::h_threshold(&q, Exterior::T2)) + 1.0;
        let r = 10.0;
        for rec in branches(&q, 50) {
            assert!(rec.certified);
            if rec.value.norm() > r {
                let u = regions::signed_offset(&q, rec.value, Branch::One).unwrap();
                assert!(
                    u.abs() <= h,
                    "k={} A={} zero {} offset {u}",
                    q.k(),
                    q.a(),
                    rec.value
                );
            }
        }
    }
}

#[test]
fn no_zero_in_first_exteriors() {
    for q in nine() {
        let h1 = bounds::h_threshold(&q, Exterior::T1) + 0.5;
        let h2 = bounds::h_threshold(&q, Exterior::T2) + 0.5;
        let left = RegionParams::new(h1, 10.0, Branch::One).unwrap();
        let right = RegionParams::new(h2, 10.0, Branch::One).unwrap();
        let mut recs = branches(&q, 50);
        recs.extend(certify::find_zeros_in_disk(&q, 10.0, 1e-12).unwrap());
        for rec in &recs {
            assert_ne!(
                regions::classify(&q, rec.value, &left),
                RegionLabel::TExterior1,
                "zero {}",
                rec.value
            );
            assert_ne!(
                regions::classify(&q, rec.value, &right),
                RegionLabel::TExterior2,
                "zero {}",
                rec.value
            );
        }
    }
}

#[test]
fn real_coefficient_zeros_come_in_conjugate_pairs() {
    for (k, a) in [(1, 1.0), (2, 3.0), (3, 2.0), (1, -2.0)] {
        let q = qp(k, c(a, 0.0));
        let n = 20;
        let mut set = zeros::zeros_in_index_range(&q, -n - 1, n, 1e-12).unwrap();
        let disk = certify::find_zeros_in_disk(&q, 12.0, 1e-12).unwrap();
        set = zeros::merge_zero_sets(&set, &disk);
        let top = set.iter().map(|r| r.value.im.abs()).fold(0.0, f64::max);
        for rec in &set {
            // The extreme index on one side pairs with an index just outside the range.
            if rec.value.im.abs() > top - PI {
                continue;
            }
            let partner = set
                .iter()
                .map(|o| (o.value - rec.value.conj()).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(
                partner < 1e-9,
                "k={k} A={a}: {} has no conjugate",
                rec.value
            );
        }
    }
}

#[test]
fn asymptotic_error_decays() {
    let q = qp(1, c(1.0, 0.0));
    let mut scaled = Vec::new();
    let mut raw = std::collections::HashMap::new();
    for nu in (-50..=-10).chain(10..=50) {
        let rec = zeros::refine_branch(&q, nu, 1e-13).unwrap();
        let e = (rec.value - zeros::asymptotic_zero(&q, nu).unwrap()).norm();
        let m = nu.abs() as f64;
        scaled.push(e * m / (m + 2.0).ln());
        raw.insert(nu, e);
    }
    let mut sorted = scaled.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    for s in &scaled {
        assert!(
            *s <= 3.0 * median && *s >= median / 3.0,
            "{s} vs median {median}"
        );
    }
    assert!(raw[&40] < raw[&10]);
    assert!(raw[&-40] < raw[&-10]);
}

#[test]
fn gaps_tend_to_two_pi() {
    let q = qp(1, c(1.0, 0.0));
    let recs = zeros::zeros_in_index_range(&q, 20, 50, 1e-13).unwrap();
    let stats = zeros::gap_statistics(&recs).unwrap();
    assert_eq!(stats.gaps.len(), 30);
    assert!(stats.max_deviation < 0.2);
    let dev = |i: usize| (stats.gaps[i] - 2.0 * PI).abs();
    assert!(dev(25) < dev(0));
}

#[test]
fn quadrangle_heights_approach_two_pi() {
    let q = qp(1, c(1.0, 0.0));
    let params = RegionParams::new(2.0, 10.0, Branch::One).unwrap();
    let mut last = f64::INFINITY;
    for nu in [20, 40, 80, 160] {
        let lo = zeros::refine_branch(&q, nu, 1e-13).unwrap().value;
        let hi = zeros::refine_branch(&q, nu + 1, 1e-13).unwrap().value;
        let ords = (
            regions::line_ordinate(&q, lo),
            regions::line_ordinate(&q, hi),
        );
        let quad = regions::strip_quadrangle(&q, &params, nu, ords).unwrap();
        let dev = (quad.height() - 2.0 * PI).abs();
        assert!(dev < last, "nu={nu}: {dev}");
        last = dev;
        if nu == 20 {
            let expected = (4.0f64 * 2.0 * 2.0 + 4.0 * PI * PI).sqrt();
            assert!(
                (quad.diagonal - expected).abs() < 0.1 * expected,
                "{}",
                quad.diagonal
            );
        }
    }
}

#[test]
fn counts_add_across_a_cut() {
    let q = qp(1, c(1.0, 0.0));
    for (top, zeros_inside) in [
        (3.0, 0),
        (2.0 * PI * 1.3, 1),
        (2.0 * PI * 3.3, 3),
        (2.0 * PI * 5.3, 5),
    ] {
        let lo = 0.5;
        let whole = Contour::rectangle(c(-4.0, lo), c(9.0, top)).unwrap();
        let x = 1.37;
        let left = Contour::rectangle(c(-4.0, lo), c(x, top)).unwrap();
        let right = Contour::rectangle(c(x, lo), c(9.0, top)).unwrap();
        let w = certify::winding_count(&q, &whole, TOL).unwrap();
        let l = certify::winding_count(&q, &left, TOL).unwrap();
        let r = certify::winding_count(&q, &right, TOL).unwrap();
        assert_eq!(w.count, l.count + r.count);
        assert_eq!(w.count, zeros_inside);
        assert!(w.integer_distance < 0.1);
        let again = certify::winding_count(&q, &whole, TOL / 10.0).unwrap();
        assert_eq!(again.count, w.count);
    }
}

#[test]
fn double_zero_splits_under_perturbation() {
    for k in [1u32, 2] {
        let a = QuasiPolynomial::double_zero_coefficient(k);
        let kf = k as f64;
        let q = qp(k, a);
        let circle = Contour::circle(c(kf, 0.0), 0.2).unwrap();
        assert_eq!(certify::winding_count(&q, &circle, TOL).unwrap().count, 2);

        let q = qp(k, a * (1.0 + 1e-3));
        assert_eq!(certify::winding_count(&q, &circle, TOL).unwrap().count, 2);
        let found = certify::find_zeros_in_disk(&q, kf + 0.3, 1e-12).unwrap();
        let near: Vec<_> = found
            .iter()
            .filter(|r| (r.value - kf).norm() < 0.2)
            .collect();
        assert_eq!(near.len(), 2, "k={k}");
        for r in &near {
            assert_eq!(r.multiplicity, 1);
            let (count, _) = certify::isolation_count(&q, r.value, r.isolation_radius).unwrap();
            assert_eq!(count, 1);
        }
        let mid = 0.5 * (near[0].value + near[1].value);
        assert!((mid - kf).norm() < 1e-2, "midpoint {mid}");
    }
}

#[test]
fn branch_and_disk_searches_agree() {
    let q = qp(1, c(1.0, 0.0));
    let branch = zeros::zeros_in_index_range(&q, -20, 20, 1e-12).unwrap();
    let disk = certify::find_zeros_in_disk(&q, 5.0, 1e-12).unwrap();
    let union = zeros::merge_zero_sets(&branch, &disk);
    for rec in &union {
        let copies = union
            .iter()
            .filter(|o| (o.value - rec.value).norm() < 1e-6)
            .count();
        assert_eq!(copies, 1);
    }
    // Zeros found by both searches appear once.
    assert!(union.len() < branch.len() + disk.len());
    assert!(union.iter().any(|r| r.index == ZeroIndex::Origin));

    let top = 2.0 * PI * 20.6;
    let window = Contour::rectangle(c(-12.0, -top), c(12.0, top)).unwrap();
    let inside = certify::records_inside(&window, &union);
    let report = certify::certify_completeness(&q, &window, &inside, TOL).unwrap();
    assert!(report.pass);
    assert_eq!(report.contour.count, inside.len() as i64);
}

#[test]
fn bound_margins_near_the_first_boundary() {
    let q = qp(1, c(1.0, 0.0));
    let h = bounds::h_threshold(&q, Exterior::T1) + 1e-3;
    let rep = bounds::verify_t1_bound(&q, h, 10.0, 20_000, 3).unwrap();
    assert!(rep.pass);
    assert!(
        rep.min_margin >= 1.0 && rep.min_margin <= 1.2,
        "{}",
        rep.min_margin
    );
    // Deep inside the exterior the co-factor vanishes and the margin nears 2.
    let deep = c(-500.0, 10.0);
    assert!(bounds::t1_margin(&q, deep).unwrap() > 1.99);
}

#[test]
fn bound_reports_are_bitwise_reproducible() {
    let q = qp(2, c(2.0, 1.0));
    let h = bounds::h_threshold(&q, Exterior::T1) + 0.5;
    let a = bounds::verify_t1_bound(&q, h, 10.0, 5_000, 11).unwrap();
    let b = bounds::verify_t1_bound(&q, h, 10.0, 5_000, 11).unwrap();
    assert_eq!(a.min_margin.to_bits(), b.min_margin.to_bits());
    assert_eq!(a.worst_point, b.worst_point);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let serial = pool.install(|| bounds::verify_t1_bound(&q, h, 10.0, 5_000, 11).unwrap());
    assert_eq!(serial, a);
}

#[test]
fn c_delta_is_stable_and_monotone() {
    let q = qp(1, c(1.0, 0.0));
    let branch = zeros::zeros_in_index_range(&q, -62, 62, 1e-13).unwrap();
    let disk = certify::find_zeros_in_disk(&q, 10.0, 1e-13).unwrap();
    let all = zeros::merge_zero_sets(&branch, &disk);
    let cfg = |delta, n, seed| CDeltaConfig {
        h: 2.0,
        r: 10.0,
        delta,
        sample_count: n,
        seed,
        im_cap: 2.0 * PI * 60.0,
    };
    let base = bounds::estimate_c_delta(&q, &cfg(0.5, 50_000, 1), &all).unwrap();
    assert!(base.c_hat > 0.0);
    let more = bounds::estimate_c_delta(&q, &cfg(0.5, 200_000, 2), &all).unwrap();
    assert!((more.c_hat - base.c_hat).abs() < 0.15 * base.c_hat);

    let mid = bounds::estimate_c_delta(&q, &cfg(0.25, 50_000, 1), &all).unwrap();
    let small = bounds::estimate_c_delta(&q, &cfg(0.1, 50_000, 1), &all).unwrap();
    assert!(small.c_hat <= mid.c_hat && mid.c_hat <= base.c_hat);
    assert!(small.retained >= mid.retained && mid.retained >= base.retained);

    // Dropping a zero from the list is caught before sampling.
    let missing: Vec<_> = all
        .iter()
        .filter(|r| r.index != ZeroIndex::Branch(7))
        .cloned()
        .collect();
    assert!(bounds::estimate_c_delta(&q, &cfg(0.5, 1_000, 1), &missing).is_err());
}

#[test]
fn exact_double_zero_is_a_root_of_both() {
    let q = qp(1, c(-E, 0.0));
    let z = c(1.0, 0.0);
    assert!(q.evaluate(z).unwrap().norm() < 1e-12);
    assert!(q.derivative(z).unwrap().norm() < 1e-12);
}
