use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex64;
use quasizeros::bounds::{self, CDeltaConfig, Exterior};
use quasizeros::certify::{self, Contour};
use quasizeros::regions::{self, Branch, RegionParams};
use quasizeros::zeros::{self, ZeroRecord};
use quasizeros::QuasiPolynomial;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::output::{complex, read_records, record_row, Document, RECORD_COLUMNS};
use crate::Failure;

/// What a command produced and whether its check held.
pub struct Outcome {
    pub doc: Document,
    pub verified: bool,
}

fn row(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("rows are built from object literals"),
    }
}

pub fn check_tolerance(name: &str, tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol <= 1e-4 {
        Ok(())
    } else {
        Err(Failure::usage(format!(
            "{name} must lie in (0, 1e-4], got {tol}"
        )))
    }
}

fn check_samples(n: usize) -> Result<(), Failure> {
    if n >= 1 {
        Ok(())
    } else {
        Err(Failure::usage("sample count must be at least 1"))
    }
}

pub fn zeros(
    qp: &QuasiPolynomial,
    nu: (i64, i64),
    tol: f64,
    certify_each: bool,
    origin_radius: Option<f64>,
) -> Result<Outcome, Failure> {
    check_tolerance("--tol", tol)?;
    let (lo, hi) = nu;
    let mut records = if certify_each {
        zeros::zeros_in_index_range(qp, lo, hi, tol)?
    } else {
        (lo..=hi)
            .filter(|&n| n != 0)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&n| zeros::refine_branch(qp, n, tol))
            .collect::<quasizeros::Result<Vec<_>>>()?
    };
    let from_branches = records.len();
    if let Some(r) = origin_radius {
        let disk = certify::find_zeros_in_disk(qp, r, tol)?;
        records = zeros::merge_zero_sets(&records, &disk);
    }
    let all_certified = records.iter().all(|r| r.certified);
    let max_residual = records.iter().map(|r| r.residual).fold(0.0, f64::max);
    let mut summary = json!({
        "count": records.len(),
        "from_branches": from_branches,
        "from_origin_disk": records.len() - from_branches,
        "max_residual": max_residual,
        "all_certified": all_certified,
    });
    if lo <= 0 && hi >= 0 {
        summary["note"] = json!("nu = 0 is not an index of the branch family and was skipped");
    }
    Ok(Outcome {
        doc: Document {
            command: "zeros",
            params: json!({
                "nu_min": lo,
                "nu_max": hi,
                "tol": tol,
                "certify": certify_each,
                "origin_radius": origin_radius,
            }),
            results: records.iter().map(record_row).collect(),
            summary,
            columns: RECORD_COLUMNS,
        },
        verified: !certify_each || all_certified,
    })
}

pub fn origin(qp: &QuasiPolynomial, radius: f64, tol: f64) -> Result<Outcome, Failure> {
    check_tolerance("--tol", tol)?;
    let records = certify::find_zeros_in_disk(qp, radius, tol)?;
    let all_certified = records.iter().all(|r| r.certified);
    let total: u32 = records.iter().map(|r| r.multiplicity).sum();
    Ok(Outcome {
        doc: Document {
            command: "origin",
            params: json!({ "radius": radius, "tol": tol }),
            results: records.iter().map(record_row).collect(),
            summary: json!({
                "count": records.len(),
                "count_with_multiplicity": total,
                "all_certified": all_certified,
            }),
            columns: RECORD_COLUMNS,
        },
        verified: all_certified,
    })
}

const CLASSIFY_COLUMNS: &[&str] = &["re", "im", "label", "half", "offset", "in_sector"];

pub fn classify(
    qp: &QuasiPolynomial,
    points: &[Complex64],
    h: f64,
    r: f64,
    s: u8,
    delta: Option<f64>,
) -> Result<Outcome, Failure> {
    let branch = Branch::from_index(s)?;
    let mut params = RegionParams::new(h, r, branch)?;
    if let Some(d) = delta {
        params = params.with_delta(d)?;
    }
    let mut results = Vec::with_capacity(points.len());
    for &z in points {
        let label = regions::classify(qp, z, &params);
        let offset = if z == Complex64::new(0.0, 0.0) {
            Value::Null
        } else {
            json!(regions::signed_offset(qp, z, branch)?)
        };
        let in_sector = match (delta, label.half()) {
            (Some(d), Some(half)) => json!(regions::sector_contains(z, d, half)?),
            _ => Value::Null,
        };
        results.push(row(json!({
            "re": z.re,
            "im": z.im,
            "label": label.tag(),
            "half": label.half().map(|h| h.index()),
            "offset": offset,
            "in_sector": in_sector,
        })));
    }
    Ok(Outcome {
        doc: Document {
            command: "classify",
            params: json!({ "h": h, "R": r, "S": s, "delta": delta }),
            summary: json!({ "count": results.len() }),
            results,
            columns: CLASSIFY_COLUMNS,
        },
        verified: true,
    })
}

const CERTIFY_COLUMNS: &[&str] = &[
    "nu",
    "re",
    "im",
    "multiplicity",
    "isolation_radius",
    "counted",
    "residual_now",
    "ok",
];

pub fn certify(
    qp: &QuasiPolynomial,
    contour: Contour,
    expect_from: &[PathBuf],
    tol: f64,
) -> Result<Outcome, Failure> {
    check_tolerance("--tol", tol)?;
    let contour_params = match contour {
        Contour::Rectangle {
            lower_left,
            upper_right,
        } => json!({
            "box": [lower_left.re, lower_left.im, upper_right.re, upper_right.im],
        }),
        Contour::Circle { center, radius } => json!({
            "circle": [center.re, center.im, radius],
        }),
    };
    let mut params = contour_params;
    params["tol"] = json!(tol);
    params["expect_from"] = json!(expect_from
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>());

    if expect_from.is_empty() {
        let rep = certify::winding_count(qp, &contour, tol)?;
        return Ok(Outcome {
            doc: Document {
                command: "certify",
                params,
                results: Vec::new(),
                summary: json!({
                    "count": rep.count,
                    "raw_integral": complex(rep.raw_integral),
                    "integer_distance": rep.integer_distance,
                    "min_scaled_modulus": rep.min_scaled_modulus,
                    "segments_used": rep.segments_used,
                }),
                columns: CERTIFY_COLUMNS,
            },
            verified: true,
        });
    }

    let mut listed: Vec<ZeroRecord> = Vec::new();
    for path in expect_from {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
        let is_csv = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let (header, records) = read_records(&text, is_csv)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        if let Some((k, a)) = header {
            if k != qp.k() || a != qp.a() {
                return Err(Failure::usage(format!(
                    "{} was computed for k = {k}, A = {a}, not k = {}, A = {}",
                    path.display(),
                    qp.k(),
                    qp.a()
                )));
            }
        }
        listed = zeros::merge_zero_sets(&listed, &records);
    }
    let inside = certify::records_inside(&contour, &listed);
    let excluded: Vec<Value> = listed
        .iter()
        .filter(|r| !contour.contains(r.value))
        .map(|r| Value::Object(record_row(r)))
        .collect();
    let rep = certify::certify_completeness(qp, &contour, &inside, tol)?;

    let results = inside
        .iter()
        .map(|r| {
            let mismatch = rep.record_failures.iter().find(|m| m.value == r.value);
            let mut m = record_row(r);
            m.retain(|k, _| CERTIFY_COLUMNS.contains(&k.as_str()));
            m.insert(
                "counted".into(),
                json!(mismatch.map_or(r.multiplicity as i64, |m| m.counted)),
            );
            m.insert(
                "residual_now".into(),
                json!(mismatch.map_or_else(|| qp.relative_residual(r.value), |m| m.residual)),
            );
            m.insert("ok".into(), json!(mismatch.is_none()));
            m
        })
        .collect();
    Ok(Outcome {
        doc: Document {
            command: "certify",
            params,
            results,
            summary: json!({
                "pass": rep.pass,
                "count": rep.contour.count,
                "expected_count": rep.expected_count,
                "raw_integral": complex(rep.contour.raw_integral),
                "integer_distance": rep.contour.integer_distance,
                "min_scaled_modulus": rep.contour.min_scaled_modulus,
                "segments_used": rep.contour.segments_used,
                "records_listed": listed.len(),
                "records_inside": inside.len(),
                "record_failures": rep.record_failures.len(),
                "excluded": excluded,
            }),
            columns: CERTIFY_COLUMNS,
        },
        verified: rep.pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Which {
    T1,
    T2,
    Cdelta,
}

pub struct BoundsArgs {
    pub which: Which,
    pub h: Option<f64>,
    pub r: f64,
    pub s: Option<u8>,
    pub samples: usize,
    pub seed: u64,
    pub r_max: f64,
    pub delta: f64,
    pub im_cap: f64,
    pub disk_radius: Option<f64>,
}

const BOUND_COLUMNS: &[&str] = &[
    "region",
    "S",
    "h",
    "R",
    "R_max",
    "threshold_h",
    "samples",
    "min_margin",
    "worst_re",
    "worst_im",
    "pass",
];

const CDELTA_COLUMNS: &[&str] = &[
    "c_hat",
    "argmin_re",
    "argmin_im",
    "delta",
    "h",
    "R",
    "im_cap",
    "samples",
    "retained",
];

pub fn bounds(qp: &QuasiPolynomial, args: &BoundsArgs) -> Result<Outcome, Failure> {
    check_samples(args.samples)?;
    let exterior = match args.which {
        Which::T1 => Exterior::T1,
        Which::T2 => Exterior::T2,
        Which::Cdelta => return c_delta(qp, args),
    };
    let threshold = bounds::h_threshold(qp, exterior);
    let h = args.h.unwrap_or(threshold + 0.5);
    let s = match (args.s, exterior) {
        (Some(s), _) => Branch::from_index(s)?,
        (None, Exterior::T1) => Branch::One,
        (None, Exterior::T2) => Branch::Two,
    };
    let rep = bounds::verify_exterior_bound(
        qp,
        exterior,
        s,
        h,
        args.r,
        args.r_max,
        args.samples,
        args.seed,
    )?;
    let result = row(json!({
        "region": rep.region_descriptor,
        "S": s.index(),
        "h": rep.h,
        "R": rep.r,
        "R_max": rep.r_max,
        "threshold_h": rep.threshold_h_used,
        "samples": rep.samples,
        "min_margin": rep.min_margin,
        "worst_re": rep.worst_point.re,
        "worst_im": rep.worst_point.im,
        "pass": rep.pass,
    }));
    Ok(Outcome {
        doc: Document {
            command: "bounds",
            params: json!({
                "which": match exterior { Exterior::T1 => "t1", Exterior::T2 => "t2" },
                "h": h,
                "R": args.r,
                "S": s.index(),
                "samples": args.samples,
                "seed": args.seed,
                "R_max": args.r_max,
            }),
            results: vec![result],
            summary: json!({ "pass": rep.pass, "min_margin": rep.min_margin }),
            columns: BOUND_COLUMNS,
        },
        verified: rep.pass,
    })
}

fn c_delta(qp: &QuasiPolynomial, args: &BoundsArgs) -> Result<Outcome, Failure> {
    let h = args.h.unwrap_or(2.0);
    let cfg = CDeltaConfig {
        h,
        r: args.r,
        delta: args.delta,
        sample_count: args.samples,
        seed: args.seed,
        im_cap: args.im_cap,
    };
    // Branches reaching past the checked window, plus whatever sits near the origin.
    let n = ((args.im_cap + args.delta + 5.0) / (2.0 * PI)).ceil() as i64 + 2;
    let disk_radius = args.disk_radius.unwrap_or(args.r.max(10.0));
    let branch = zeros::zeros_in_index_range(qp, -n, n, 1e-12)?;
    let disk = certify::find_zeros_in_disk(qp, disk_radius, 1e-12)?;
    let all = zeros::merge_zero_sets(&branch, &disk);
    let est = bounds::estimate_c_delta(qp, &cfg, &all)?;
    let pass = est.c_hat > 0.0;
    let result = row(json!({
        "c_hat": est.c_hat,
        "argmin_re": est.argmin.re,
        "argmin_im": est.argmin.im,
        "delta": est.delta_used,
        "h": est.h_used,
        "R": est.r_used,
        "im_cap": est.im_cap,
        "samples": est.sample_count,
        "retained": est.retained,
    }));
    Ok(Outcome {
        doc: Document {
            command: "bounds",
            params: json!({
                "which": "cdelta",
                "h": h,
                "R": args.r,
                "delta": args.delta,
                "samples": args.samples,
                "seed": args.seed,
                "im_cap": args.im_cap,
                "disk_radius": disk_radius,
            }),
            results: vec![result],
            summary: json!({ "pass": pass, "c_hat": est.c_hat, "zeros_excluded": all.len() }),
            columns: CDELTA_COLUMNS,
        },
        verified: pass,
    })
}

const GAP_COLUMNS: &[&str] = &["nu", "gap", "deviation", "deviation_scaled"];

pub fn gaps(qp: &QuasiPolynomial, nu: (i64, i64), tol: f64) -> Result<Outcome, Failure> {
    check_tolerance("--tol", tol)?;
    let (lo, hi) = nu;
    if lo < 0 && hi > 0 {
        return Err(Failure::usage("gaps need an index range on one side of 0"));
    }
    let mut records = zeros::zeros_in_index_range(qp, lo, hi, tol)?;
    records.sort_by(|a, b| a.value.im.total_cmp(&b.value.im));
    let stats = zeros::gap_statistics(&records)?;
    let results = records
        .windows(2)
        .zip(stats.gaps.iter().zip(&stats.deviations_scaled))
        .map(|(pair, (&gap, &scaled))| {
            row(json!({
                "nu": pair[0].index.branch(),
                "gap": gap,
                "deviation": (gap - 2.0 * PI).abs(),
                "deviation_scaled": scaled,
            }))
        })
        .collect();
    Ok(Outcome {
        doc: Document {
            command: "gaps",
            params: json!({ "nu_min": lo, "nu_max": hi, "tol": tol }),
            results,
            summary: json!({ "count": stats.gaps.len(), "max_deviation": stats.max_deviation }),
            columns: GAP_COLUMNS,
        },
        verified: true,
    })
}

const SECTOR_COLUMNS: &[&str] = &[
    "h",
    "delta",
    "radius",
    "samples",
    "violations",
    "worst_excess",
];

pub fn sector_radius(
    qp: &QuasiPolynomial,
    h: f64,
    delta: f64,
    verify: Option<usize>,
    seed: u64,
) -> Result<Outcome, Failure> {
    let radius = regions::sector_cover_radius(qp, h, delta)?;
    let mut result = json!({ "h": h, "delta": delta, "radius": radius });
    let mut verified = true;
    if let Some(n) = verify {
        check_samples(n)?;
        let rep =
            bounds::verify_sector_cover(qp, h, delta, radius, bounds::DEFAULT_R_MAX, n, seed)?;
        result["samples"] = json!(rep.samples);
        result["violations"] = json!(rep.violations);
        result["worst_excess"] = json!(rep.worst_excess);
        verified = rep.violations == 0;
    }
    Ok(Outcome {
        doc: Document {
            command: "sector-radius",
            params: json!({ "h": h, "delta": delta, "verify": verify, "seed": seed }),
            summary: json!({ "radius": radius, "pass": verified }),
            results: vec![row(result)],
            columns: SECTOR_COLUMNS,
        },
        verified,
    })
}
