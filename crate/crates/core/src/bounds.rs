//! Sampled verification of the lower bounds of `|f|`.
//!
//! * Left exterior (`Re z - k ln|z| < -h`): `|f| >= |A| |z|^k / 2` once `h > ln(2/|A|)`.
//! * Right exterior: `|f| >= |e^z| / 2` once `h > ln(2|A|)`.
//! * Strip minus disks of radius `delta` about its zeros: `|f| >= C_delta |z|^k`.
//!
//! Margins are ratios `|f| / bound`, formed in log space from
//! [`QuasiPolynomial::evaluate_scaled`] so samples with `Re z` in the
//! hundreds stay finite. Sampling is chunked over seeded ChaCha streams (see
//! [`crate::sampling`]) and reduced in chunk order, so a seed fixes the
//! report bit for bit regardless of thread count.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::certify::{self, Contour, DEFAULT_QUADRATURE_TOLERANCE};
use crate::error::{Error, Result};
use crate::quasipoly::QuasiPolynomial;
use crate::regions::{classify, sector_contains, Branch, Half, RegionLabel, RegionParams};
use crate::sampling::{chunk_rng, chunk_sizes, log_radial_point, strip_point, Ordinate};
use crate::zeros::{separation_radius, ZeroRecord};

/// Outer radius of the sampled annulus.
pub const DEFAULT_R_MAX: f64 = 1e3;

/// Default ordinate cap for the punctured-strip sampler: 60 strip periods.
pub const DEFAULT_IM_CAP: f64 = 2.0 * PI * 60.0;

/// Consecutive rejections after which a region is declared empty.
pub const MAX_REJECTIONS: usize = 1_000_000;

/// Smallest admissible `h`.
pub const H_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exterior {
    /// Left side of the strip, bounded below by `|A| |z|^k / 2`.
    T1,
    /// Right side of the strip, bounded below by `|e^z| / 2`.
    T2,
}

impl Exterior {
    fn label(self) -> RegionLabel {
        match self {
            Exterior::T1 => RegionLabel::TExterior1,
            Exterior::T2 => RegionLabel::TExterior2,
        }
    }
}

/// Smallest `h` for which the exterior bound is guaranteed:
/// `ln(2/|A|)` for `T1`, `ln(2|A|)` for `T2`, never below [`H_FLOOR`].
pub fn h_threshold(qp: &QuasiPolynomial, which: Exterior) -> f64 {
    let raw = match which {
        Exterior::T1 => (2.0 * qp.b_magnitude()).ln(),
        Exterior::T2 => LN_2 + qp.ln_abs_a(),
    };
    raw.max(H_FLOOR)
}

/// `|f(z)| / (|A| |z|^k / 2)`.
pub fn t1_margin(qp: &QuasiPolynomial, z: Complex64) -> Result<f64> {
    let s = qp.evaluate_scaled(z)?;
    let bound = -LN_2 + qp.ln_abs_a() + qp.k() as f64 * z.norm().ln();
    Ok((s.log_magnitude - bound).exp())
}

/// `|f(z)| / (|e^z| / 2)`.
pub fn t2_margin(qp: &QuasiPolynomial, z: Complex64) -> Result<f64> {
    let s = qp.evaluate_scaled(z)?;
    Ok((s.log_magnitude - (z.re - LN_2)).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub region_descriptor: String,
    pub exterior: Exterior,
    pub branch: Branch,
    pub h: f64,
    pub r: f64,
    pub r_max: f64,
    /// The threshold `h` had to exceed.
    pub threshold_h_used: f64,
    pub samples: usize,
    /// Smallest `|f| / bound` over the samples.
    pub min_margin: f64,
    pub worst_point: Complex64,
    pub pass: bool,
}

/// Worst sample of one chunk: (margin, point).
type Worst = (f64, Complex64);

fn reduce_worst(parts: Vec<Worst>) -> Worst {
    parts
        .into_iter()
        .fold((f64::INFINITY, Complex64::new(0.0, 0.0)), |acc, w| {
            if w.0 < acc.0 {
                w
            } else {
                acc
            }
        })
}

/// Sample the exterior domain `which` of branch `s` and check its bound.
///
/// `verify_t1_bound` and `verify_t2_bound` are the pairings `(T1, S=1)` and
/// `(T2, S=2)`; the other pairings are reachable here.
pub fn verify_exterior_bound(
    qp: &QuasiPolynomial,
    which: Exterior,
    s: Branch,
    h: f64,
    r: f64,
    r_max: f64,
    sample_count: usize,
    seed: u64,
) -> Result<BoundReport> {
    let threshold = h_threshold(qp, which);
    if !(h > threshold) {
        return Err(Error::PreconditionH { h, threshold });
    }
    if !(r_max > r) {
        return Err(Error::InvalidParameter(format!(
            "need R_max > R, got R = {r}, R_max = {r_max}"
        )));
    }
    if sample_count == 0 {
        return Err(Error::InvalidParameter(
            "sample count must be at least 1".into(),
        ));
    }
    let params = RegionParams::new(h, r, s)?;
    let target = which.label();
    let margin = |z| match which {
        Exterior::T1 => t1_margin(qp, z),
        Exterior::T2 => t2_margin(qp, z),
    };

    let parts = chunk_sizes(sample_count)
        .into_par_iter()
        .enumerate()
        .map(|(chunk, size)| -> Result<Worst> {
            let mut rng = chunk_rng(seed, chunk);
            let mut worst = (f64::INFINITY, Complex64::new(0.0, 0.0));
            for _ in 0..size {
                let mut rejections = 0;
                let z = loop {
                    let z = log_radial_point(&mut rng, r, r_max);
                    if classify(qp, z, &params) == target {
                        break z;
                    }
                    rejections += 1;
                    if rejections >= MAX_REJECTIONS {
                        return Err(Error::EmptyRegionSample(rejections));
                    }
                };
                let m = margin(z)?;
                if m < worst.0 {
                    worst = (m, z);
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    let (min_margin, worst_point) = reduce_worst(parts);

    let name = match which {
        Exterior::T1 => "T1",
        Exterior::T2 => "T2",
    };
    Ok(BoundReport {
        region_descriptor: format!(
            "{name} exterior, S={}, h={h}, R={r}, R_max={r_max}",
            s.index()
        ),
        exterior: which,
        branch: s,
        h,
        r,
        r_max,
        threshold_h_used: threshold,
        samples: sample_count,
        min_margin,
        worst_point,
        pass: min_margin >= 1.0,
    })
}

/// `|f| >= |A| |z|^k / 2` on the left exterior of the `S = 1` strip.
pub fn verify_t1_bound(
    qp: &QuasiPolynomial,
    h: f64,
    r: f64,
    sample_count: usize,
    seed: u64,
) -> Result<BoundReport> {
    verify_exterior_bound(
        qp,
        Exterior::T1,
        Branch::One,
        h,
        r,
        DEFAULT_R_MAX,
        sample_count,
        seed,
    )
}

/// `|f| >= |e^z| / 2` on the right exterior of the `S = 2` strip.
pub fn verify_t2_bound(
    qp: &QuasiPolynomial,
    h: f64,
    r: f64,
    sample_count: usize,
    seed: u64,
) -> Result<BoundReport> {
    verify_exterior_bound(
        qp,
        Exterior::T2,
        Branch::Two,
        h,
        r,
        DEFAULT_R_MAX,
        sample_count,
        seed,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorReport {
    pub h: f64,
    pub delta: f64,
    pub r: f64,
    pub samples: usize,
    pub violations: usize,
    /// Sample farthest (in angle) from its sector, with that angular excess.
    pub worst_point: Complex64,
    pub worst_excess: f64,
}

/// Sample strip points of both branches beyond `r` and count those outside
/// the sectors of half-angle `delta` about the imaginary axis.
pub fn verify_sector_cover(
    qp: &QuasiPolynomial,
    h: f64,
    delta: f64,
    r: f64,
    r_max: f64,
    sample_count: usize,
    seed: u64,
) -> Result<SectorReport> {
    if !(h > 0.0 && delta > 0.0 && r > 0.0 && r_max > r) {
        return Err(Error::InvalidParameter(
            "need h, delta, R > 0 and R_max > R".into(),
        ));
    }
    let k = qp.k() as f64;
    let ordinate = Ordinate::LogUniform {
        lo: k.max(0.25 * r),
        hi: r_max,
    };
    let parts = chunk_sizes(sample_count)
        .into_par_iter()
        .enumerate()
        .map(|(chunk, size)| -> Result<(usize, f64, Complex64)> {
            let mut rng = chunk_rng(seed, chunk);
            let mut violations = 0;
            let mut worst = (f64::NEG_INFINITY, Complex64::new(0.0, 0.0));
            for i in 0..size {
                let s = if i % 2 == 0 { Branch::One } else { Branch::Two };
                let mut rejections = 0;
                let z = loop {
                    let z = strip_point(&mut rng, qp, h, s, ordinate)?;
                    if z.norm() >= r {
                        break z;
                    }
                    rejections += 1;
                    if rejections >= MAX_REJECTIONS {
                        return Err(Error::EmptyRegionSample(rejections));
                    }
                };
                let half = Half::of(z);
                if !sector_contains(z, delta, half)? {
                    violations += 1;
                }
                let centre = if half == Half::Upper {
                    PI / 2.0
                } else {
                    -PI / 2.0
                };
                let excess = (z.arg() - centre).abs() - delta;
                if excess > worst.0 {
                    worst = (excess, z);
                }
            }
            Ok((violations, worst.0, worst.1))
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = parts.iter().map(|p| p.0).sum();
    let (worst_excess, worst_point) =
        parts
            .iter()
            .fold((f64::NEG_INFINITY, Complex64::new(0.0, 0.0)), |acc, p| {
                if p.1 > acc.0 {
                    (p.1, p.2)
                } else {
                    acc
                }
            });
    Ok(SectorReport {
        h,
        delta,
        r,
        samples: sample_count,
        violations,
        worst_point,
        worst_excess,
    })
}

/// Empirical lower-bound constant on the punctured strip.
#[derive(Debug, Clone, PartialEq)]
pub struct CDeltaEstimate {
    /// Smallest `|f(z)| / |z|^k` over the retained samples.
    pub c_hat: f64,
    pub argmin: Complex64,
    pub delta_used: f64,
    pub h_used: f64,
    pub r_used: f64,
    pub im_cap: f64,
    pub k: u32,
    pub a: Complex64,
    /// Strip points drawn.
    pub sample_count: usize,
    /// Of those, the points outside every exclusion disk.
    pub retained: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CDeltaConfig {
    pub h: f64,
    pub r: f64,
    pub delta: f64,
    pub sample_count: usize,
    pub seed: u64,
    pub im_cap: f64,
}

/// Estimate `C_delta` by sampling the `S = 1` strip with `|Im z| <= im_cap`
/// and `|z| >= R`, dropping points within `delta` of a listed zero.
///
/// The same seed draws the same strip points for every `delta`, so a
/// smaller `delta` gives a superset of retained points and a smaller or
/// equal estimate. `zeros` must contain every zero of the sampled window
/// (origin-disk zeros included); this is checked by a winding count.
pub fn estimate_c_delta(
    qp: &QuasiPolynomial,
    cfg: &CDeltaConfig,
    zeros: &[ZeroRecord],
) -> Result<CDeltaEstimate> {
    let CDeltaConfig {
        h,
        r,
        delta,
        sample_count,
        seed,
        im_cap,
    } = *cfg;
    if !(h > 0.0 && r > 0.0 && delta > 0.0 && im_cap > r && sample_count > 0) {
        return Err(Error::InvalidParameter(
            "need h, R, delta > 0, im_cap > R and a positive sample count".into(),
        ));
    }
    let separation = separation_radius(zeros)?;
    if delta >= separation {
        return Err(Error::DeltaTooLarge { delta, separation });
    }
    check_window(qp, cfg, zeros)?;

    let k = qp.k() as f64;
    let mut centres: Vec<Complex64> = zeros.iter().map(|z| z.value).collect();
    centres.sort_by(|a, b| a.im.total_cmp(&b.im));
    let ordinate = Ordinate::Uniform {
        lo: k.max(0.25 * r),
        hi: im_cap,
    };

    let parts = chunk_sizes(sample_count)
        .into_par_iter()
        .enumerate()
        .map(|(chunk, size)| -> Result<(usize, f64, Complex64)> {
            let mut rng = chunk_rng(seed, chunk);
            let mut retained = 0;
            let mut worst = (f64::INFINITY, Complex64::new(0.0, 0.0));
            for _ in 0..size {
                let z = strip_point(&mut rng, qp, h, Branch::One, ordinate)?;
                if z.norm() < r || near_any(&centres, z, delta) {
                    continue;
                }
                retained += 1;
                let s = qp.evaluate_scaled(z)?;
                let ratio = (s.log_magnitude - k * z.norm().ln()).exp();
                if ratio < worst.0 {
                    worst = (ratio, z);
                }
            }
            Ok((retained, worst.0, worst.1))
        })
        .collect::<Result<Vec<_>>>()?;
    let retained = parts.iter().map(|p| p.0).sum();
    let (c_hat, argmin) = reduce_worst(parts.into_iter().map(|p| (p.1, p.2)).collect());
    Ok(CDeltaEstimate {
        c_hat: if retained == 0 { f64::NAN } else { c_hat },
        argmin,
        delta_used: delta,
        h_used: h,
        r_used: r,
        im_cap,
        k: qp.k(),
        a: qp.a(),
        sample_count,
        retained,
    })
}

/// Whether `z` is within `delta` of a centre; `centres` sorted by `Im`.
fn near_any(centres: &[Complex64], z: Complex64, delta: f64) -> bool {
    let start = centres.partition_point(|c| c.im < z.im - delta);
    centres[start..]
        .iter()
        .take_while(|c| c.im <= z.im + delta)
        .any(|c| (c - z).norm() < delta)
}

/// The zero list must match the winding count over a box covering the
/// sampled window and its `delta` margin.
fn check_window(qp: &QuasiPolynomial, cfg: &CDeltaConfig, zeros: &[ZeroRecord]) -> Result<()> {
    let k = qp.k() as f64;
    let top = cfg.im_cap + cfg.delta + 1.0;
    let right = k * (top.hypot(cfg.r)).ln() + cfg.h + cfg.delta + 1.0;
    let left = -(cfg.r + cfg.delta + 1.0);
    let mut last = None;
    for j in 0..8 {
        let grow = 0.37 * j as f64;
        let window = Contour::rectangle(
            Complex64::new(left - grow, -top - grow),
            Complex64::new(right + grow, top + grow),
        )?;
        let listed = certify::records_inside(&window, zeros);
        match certify::winding_count(qp, &window, DEFAULT_QUADRATURE_TOLERANCE) {
            Ok(rep) => {
                let listed: i64 = listed.iter().map(|z| z.multiplicity as i64).sum();
                if rep.count != listed {
                    return Err(Error::IncompleteZeroList {
                        counted: rep.count,
                        listed,
                    });
                }
                return Ok(());
            }
            Err(e @ Error::ZeroOnContour { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}
