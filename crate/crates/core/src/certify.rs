//! Argument-principle certification.
//!
//! The number of zeros inside a closed contour is `(1/2 pi i) \oint f'/f`.
//! The integral is computed with a 16-point Gauss-Legendre rule per segment
//! and adaptive bisection of segments; `f'/f` comes from the
//! dominance-factored form, so contours far into either exterior domain do
//! not overflow. On top of the winding count sit the origin-disk search
//! (quadtree subdivision of the bounding square) and the completeness check
//! of a zero list against a contour.

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::quasipoly::QuasiPolynomial;
use crate::zeros::{self, ZeroIndex, ZeroRecord};

/// Contour points with relative residual below this count as hitting a zero.
pub const ZERO_ON_CONTOUR_RESIDUAL: f64 = 1e-8;

/// Segment budget of one winding computation.
pub const MAX_SEGMENTS: usize = 1 << 16;

pub const DEFAULT_QUADRATURE_TOLERANCE: f64 = 1e-8;

/// Longest initial segment.
const INITIAL_SEGMENT_LENGTH: f64 = 1.0;

/// Rounded counts farther than this from the raw integral are rejected.
const INTEGER_DISTANCE_LIMIT: f64 = 0.1;

/// Cells at least this small stop splitting when they still hold two zeros.
const DOUBLE_ZERO_CELL: f64 = 0.05;

/// Cells below this size are never split further.
const MIN_CELL: f64 = 1e-6;

/// Cells smaller than this with one zero are polished by Newton.
const POLISH_CELL: f64 = 0.5;

const PERTURBATION_RETRIES: usize = 8;

/// Counter-clockwise closed contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Contour {
    Rectangle {
        lower_left: Complex64,
        upper_right: Complex64,
    },
    Circle {
        center: Complex64,
        radius: f64,
    },
}

impl Contour {
    /// Axis-aligned rectangle with the given opposite corners.
    pub fn rectangle(a: Complex64, b: Complex64) -> Result<Self> {
        let lower_left = Complex64::new(a.re.min(b.re), a.im.min(b.im));
        let upper_right = Complex64::new(a.re.max(b.re), a.im.max(b.im));
        let (w, h) = (
            upper_right.re - lower_left.re,
            upper_right.im - lower_left.im,
        );
        if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
            return Err(Error::InvalidParameter(
                "rectangle needs positive width and height".into(),
            ));
        }
        Ok(Contour::Rectangle {
            lower_left,
            upper_right,
        })
    }

    pub fn circle(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "circle radius must be positive, got {radius}"
            )));
        }
        Ok(Contour::Circle { center, radius })
    }

    /// Strictly inside.
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Contour::Rectangle {
                lower_left,
                upper_right,
            } => {
                z.re > lower_left.re
                    && z.re < upper_right.re
                    && z.im > lower_left.im
                    && z.im < upper_right.im
            }
            Contour::Circle { center, radius } => (z - center).norm() < radius,
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Contour::Rectangle {
                lower_left,
                upper_right,
            } => (upper_right - lower_left).norm(),
            Contour::Circle { radius, .. } => 2.0 * radius,
        }
    }

    fn paths(&self) -> Vec<Path> {
        match *self {
            Contour::Rectangle {
                lower_left: a,
                upper_right: c,
            } => {
                let b = Complex64::new(c.re, a.im);
                let d = Complex64::new(a.re, c.im);
                vec![
                    Path::Line { from: a, to: b },
                    Path::Line { from: b, to: c },
                    Path::Line { from: c, to: d },
                    Path::Line { from: d, to: a },
                ]
            }
            Contour::Circle { center, radius } => vec![Path::Arc { center, radius }],
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Path {
    Line {
        from: Complex64,
        to: Complex64,
    },
    /// Full counter-clockwise circle.
    Arc {
        center: Complex64,
        radius: f64,
    },
}

impl Path {
    /// Point and derivative with respect to `s` in `[0, 1]`.
    fn at(&self, s: f64) -> (Complex64, Complex64) {
        match *self {
            Path::Line { from, to } => (from + (to - from) * s, to - from),
            Path::Arc { center, radius } => {
                let theta = 2.0 * PI * s;
                let e = Complex64::from_polar(radius, theta);
                (center + e, Complex64::new(0.0, 2.0 * PI) * e)
            }
        }
    }

    fn length(&self) -> f64 {
        match *self {
            Path::Line { from, to } => (to - from).norm(),
            Path::Arc { radius, .. } => 2.0 * PI * radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourReport {
    /// Zeros inside, with multiplicity.
    pub count: i64,
    /// `(1/2 pi i) \oint f'/f`.
    pub raw_integral: Complex64,
    pub integer_distance: f64,
    /// Smallest relative residual of `f` over the quadrature nodes.
    pub min_scaled_modulus: f64,
    pub segments_used: usize,
}

struct Segment {
    path: usize,
    s0: f64,
    s1: f64,
    value: Complex64,
}

struct Integrator<'a> {
    qp: &'a QuasiPolynomial,
    paths: Vec<Path>,
    min_residual: f64,
    min_at: Complex64,
}

impl Integrator<'_> {
    /// Gauss-Legendre value over `[s0, s1]` and the smallest residual at its nodes.
    fn rule(&mut self, path: usize, s0: f64, s1: f64) -> (Complex64, f64) {
        let g = quadrature::rule();
        let half = 0.5 * (s1 - s0);
        let mid = 0.5 * (s1 + s0);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut smallest = f64::INFINITY;
        for (x, w) in g.nodes.iter().zip(g.weights.iter()) {
            let (z, dz) = self.paths[path].at(mid + half * x);
            let (ratio, residual) = self.qp.integrand(z);
            smallest = smallest.min(residual);
            if residual < self.min_residual {
                self.min_residual = residual;
                self.min_at = z;
            }
            acc += ratio * dz * *w;
        }
        (acc * half, smallest)
    }

    fn check_point(&mut self, path: usize, s: f64) {
        let (z, _) = self.paths[path].at(s);
        let residual = self.qp.relative_residual(z);
        if residual < self.min_residual {
            self.min_residual = residual;
            self.min_at = z;
        }
    }

    fn zero_on_contour(&self) -> Option<Error> {
        (self.min_residual < ZERO_ON_CONTOUR_RESIDUAL).then(|| Error::ZeroOnContour {
            at: self.min_at,
            residual: self.min_residual,
        })
    }

    /// Returns the contour integral of `f'/f` and the number of segments used.
    fn integrate(&mut self, tolerance: f64) -> Result<(Complex64, usize)> {
        let total_length: f64 = self.paths.iter().map(Path::length).sum();
        let mut pending = Vec::new();
        for p in 0..self.paths.len() {
            let len = self.paths[p].length();
            let n = ((len / INITIAL_SEGMENT_LENGTH).ceil() as usize).max(8);
            for i in 0..n {
                let (s0, s1) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
                self.check_point(p, s0);
                let (value, _) = self.rule(p, s0, s1);
                pending.push(Segment {
                    path: p,
                    s0,
                    s1,
                    value,
                });
            }
        }
        if let Some(err) = self.zero_on_contour() {
            return Err(err);
        }

        let mut total = Complex64::new(0.0, 0.0);
        let mut accepted = 0usize;
        while let Some(seg) = pending.pop() {
            if accepted + pending.len() + 2 > MAX_SEGMENTS {
                return Err(Error::QuadratureStalled {
                    segments: MAX_SEGMENTS,
                });
            }
            let mid = 0.5 * (seg.s0 + seg.s1);
            self.check_point(seg.path, mid);
            let (left, res_l) = self.rule(seg.path, seg.s0, mid);
            let (right, res_r) = self.rule(seg.path, mid, seg.s1);
            if let Some(err) = self.zero_on_contour() {
                return Err(err);
            }
            let refined = left + right;
            let error = (refined - seg.value).norm();
            let fraction = (seg.s1 - seg.s0) * self.paths[seg.path].length() / total_length;
            // Near a zero the integrand carries rounding noise of relative size
            // eps / residual; the floor stops bisection chasing it.
            let noise = 1e-10 + 64.0 * f64::EPSILON / res_l.min(res_r);
            let floor = noise * (left.norm() + right.norm());
            if error <= tolerance * fraction || error <= floor || fraction < 1e-15 {
                total += refined;
                accepted += 2;
            } else {
                pending.push(Segment {
                    path: seg.path,
                    s0: seg.s0,
                    s1: mid,
                    value: left,
                });
                pending.push(Segment {
                    path: seg.path,
                    s0: mid,
                    s1: seg.s1,
                    value: right,
                });
            }
        }
        Ok((total, accepted))
    }
}

/// Zeros of `f` inside `contour`, counted with multiplicity.
pub fn winding_count(
    qp: &QuasiPolynomial,
    contour: &Contour,
    quadrature_tolerance: f64,
) -> Result<ContourReport> {
    if !(quadrature_tolerance > 0.0) {
        return Err(Error::InvalidParameter(
            "quadrature tolerance must be positive".into(),
        ));
    }
    let mut tolerance = quadrature_tolerance;
    let mut segments = 0;
    for _ in 0..4 {
        let mut integrator = Integrator {
            qp,
            paths: contour.paths(),
            min_residual: f64::INFINITY,
            min_at: Complex64::new(0.0, 0.0),
        };
        let (integral, used) = integrator.integrate(tolerance)?;
        segments = used;
        let raw = integral / Complex64::new(0.0, 2.0 * PI);
        let count = raw.re.round();
        let integer_distance = (raw - count).norm();
        if integer_distance < INTEGER_DISTANCE_LIMIT && count >= 0.0 {
            return Ok(ContourReport {
                count: count as i64,
                raw_integral: raw,
                integer_distance,
                min_scaled_modulus: integrator.min_residual,
                segments_used: used,
            });
        }
        tolerance *= 0.1;
    }
    Err(Error::QuadratureStalled { segments })
}

/// Winding count over the circle of `radius` about `value`, shrinking the
/// radius slightly when the circle runs into a zero.
pub fn isolation_count(qp: &QuasiPolynomial, value: Complex64, radius: f64) -> Result<(i64, f64)> {
    let mut last = None;
    for j in 0..PERTURBATION_RETRIES {
        let r = radius * (1.0 - 0.01 * j as f64);
        match winding_count(
            qp,
            &Contour::circle(value, r)?,
            DEFAULT_QUADRATURE_TOLERANCE,
        ) {
            Ok(report) => return Ok((report.count, r)),
            Err(e @ Error::ZeroOnContour { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Whether `f'` is small enough at `z` for a computed zero to be double.
fn looks_double(qp: &QuasiPolynomial, z: Complex64) -> bool {
    if z == Complex64::new(0.0, 0.0) {
        return false;
    }
    let fac = qp.factor(z);
    let (df, scale) = qp.scaled_derivative(z, &fac);
    df.norm() < 1e-3 * scale
}

/// Certify one record: the winding count around `value` must equal the
/// multiplicity. A count of 2 at an apparently simple zero means another
/// zero shares the disk, so the radius shrinks and the count is retaken.
pub fn certify_record(qp: &QuasiPolynomial, record: &mut ZeroRecord, radius: f64) -> Result<()> {
    let mut r = radius;
    for _ in 0..6 {
        let (count, used) = isolation_count(qp, record.value, r)?;
        record.isolation_radius = used;
        match count {
            1 => {
                record.multiplicity = 1;
                record.certified = true;
                return Ok(());
            }
            2 if looks_double(qp, record.value) => {
                record.multiplicity = 2;
                record.certified = true;
                return Ok(());
            }
            0 => {
                record.certified = false;
                return Ok(());
            }
            _ => r *= 0.25,
        }
    }
    record.certified = false;
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    lower_left: Complex64,
    upper_right: Complex64,
    count: i64,
}

impl Cell {
    fn diameter(&self) -> f64 {
        (self.upper_right - self.lower_left).norm()
    }

    fn centre(&self) -> Complex64 {
        0.5 * (self.lower_left + self.upper_right)
    }

    fn holds(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.lower_left.re - slack
            && z.re <= self.upper_right.re + slack
            && z.im >= self.lower_left.im - slack
            && z.im <= self.upper_right.im + slack
    }
}

/// Split through a point near the centre, shifting the split lines by
/// `1e-3 * diameter` steps until none of the four children runs into a zero
/// and their counts add up.
fn split(qp: &QuasiPolynomial, cell: &Cell, tolerance: f64) -> Result<[Cell; 4]> {
    let d = cell.diameter();
    for j in 0..=PERTURBATION_RETRIES {
        // Never split exactly through the centre: real zeros of real-coefficient
        // cases sit on the axis through it.
        let step = if j % 2 == 0 {
            (j / 2 + 1) as f64
        } else {
            -((j / 2 + 1) as f64)
        };
        let m = cell.centre() + Complex64::new(1.0, 0.618) * (1e-3 * d * step);
        let (a, c) = (cell.lower_left, cell.upper_right);
        let corners = [
            (a, m),
            (Complex64::new(m.re, a.im), Complex64::new(c.re, m.im)),
            (Complex64::new(a.re, m.im), Complex64::new(m.re, c.im)),
            (m, c),
        ];
        let counts: Vec<Result<ContourReport>> = corners
            .par_iter()
            .map(|&(lo, hi)| winding_count(qp, &Contour::rectangle(lo, hi)?, tolerance))
            .collect();
        let mut children = [*cell; 4];
        let mut retry = false;
        for (i, res) in counts.into_iter().enumerate() {
            match res {
                Ok(rep) => {
                    children[i] = Cell {
                        lower_left: corners[i].0,
                        upper_right: corners[i].1,
                        count: rep.count,
                    }
                }
                Err(Error::ZeroOnContour { .. } | Error::QuadratureStalled { .. }) => retry = true,
                Err(e) => return Err(e),
            }
        }
        if !retry && children.iter().map(|c| c.count).sum::<i64>() == cell.count {
            return Ok(children);
        }
    }
    Err(Error::SubdivisionStalled(format!(
        "could not split cell {}..{} cleanly",
        cell.lower_left, cell.upper_right
    )))
}

/// All zeros in the closed disk `|z| <= radius`, each certified.
pub fn find_zeros_in_disk(
    qp: &QuasiPolynomial,
    radius: f64,
    tolerance: f64,
) -> Result<Vec<ZeroRecord>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "disk radius must be positive, got {radius}"
        )));
    }
    let quad_tol = DEFAULT_QUADRATURE_TOLERANCE;

    let mut root = None;
    for j in 0..=PERTURBATION_RETRIES {
        let s = radius * (1.0 + 1e-3 * j as f64);
        let (lo, hi) = (Complex64::new(-s, -s), Complex64::new(s, s));
        match winding_count(qp, &Contour::rectangle(lo, hi)?, quad_tol) {
            Ok(rep) => {
                root = Some(Cell {
                    lower_left: lo,
                    upper_right: hi,
                    count: rep.count,
                });
                break;
            }
            Err(Error::ZeroOnContour { .. } | Error::QuadratureStalled { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let root = root
        .ok_or_else(|| Error::SubdivisionStalled("bounding square keeps hitting a zero".into()))?;

    let mut found: Vec<ZeroRecord> = Vec::new();
    let mut queue = VecDeque::from([root]);
    while let Some(cell) = queue.pop_front() {
        if cell.count == 0 {
            continue;
        }
        let d = cell.diameter();
        if cell.count == 1 && d < POLISH_CELL {
            let centre = cell.centre();
            let seed = if centre == Complex64::new(0.0, 0.0) {
                Complex64::new(1e-3 * d, 0.0)
            } else {
                centre
            };
            if let Ok(rec) =
                zeros::newton_refine(qp, seed, tolerance, zeros::DEFAULT_MAX_ITERATIONS)
            {
                if cell.holds(rec.value, 0.05 * d) {
                    found.push(rec);
                    continue;
                }
            }
        }
        if cell.count == 2 && d < DOUBLE_ZERO_CELL {
            if let Ok(rec) = zeros::double_newton_refine(
                qp,
                cell.centre(),
                tolerance,
                zeros::DEFAULT_MAX_ITERATIONS,
            ) {
                if cell.holds(rec.value, 0.05 * d) && looks_double(qp, rec.value) {
                    found.push(rec);
                    continue;
                }
            }
        }
        if d < MIN_CELL || (cell.count > 2 && d < DOUBLE_ZERO_CELL) {
            return Err(Error::SubdivisionStalled(format!(
                "cell of size {d:e} near {} still holds {} zeros",
                cell.centre(),
                cell.count
            )));
        }
        queue.extend(split(qp, &cell, quad_tol)?);
    }

    let mut unique: Vec<ZeroRecord> = Vec::with_capacity(found.len());
    for rec in found {
        if !unique
            .iter()
            .any(|u| (u.value - rec.value).norm() < zeros::DUPLICATE_DISTANCE)
        {
            unique.push(rec);
        }
    }
    let values: Vec<Complex64> = unique.iter().map(|r| r.value).collect();
    let nearest = zeros::nearest_neighbour_distances(&values);
    let mut inside: Vec<(ZeroRecord, f64)> = unique
        .into_iter()
        .zip(nearest)
        .filter(|(r, _)| r.value.norm() <= radius)
        .collect();
    inside.par_iter_mut().try_for_each(|(rec, nn)| {
        rec.index = ZeroIndex::Origin;
        certify_record(qp, rec, (0.5 * *nn).min(1.0))
    })?;
    let mut records: Vec<ZeroRecord> = inside.into_iter().map(|(r, _)| r).collect();
    records.sort_by(|a, b| {
        a.value
            .im
            .total_cmp(&b.value.im)
            .then(a.value.re.total_cmp(&b.value.re))
    });
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordMismatch {
    pub value: Complex64,
    pub expected_multiplicity: u32,
    pub counted: i64,
    /// Relative residual of `f` recomputed at `value`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletenessReport {
    pub pass: bool,
    pub contour: ContourReport,
    /// Sum of the records' multiplicities.
    pub expected_count: i64,
    pub record_failures: Vec<RecordMismatch>,
}

/// Records strictly inside `contour`.
pub fn records_inside(contour: &Contour, records: &[ZeroRecord]) -> Vec<ZeroRecord> {
    records
        .iter()
        .filter(|r| contour.contains(r.value))
        .cloned()
        .collect()
}

/// Largest relative residual a listed zero may have. A disk count alone
/// accepts a record moved by less than its isolation radius.
pub const RECORD_RESIDUAL_LIMIT: f64 = 1e-4;

/// Whether `records` accounts for every zero inside `contour`: the total
/// count matches, and each record counts its multiplicity in its isolation
/// disk and has a small residual.
pub fn certify_completeness(
    qp: &QuasiPolynomial,
    contour: &Contour,
    records: &[ZeroRecord],
    quadrature_tolerance: f64,
) -> Result<CompletenessReport> {
    if let Some(out) = records.iter().find(|r| !contour.contains(r.value)) {
        return Err(Error::RecordOutsideContour(out.value));
    }
    let contour_report = winding_count(qp, contour, quadrature_tolerance)?;
    let expected_count: i64 = records.iter().map(|r| r.multiplicity as i64).sum();

    let values: Vec<Complex64> = records.iter().map(|r| r.value).collect();
    let nearest = zeros::nearest_neighbour_distances(&values);
    let checks = records
        .par_iter()
        .zip(nearest.par_iter())
        .map(|(rec, &nn)| {
            let radius = if rec.isolation_radius > 0.0 {
                rec.isolation_radius
            } else {
                (0.5 * nn).min(1.0)
            };
            let (count, _) = isolation_count(qp, rec.value, radius)?;
            let residual = qp.relative_residual(rec.value);
            let bad = count != rec.multiplicity as i64 || !(residual < RECORD_RESIDUAL_LIMIT);
            Ok(bad.then_some(RecordMismatch {
                value: rec.value,
                expected_multiplicity: rec.multiplicity,
                counted: count,
                residual,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let record_failures: Vec<RecordMismatch> = checks.into_iter().flatten().collect();
    Ok(CompletenessReport {
        pass: contour_report.count == expected_count && record_failures.is_empty(),
        contour: contour_report,
        expected_count,
        record_failures,
    })
}
