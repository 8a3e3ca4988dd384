//! Region geometry around the curvilinear strip.
//!
//! The strip for branch `S` is `|Re z + (-1)^S k ln|z|| <= h` outside the
//! disk `|z| <= R`; its two sides are the exterior domains. Every point of
//! the plane gets exactly one [`RegionLabel`]:
//!
//! * `|z| <= R` is the origin disk (closed),
//! * offset `< -h` is `TExterior1`,
//! * `|offset| <= h` is the strip (the level curves `|offset| = h` included),
//! * offset `> h` is `TExterior2`, the complement of the other three.
//!
//! Real-axis points of the strip are put in the upper half `j = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quasipoly::QuasiPolynomial;

/// Samples per lateral side of a quadrangle.
pub const QUADRANGLE_SIDE_SAMPLES: usize = 64;

/// Branch selector `S` of the sign `(-1)^S` in front of `k ln|z|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `S = 1`: offset `Re z - k ln|z|`.
    One,
    /// `S = 2`: offset `Re z + k ln|z|`.
    Two,
}

impl Branch {
    pub fn from_index(s: u8) -> Result<Self> {
        match s {
            1 => Ok(Branch::One),
            2 => Ok(Branch::Two),
            _ => Err(Error::InvalidParameter(format!(
                "branch S must be 1 or 2, got {s}"
            ))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Branch::One => 1,
            Branch::Two => 2,
        }
    }

    /// `(-1)^S`.
    pub fn sign(self) -> f64 {
        match self {
            Branch::One => -1.0,
            Branch::Two => 1.0,
        }
    }
}

/// Half-plane index `j`: `j = 1` for `Im z > 0` (and the real axis), `j = 2` below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Half {
    Upper,
    Lower,
}

impl Half {
    pub fn index(self) -> u8 {
        match self {
            Half::Upper => 1,
            Half::Lower => 2,
        }
    }

    pub fn of(z: Complex64) -> Self {
        if z.im < 0.0 {
            Half::Lower
        } else {
            Half::Upper
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionParams {
    pub h: f64,
    pub r: f64,
    pub s: Branch,
    pub delta: Option<f64>,
}

impl RegionParams {
    pub fn new(h: f64, r: f64, s: Branch) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "h must be positive, got {h}"
            )));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "R must be positive, got {r}"
            )));
        }
        Ok(Self {
            h,
            r,
            s,
            delta: None,
        })
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive, got {delta}"
            )));
        }
        self.delta = Some(delta);
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    OriginDisk,
    TExterior1,
    TExterior2,
    Strip(Half),
}

impl RegionLabel {
    pub fn tag(&self) -> &'static str {
        match self {
            RegionLabel::OriginDisk => "OriginDisk",
            RegionLabel::TExterior1 => "TExterior1",
            RegionLabel::TExterior2 => "TExterior2",
            RegionLabel::Strip(_) => "Strip",
        }
    }

    pub fn half(&self) -> Option<Half> {
        match self {
            RegionLabel::Strip(h) => Some(*h),
            _ => None,
        }
    }
}

/// `Re z + (-1)^S k ln|z|`.
pub fn signed_offset(qp: &QuasiPolynomial, z: Complex64, s: Branch) -> Result<f64> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::DomainError(z));
    }
    Ok(z.re + s.sign() * qp.k() as f64 * z.norm().ln())
}

pub fn classify(qp: &QuasiPolynomial, z: Complex64, params: &RegionParams) -> RegionLabel {
    if z.norm() <= params.r {
        return RegionLabel::OriginDisk;
    }
    // |z| > R > 0, so the offset is defined.
    let t = z.re + params.s.sign() * qp.k() as f64 * z.norm().ln();
    if t < -params.h {
        RegionLabel::TExterior1
    } else if t > params.h {
        RegionLabel::TExterior2
    } else {
        RegionLabel::Strip(Half::of(z))
    }
}

/// Whether `|arg z + (-1)^i pi/2| < delta`; `Half::Upper` is the sector around `+i`.
pub fn sector_contains(z: Complex64, delta: f64, i: Half) -> Result<bool> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::DomainError(z));
    }
    let centre = match i {
        Half::Upper => PI / 2.0,
        Half::Lower => -PI / 2.0,
    };
    Ok((z.arg() - centre).abs() < delta)
}

/// Smallest `R` for which the strip (either branch) beyond `R` lies inside
/// the two sectors of half-angle `delta`.
///
/// A strip point has `|Re z| <= h + k ln|z|`, so its angle from the
/// imaginary axis is below `delta` once `(h + k ln r) / r < sin delta`.
/// The largest root of that equation is found by bisection on the
/// decreasing branch of the ratio.
pub fn sector_cover_radius(qp: &QuasiPolynomial, h: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < PI / 2.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, pi/2), got {delta}"
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "h must be positive, got {h}"
        )));
    }
    let k = qp.k() as f64;
    let target = delta.sin();
    let ratio = |r: f64| (h + k * r.ln()) / r;

    // The ratio peaks at r = e^(1 - h/k) and decreases beyond it.
    let mut lo = (1.0 - h / k).exp().max(1.0);
    if ratio(lo) <= target {
        return Ok(lo);
    }
    let mut hi = 2.0 * lo;
    while ratio(hi) > target {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NoSolution(
                "sector cover radius bracket diverged".into(),
            ));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Point `x + i y` on the level curve `x + (-1)^S k ln|x + i y| = offset`.
///
/// For `|y| > k/2` the left side is strictly increasing in `x`, so the
/// solution is unique; a bracketed Newton iteration finds it.
pub fn level_curve_point(
    qp: &QuasiPolynomial,
    y: f64,
    offset: f64,
    s: Branch,
) -> Result<Complex64> {
    let k = qp.k() as f64;
    if !(y.abs() > 0.5 * k) {
        return Err(Error::DomainError(Complex64::new(offset, y)));
    }
    let sk = s.sign() * k;
    let g = |x: f64| x + 0.5 * sk * (x * x + y * y).ln() - offset;
    let dg = |x: f64| 1.0 + sk * x / (x * x + y * y);

    let mut x = offset - sk * y.abs().ln();
    let mut lo = x - 1.0;
    let mut hi = x + 1.0;
    while g(lo) > 0.0 {
        lo -= 2.0 * (hi - lo);
    }
    while g(hi) < 0.0 {
        hi += 2.0 * (hi - lo);
    }
    for _ in 0..100 {
        let gx = g(x);
        if gx == 0.0 {
            break;
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - gx / dg(x);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    Ok(Complex64::new(x, y))
}

/// Ordinate of the horizontal line `l_nu` through a zero: `Im z - (pi + k pi/2 + arg A)`.
pub fn line_ordinate(qp: &QuasiPolynomial, zero: Complex64) -> f64 {
    zero.im - (PI + PI * qp.k() as f64 / 2.0 + qp.arg_a())
}

/// A strip cell between two horizontal lines and the level curves at `-h` and `+h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrangle {
    pub nu: i64,
    pub lower_ordinate: f64,
    pub upper_ordinate: f64,
    pub left_curve_samples: Vec<Complex64>,
    pub right_curve_samples: Vec<Complex64>,
    /// Largest distance between two boundary points.
    pub diagonal: f64,
}

impl Quadrangle {
    pub fn height(&self) -> f64 {
        self.upper_ordinate - self.lower_ordinate
    }
}

pub fn strip_quadrangle(
    qp: &QuasiPolynomial,
    params: &RegionParams,
    nu: i64,
    ordinates: (f64, f64),
) -> Result<Quadrangle> {
    let (lower, upper) = if ordinates.0 <= ordinates.1 {
        ordinates
    } else {
        (ordinates.1, ordinates.0)
    };
    let n = QUADRANGLE_SIDE_SAMPLES;
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for i in 0..n {
        let y = lower + (upper - lower) * i as f64 / (n - 1) as f64;
        let outside = |_| Error::OutsideStrip { ordinate: y };
        let l = level_curve_point(qp, y, -params.h, params.s).map_err(outside)?;
        let r = level_curve_point(qp, y, params.h, params.s).map_err(outside)?;
        if l.norm() <= params.r || r.norm() <= params.r {
            return Err(Error::OutsideStrip { ordinate: y });
        }
        left.push(l);
        right.push(r);
    }
    let mut diagonal = 0.0f64;
    let all: Vec<Complex64> = left.iter().chain(right.iter()).copied().collect();
    for (i, p) in all.iter().enumerate() {
        for q in &all[i + 1..] {
            diagonal = diagonal.max((p - q).norm());
        }
    }
    Ok(Quadrangle {
        nu,
        lower_ordinate: lower,
        upper_ordinate: upper,
        left_curve_samples: left,
        right_curve_samples: right,
        diagonal,
    })
}
