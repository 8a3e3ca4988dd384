//! The indexed zero family `lambda_nu`.
//!
//! Writing `e^z = -A z^k` as `z = ln|A| + i(arg A + pi) + k Log z + 2 pi i nu`
//! gives one zero per branch `nu` for large `|nu|`. Substituting
//! `xi = z - 2 pi nu i` turns this into the fixed-point map
//! `xi <- ln|A| + i(arg A + pi) + k Log(2 pi nu i + xi)`, whose first
//! iterate from `xi = 0` is the asymptotic seed
//!
//! ```text
//! z_nu ~ ln|A| + k ln(2 pi |nu|) + i (2 pi nu + pi + sign(nu) k pi/2 + arg A)
//! ```
//!
//! with remainder `O(ln|nu| / nu)`. Seeds are polished by Newton's method,
//! falling back to the fixed-point map when Newton leaves the seed's basin.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::certify;
use crate::error::{Error, Result};
use crate::quasipoly::QuasiPolynomial;

/// Newton iterates farther than this from their seed are abandoned.
pub const BASIN_RADIUS: f64 = 3.0;

/// Two zeros closer than this are considered the same zero.
pub const DUPLICATE_DISTANCE: f64 = 1e-6;

pub const DEFAULT_MAX_ITERATIONS: usize = 100;

const FIXED_POINT_MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ZeroIndex {
    Branch(i64),
    /// Not attached to a branch: found by the origin-disk search.
    Origin,
}

impl ZeroIndex {
    pub fn branch(&self) -> Option<i64> {
        match self {
            ZeroIndex::Branch(nu) => Some(*nu),
            ZeroIndex::Origin => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroRecord {
    pub index: ZeroIndex,
    pub value: Complex64,
    /// `|f| / max(|e^z|, |A z^k|)` at `value`.
    pub residual: f64,
    pub seed: Complex64,
    pub iterations: usize,
    /// The winding count over the isolation circle equals `multiplicity`.
    pub certified: bool,
    /// Radius of the certification circle; 0 until certified.
    pub isolation_radius: f64,
    pub multiplicity: u32,
}

impl ZeroRecord {
    pub(crate) fn uncertified(
        index: ZeroIndex,
        value: Complex64,
        residual: f64,
        seed: Complex64,
        iterations: usize,
    ) -> Self {
        Self {
            index,
            value,
            residual,
            seed,
            iterations,
            certified: false,
            isolation_radius: 0.0,
            multiplicity: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    /// `xi_0, xi_1, ...` starting from the asymptotic seed.
    pub xi_sequence: Vec<Complex64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapStats {
    pub gaps: Vec<f64>,
    pub max_deviation: f64,
    /// `|gap - 2 pi| |nu| / ln(|nu| + 2)` with `nu` the lower record's branch.
    pub deviations_scaled: Vec<f64>,
}

fn sign(nu: i64) -> f64 {
    match nu.cmp(&0) {
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
        std::cmp::Ordering::Greater => 1.0,
    }
}

/// Leading-order location of the zero on branch `nu`.
pub fn asymptotic_zero(qp: &QuasiPolynomial, nu: i64) -> Result<Complex64> {
    if nu == 0 {
        return Err(Error::InvalidIndex(nu));
    }
    let k = qp.k() as f64;
    let nuf = nu as f64;
    let re = qp.ln_abs_a() + k * (2.0 * PI * nuf.abs()).ln();
    let im = 2.0 * PI * nuf + PI + sign(nu) * k * PI / 2.0 + qp.arg_a();
    Ok(Complex64::new(re, im))
}

/// Branch whose asymptotic ordinate is nearest to `z`, or `Origin` when
/// `z` does not sit on an indexed branch.
pub fn branch_of(qp: &QuasiPolynomial, z: Complex64) -> ZeroIndex {
    if z.im == 0.0 {
        return ZeroIndex::Origin;
    }
    let s = z.im.signum();
    let k = qp.k() as f64;
    let x = (z.im - PI - s * k * PI / 2.0 - qp.arg_a()) / (2.0 * PI);
    let nu = x.round() as i64;
    if nu == 0 || sign(nu) != s {
        return ZeroIndex::Origin;
    }
    match asymptotic_zero(qp, nu) {
        Ok(seed) if (seed.im - z.im).abs() < PI => ZeroIndex::Branch(nu),
        _ => ZeroIndex::Origin,
    }
}

/// Iterate the substitution map for branch `nu` until successive `xi`
/// differ by less than `tolerance`.
pub fn fixed_point_refine(
    qp: &QuasiPolynomial,
    nu: i64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<(ZeroRecord, IterationTrace)> {
    let k = qp.k() as f64;
    if nu == 0 || 2.0 * PI * (nu as f64).abs() <= 2.0 * k {
        return Err(Error::InvalidIndex(nu));
    }
    let seed = asymptotic_zero(qp, nu)?;
    let shift = Complex64::new(0.0, 2.0 * PI * nu as f64);
    let constant = Complex64::new(qp.ln_abs_a(), qp.arg_a() + PI);

    let mut xi = seed - shift;
    let mut trace = vec![xi];
    let mut last_step = f64::INFINITY;
    for _ in 0..max_iterations {
        let next = constant + k * (shift + xi).ln();
        last_step = (next - xi).norm();
        xi = next;
        trace.push(xi);
        if last_step < tolerance {
            let value = shift + xi;
            let record = ZeroRecord::uncertified(
                ZeroIndex::Branch(nu),
                value,
                qp.relative_residual(value),
                seed,
                trace.len() - 1,
            );
            return Ok((
                record,
                IterationTrace {
                    xi_sequence: trace,
                    converged: true,
                },
            ));
        }
    }
    Err(Error::NotConverged {
        iterations: max_iterations,
        last_step,
    })
}

/// Newton's method from `seed` until the relative residual drops below
/// `tolerance`.
pub fn newton_refine(
    qp: &QuasiPolynomial,
    seed: Complex64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<ZeroRecord> {
    if seed == Complex64::new(0.0, 0.0) {
        return Err(Error::DomainError(seed));
    }
    let mut z = seed;
    let mut residual = qp.relative_residual(z);
    for iteration in 0..=max_iterations {
        if residual < tolerance {
            return Ok(ZeroRecord::uncertified(
                branch_of(qp, z),
                z,
                residual,
                seed,
                iteration,
            ));
        }
        if iteration == max_iterations {
            break;
        }
        z -= qp.newton_ratio(z)?;
        if !(z.re.is_finite() && z.im.is_finite()) || (z - seed).norm() > BASIN_RADIUS {
            return Err(Error::EscapedBasin { seed, at: z });
        }
        residual = qp.relative_residual(z);
    }
    Err(Error::MaxIterations {
        iterations: max_iterations,
        residual,
    })
}

/// Newton's method with step `2 f/f'`, quadratically convergent at a
/// double zero.
pub(crate) fn double_newton_refine(
    qp: &QuasiPolynomial,
    seed: Complex64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<ZeroRecord> {
    let mut z = seed;
    let mut residual = qp.relative_residual(z);
    for iteration in 0..=max_iterations {
        if residual < tolerance {
            let mut rec = ZeroRecord::uncertified(ZeroIndex::Origin, z, residual, seed, iteration);
            rec.multiplicity = 2;
            return Ok(rec);
        }
        if iteration == max_iterations {
            break;
        }
        let step = match qp.newton_ratio(z) {
            Ok(step) => step,
            Err(Error::DerivativeVanishes(_)) => break,
            Err(e) => return Err(e),
        };
        let next = z - 2.0 * step;
        let next_residual = qp.relative_residual(next);
        if next_residual >= residual && residual < tolerance.sqrt() {
            break;
        }
        z = next;
        residual = next_residual;
        if (z - seed).norm() > BASIN_RADIUS {
            return Err(Error::EscapedBasin { seed, at: z });
        }
    }
    if residual < tolerance {
        let mut rec = ZeroRecord::uncertified(ZeroIndex::Origin, z, residual, seed, max_iterations);
        rec.multiplicity = 2;
        return Ok(rec);
    }
    Err(Error::MaxIterations {
        iterations: max_iterations,
        residual,
    })
}

/// Refine the zero of branch `nu`: Newton from the asymptotic seed, with the
/// fixed-point map as fallback when Newton cannot stay in the basin.
pub fn refine_branch(qp: &QuasiPolynomial, nu: i64, tolerance: f64) -> Result<ZeroRecord> {
    let seed = asymptotic_zero(qp, nu)?;
    let mut record = match newton_refine(qp, seed, tolerance, DEFAULT_MAX_ITERATIONS) {
        Ok(rec) => rec,
        Err(first) => {
            if !matches!(
                first,
                Error::EscapedBasin { .. }
                    | Error::MaxIterations { .. }
                    | Error::DerivativeVanishes(_)
            ) {
                return Err(first.at_index(nu));
            }
            let (fp, _) = fixed_point_refine(qp, nu, 1e-14, FIXED_POINT_MAX_ITERATIONS)
                .map_err(|_| first.clone().at_index(nu))?;
            let mut polished = newton_refine(qp, fp.value, tolerance, DEFAULT_MAX_ITERATIONS)
                .map_err(|e| e.at_index(nu))?;
            polished.iterations += fp.iterations;
            polished
        }
    };
    record.index = ZeroIndex::Branch(nu);
    record.seed = seed;
    Ok(record)
}

/// Nearest-neighbour distance for each point (infinite for a lone point).
pub(crate) fn nearest_neighbour_distances(points: &[Complex64]) -> Vec<f64> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| (p - q).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Refine and certify every branch `nu_min..=nu_max` (skipping 0).
pub fn zeros_in_index_range(
    qp: &QuasiPolynomial,
    nu_min: i64,
    nu_max: i64,
    tolerance: f64,
) -> Result<Vec<ZeroRecord>> {
    if nu_min > nu_max {
        return Err(Error::InvalidParameter(format!(
            "empty index range {nu_min}..{nu_max}"
        )));
    }
    let indices: Vec<i64> = (nu_min..=nu_max).filter(|&nu| nu != 0).collect();
    let mut records = indices
        .par_iter()
        .map(|&nu| refine_branch(qp, nu, tolerance))
        .collect::<Result<Vec<_>>>()?;

    let values: Vec<Complex64> = records.iter().map(|r| r.value).collect();
    let nearest = nearest_neighbour_distances(&values);
    if let Some(i) = nearest.iter().position(|&d| d < DUPLICATE_DISTANCE) {
        return Err(Error::DuplicateZero(values[i]));
    }

    records
        .par_iter_mut()
        .zip(nearest.par_iter())
        .try_for_each(|(rec, &nn)| {
            let nu = rec.index.branch().unwrap_or(0);
            certify::certify_record(qp, rec, (0.5 * nn).min(1.0)).map_err(|e| e.at_index(nu))
        })?;
    Ok(records)
}

/// Union of zero lists, keeping the first occurrence of values that agree
/// to within `DUPLICATE_DISTANCE`.
pub fn merge_zero_sets(primary: &[ZeroRecord], extra: &[ZeroRecord]) -> Vec<ZeroRecord> {
    let mut merged: Vec<ZeroRecord> = primary.to_vec();
    for rec in extra {
        if !merged
            .iter()
            .any(|m| (m.value - rec.value).norm() < DUPLICATE_DISTANCE)
        {
            merged.push(rec.clone());
        }
    }
    merged
}

/// Distances between consecutive zeros of one half-plane, ordered by `Im`.
pub fn gap_statistics(records: &[ZeroRecord]) -> Result<GapStats> {
    if records.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: records.len(),
        });
    }
    let upper = records[0].value.im >= 0.0;
    if records.iter().any(|r| (r.value.im >= 0.0) != upper) {
        return Err(Error::InvalidParameter(
            "gap statistics need zeros from a single half-plane".into(),
        ));
    }
    let mut sorted: Vec<&ZeroRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.value.im.total_cmp(&b.value.im));

    let mut gaps = Vec::with_capacity(sorted.len() - 1);
    let mut scaled = Vec::with_capacity(sorted.len() - 1);
    for pair in sorted.windows(2) {
        let gap = (pair[1].value - pair[0].value).norm();
        let nu = match (pair[0].index.branch(), pair[1].index.branch()) {
            (Some(a), Some(b)) => a.abs().min(b.abs()),
            _ => 0,
        } as f64;
        gaps.push(gap);
        scaled.push((gap - 2.0 * PI).abs() * nu / (nu + 2.0).ln());
    }
    let max_deviation = gaps
        .iter()
        .map(|g| (g - 2.0 * PI).abs())
        .fold(0.0, f64::max);
    Ok(GapStats {
        gaps,
        max_deviation,
        deviations_scaled: scaled,
    })
}

/// Half the smallest pairwise distance: disks of this radius about the
/// zeros are pairwise disjoint.
pub fn separation_radius(records: &[ZeroRecord]) -> Result<f64> {
    if records.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: records.len(),
        });
    }
    let values: Vec<Complex64> = records.iter().map(|r| r.value).collect();
    let nearest = nearest_neighbour_distances(&values);
    let (i, min) = nearest
        .iter()
        .copied()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |acc, (i, d)| if d < acc.1 { (i, d) } else { acc },
        );
    if min < DUPLICATE_DISTANCE {
        return Err(Error::DuplicateZero(values[i]));
    }
    Ok(0.5 * min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn qp(k: u32, a: Complex64) -> QuasiPolynomial {
        QuasiPolynomial::new(k, a).unwrap()
    }

    /// Real root of e^x + x = 0 by bisection on [-1, 0].
    fn omega_oracle() -> f64 {
        let (mut lo, mut hi) = (-1.0f64, 0.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.exp() + mid < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn asymptotic_examples() {
        let q = qp(1, c(1.0, 0.0));
        let z = asymptotic_zero(&q, 1).unwrap();
        assert!((z - c((2.0 * PI).ln(), 2.0 * PI + 1.5 * PI)).norm() < 1e-14);
        assert!((z - c(1.8379, 10.9956)).norm() < 1e-4);
        let z = asymptotic_zero(&q, -1).unwrap();
        assert!((z - c(1.8379, -4.7124)).norm() < 1e-4);
        let q2 = qp(2, c(1.0, 0.0));
        let z = asymptotic_zero(&q2, 1).unwrap();
        assert!((z - c(3.6758, 12.566)).norm() < 1e-3);
        assert_eq!(asymptotic_zero(&q, 0), Err(Error::InvalidIndex(0)));
    }

    #[test]
    fn refined_zeros_near_seeds() {
        let q = qp(1, c(1.0, 0.0));
        let r = refine_branch(&q, 1, 1e-13).unwrap();
        assert!((r.value - c(2.4015, 10.7763)).norm() < 1e-4, "{}", r.value);
        assert!(r.residual < 1e-13);
        let r = refine_branch(&q, -1, 1e-13).unwrap();
        assert!((r.value - c(1.5339, -4.3752)).norm() < 1e-4, "{}", r.value);
        let q2 = qp(2, c(1.0, 0.0));
        let r = refine_branch(&q2, 1, 1e-12).unwrap();
        assert!(r.residual < 1e-12);
        let direct = q2.evaluate(r.value).unwrap();
        assert!(direct.norm() < 1e-10 * r.value.norm().powi(2));
    }

    #[test]
    fn fixed_point_examples() {
        let q = qp(1, c(1.0, 0.0));
        let (rec, trace) = fixed_point_refine(&q, 5, 1e-13, 200).unwrap();
        assert!(trace.converged);
        assert!(rec.residual < 1e-12);
        let n = trace.xi_sequence.len();
        assert!((trace.xi_sequence[n - 1] - trace.xi_sequence[n - 2]).norm() <= 1e-13);

        let (_, trace) = fixed_point_refine(&q, 1_000_000, 1e-15, 50).unwrap();
        assert!((trace.xi_sequence[1] - trace.xi_sequence[2]).norm() < 1e-5);

        assert_eq!(
            fixed_point_refine(&q, 0, 1e-13, 10).unwrap_err(),
            Error::InvalidIndex(0)
        );
        let q3 = qp(7, c(1.0, 0.0));
        assert_eq!(
            fixed_point_refine(&q3, 2, 1e-13, 10).unwrap_err(),
            Error::InvalidIndex(2)
        );
        assert!(matches!(
            fixed_point_refine(&q, 5, 1e-13, 1),
            Err(Error::NotConverged { .. })
        ));
    }

    #[test]
    fn fixed_point_agrees_with_newton() {
        for (k, a) in [(1, c(1.0, 0.0)), (2, c(2.0, 1.0)), (3, c(0.0, 0.5))] {
            let q = qp(k, a);
            for nu in [5, 9, -6, 17] {
                let (fp, _) = fixed_point_refine(&q, nu, 1e-14, 500).unwrap();
                let nw = refine_branch(&q, nu, 1e-13).unwrap();
                assert!((fp.value - nw.value).norm() < 1e-10, "k={k} nu={nu}");
            }
        }
    }

    #[test]
    fn newton_examples() {
        let q = qp(1, c(1.0, 0.0));
        let r = newton_refine(&q, c(-0.5, 0.0), 1e-13, 50).unwrap();
        assert!((r.value.re - omega_oracle()).abs() < 1e-12);
        assert!((r.value.re + 0.5671432904).abs() < 1e-10);
        assert_eq!(r.index, ZeroIndex::Origin);

        assert!(matches!(
            newton_refine(&q, c(0.0, PI), 1e-12, 50),
            Err(Error::DerivativeVanishes(_))
        ));
        assert!(matches!(
            newton_refine(&q, c(0.0, 0.0), 1e-12, 50),
            Err(Error::DomainError(_))
        ));

        let qd = qp(1, c(-std::f64::consts::E, 0.0));
        let r = newton_refine(&qd, c(1.1, 0.0), 1e-12, 100).unwrap();
        assert!((r.value - c(1.0, 0.0)).norm() < 1e-5);
    }

    #[test]
    fn newton_reports_escape_and_iteration_limit() {
        let q = qp(1, c(1.0, 0.0));
        // From far up the strip with a wrong real part, the first step overshoots.
        let err = newton_refine(&q, c(-30.0, 40.0), 1e-12, 50).unwrap_err();
        assert!(matches!(err, Error::EscapedBasin { .. }), "{err:?}");
        assert!(matches!(
            newton_refine(&q, c(-0.4, 0.0), 1e-15, 1),
            Err(Error::MaxIterations { .. })
        ));
    }

    #[test]
    fn branch_assignment() {
        let q = qp(1, c(1.0, 0.0));
        let r = refine_branch(&q, 7, 1e-12).unwrap();
        assert_eq!(branch_of(&q, r.value), ZeroIndex::Branch(7));
        let r = refine_branch(&q, -3, 1e-12).unwrap();
        assert_eq!(branch_of(&q, r.value), ZeroIndex::Branch(-3));
        assert_eq!(branch_of(&q, c(-0.567, 0.0)), ZeroIndex::Origin);
        assert_eq!(branch_of(&q, c(1.5339, 4.3752)), ZeroIndex::Origin);
    }

    #[test]
    fn index_range_examples() {
        let q = qp(1, c(1.0, 0.0));
        let upper = zeros_in_index_range(&q, 1, 10, 1e-12).unwrap();
        assert_eq!(upper.len(), 10);
        assert!(upper
            .iter()
            .all(|r| r.residual < 1e-12 && r.certified && r.multiplicity == 1));
        let lower = zeros_in_index_range(&q, -11, -2, 1e-12).unwrap();
        assert_eq!(lower.len(), 10);
        for rec in &upper {
            let nu = rec.index.branch().unwrap();
            let twin = lower
                .iter()
                .find(|r| r.index == ZeroIndex::Branch(-nu - 1))
                .unwrap();
            assert!((twin.value - rec.value.conj()).norm() < 1e-9);
        }
        let skip = zeros_in_index_range(&q, -5, 5, 1e-12).unwrap();
        assert_eq!(skip.len(), 10);
        assert!(skip.windows(2).all(|w| w[0].index < w[1].index));
        assert!(zeros_in_index_range(&q, 3, 2, 1e-12).is_err());
    }

    #[test]
    fn gap_examples() {
        let q = qp(1, c(1.0, 0.0));
        let recs = zeros_in_index_range(&q, 20, 30, 1e-12).unwrap();
        let stats = gap_statistics(&recs).unwrap();
        assert_eq!(stats.gaps.len(), 10);
        assert!(stats.max_deviation < 0.1);
        assert!(matches!(
            gap_statistics(&recs[..1]),
            Err(Error::TooFew { .. })
        ));

        // Seeds alone: Im spacing exactly 2 pi, Re spacing k ln((nu+1)/nu).
        let seeds: Vec<ZeroRecord> = (1000..1003)
            .map(|nu| {
                let z = asymptotic_zero(&q, nu).unwrap();
                ZeroRecord::uncertified(ZeroIndex::Branch(nu), z, 0.0, z, 0)
            })
            .collect();
        let stats = gap_statistics(&seeds).unwrap();
        let expect = ((2.0 * PI).powi(2) + (1001f64 / 1000.0).ln().powi(2)).sqrt();
        assert!((stats.gaps[0] - expect).abs() < 1e-10);
        assert!(stats.max_deviation < 1e-6);
    }

    #[test]
    fn separation_examples() {
        let mk = |z| ZeroRecord::uncertified(ZeroIndex::Origin, z, 0.0, z, 0);
        let two = [mk(c(0.0, 0.0)), mk(c(0.0, 2.0 * PI))];
        assert!((separation_radius(&two).unwrap() - PI).abs() < 1e-15);
        let dup = [mk(c(1.0, 1.0)), mk(c(1.0, 1.0 + 1e-9)), mk(c(5.0, 0.0))];
        assert!(matches!(
            separation_radius(&dup),
            Err(Error::DuplicateZero(_))
        ));
        assert!(matches!(
            separation_radius(&two[..1]),
            Err(Error::TooFew { .. })
        ));

        let q = qp(1, c(1.0, 0.0));
        let recs = zeros_in_index_range(&q, 5, 15, 1e-12).unwrap();
        let d = separation_radius(&recs).unwrap();
        assert!((d - PI).abs() < 0.15 * PI, "{d}");
    }

    #[test]
    fn merge_drops_duplicates() {
        let mk = |z| ZeroRecord::uncertified(ZeroIndex::Origin, z, 0.0, z, 0);
        let a = [mk(c(1.0, 0.0)), mk(c(2.0, 0.0))];
        let b = [mk(c(1.0 + 1e-9, 0.0)), mk(c(3.0, 0.0))];
        let m = merge_zero_sets(&a, &b);
        assert_eq!(m.len(), 3);
    }
}
