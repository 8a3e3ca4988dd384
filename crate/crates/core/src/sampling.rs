//! Seeded random streams and the region samplers built on them.
//!
//! Work is split into fixed-size chunks; chunk `i` draws from the ChaCha8
//! stream `i` of the user seed, so results do not depend on how many
//! threads run the chunks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::quasipoly::QuasiPolynomial;
use crate::regions::{level_curve_point, Branch};

pub const CHUNK: usize = 1024;

pub fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Sizes of the chunks covering `total` draws.
pub fn chunk_sizes(total: usize) -> Vec<usize> {
    let full = total / CHUNK;
    let mut sizes = vec![CHUNK; full];
    if total % CHUNK != 0 {
        sizes.push(total % CHUNK);
    }
    sizes
}

/// Point with radius log-uniform in `[r_min, r_max]` and uniform angle.
pub fn log_radial_point<R: Rng>(rng: &mut R, r_min: f64, r_max: f64) -> Complex64 {
    let (lmin, lmax) = (r_min.ln(), r_max.ln());
    let r = (lmin + (lmax - lmin) * rng.random::<f64>()).exp();
    let theta = PI * (2.0 * rng.random::<f64>() - 1.0);
    Complex64::from_polar(r, theta)
}

/// How the ordinate of a strip sample is drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ordinate {
    /// `|Im z|` log-uniform in `[lo, hi]`.
    LogUniform { lo: f64, hi: f64 },
    /// `|Im z|` uniform in `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
}

/// A strip point: offset uniform in `[-h, h]`, ordinate per `ordinate`,
/// half-plane chosen by a fair coin. The abscissa solves the offset equation.
pub fn strip_point<R: Rng>(
    rng: &mut R,
    qp: &QuasiPolynomial,
    h: f64,
    s: Branch,
    ordinate: Ordinate,
) -> Result<Complex64> {
    let y = match ordinate {
        Ordinate::LogUniform { lo, hi } => {
            (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
        }
        Ordinate::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
    };
    let u = h * (2.0 * rng.random::<f64>() - 1.0);
    let y = if rng.random::<bool>() { y } else { -y };
    level_curve_point(qp, y, u, s)
}
