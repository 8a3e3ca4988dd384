//! The quasipolynomial `f(z) = e^z + A z^k` and its evaluation.
//!
//! Direct evaluation overflows once `|Re z|` or `k ln|z|` exceeds ~709, so
//! every routine that has to work across the whole plane goes through a
//! dominance-factored form: whichever of `e^z` and `A z^k` is larger in
//! modulus is pulled out as the factor `D`, and the remaining co-factor
//! `f / D = 1 + c` has `|c| <= 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Bound on `|Re z|` and `k ln|z|` for the direct (unscaled) evaluators.
pub const DIRECT_RANGE: f64 = 700.0;

/// Relative size under which `f'` is treated as zero by the Newton step.
const DERIVATIVE_FLOOR: f64 = 1e-14;

/// Reduce an angle to the principal interval `(-pi, pi]`.
pub fn principal_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let r = (theta + PI).rem_euclid(two_pi) - PI;
    if r <= -PI {
        r + two_pi
    } else {
        r
    }
}

/// `f(z) = e^z + A z^k` with `k >= 1` and `A != 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiPolynomial {
    k: u32,
    a: Complex64,
    b_magnitude: f64,
}

/// `log|w|` and `arg w` of a complex value that may not fit in an `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalScale {
    pub log_magnitude: f64,
    /// Principal phase in `(-pi, pi]`.
    pub phase: f64,
}

impl EvalScale {
    /// True when the factored co-factor was exactly zero.
    pub fn is_exact_zero(&self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    /// Rebuild the value; overflows to infinity when it does not fit.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_exact_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_magnitude.exp(), self.phase)
    }
}

/// Which term dominates `f` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Dominant {
    Exponential,
    Monomial,
}

/// `f = D (1 + c)` with `|c| <= 1`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Factored {
    pub dominant: Dominant,
    /// Complex logarithm of `D` (imaginary part not reduced).
    pub log_dominant: Complex64,
    pub c: Complex64,
}

impl Factored {
    /// `f / D`.
    pub fn value(&self) -> Complex64 {
        Complex64::new(1.0, 0.0) + self.c
    }
}

impl QuasiPolynomial {
    pub fn new(k: u32, a: Complex64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::InvalidParameter("A must be finite".into()));
        }
        let modulus = a.norm();
        if modulus == 0.0 {
            return Err(Error::InvalidParameter("A must be nonzero".into()));
        }
        Ok(Self {
            k,
            a,
            b_magnitude: 1.0 / modulus,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    /// `|B_k| = 1 / |A|`.
    pub fn b_magnitude(&self) -> f64 {
        self.b_magnitude
    }

    pub fn ln_abs_a(&self) -> f64 {
        self.a.norm().ln()
    }

    /// Principal argument of `A`.
    pub fn arg_a(&self) -> f64 {
        self.a.arg()
    }

    fn kf(&self) -> f64 {
        self.k as f64
    }

    fn check_direct(&self, z: Complex64) -> Result<()> {
        let log_mono = self.kf() * z.norm().ln();
        if z.re.abs() > DIRECT_RANGE
            || log_mono > DIRECT_RANGE
            || !z.re.is_finite()
            || !z.im.is_finite()
        {
            return Err(Error::OverflowRange(z));
        }
        Ok(())
    }

    /// `e^z + A z^k`, evaluated directly.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        self.check_direct(z)?;
        Ok(z.exp() + self.a * z.powu(self.k))
    }

    /// `e^z + k A z^(k-1)`, evaluated directly.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        self.check_direct(z)?;
        let poly = self.a * self.kf() * z.powu(self.k - 1);
        Ok(z.exp() + poly)
    }

    /// Logarithm of the monomial term, `ln A + k Log z`, unreduced.
    pub(crate) fn log_monomial(&self, z: Complex64) -> Complex64 {
        Complex64::new(
            self.ln_abs_a() + self.kf() * z.norm().ln(),
            self.arg_a() + self.kf() * z.arg(),
        )
    }

    /// Split `f(z) = D (1 + c)`. The choice of `D` follows the sign of
    /// `Re z - k ln|z| - ln|A|`. Requires `z != 0`.
    pub(crate) fn factor(&self, z: Complex64) -> Factored {
        let log_mono = self.log_monomial(z);
        let excess = z.re - log_mono.re;
        if excess >= 0.0 {
            let c = Complex64::from_polar((-excess).exp(), log_mono.im - z.im);
            Factored {
                dominant: Dominant::Exponential,
                log_dominant: z,
                c,
            }
        } else {
            let c = Complex64::from_polar(excess.exp(), z.im - log_mono.im);
            Factored {
                dominant: Dominant::Monomial,
                log_dominant: log_mono,
                c,
            }
        }
    }

    /// `f' / D` for the factorization at `z`, plus the size of the larger of
    /// `|e^z|` and `|k A z^(k-1)|` in the same units.
    pub(crate) fn scaled_derivative(&self, z: Complex64, fac: &Factored) -> (Complex64, f64) {
        let k_over_z = self.kf() / z;
        match fac.dominant {
            Dominant::Exponential => {
                let poly = fac.c * k_over_z;
                (Complex64::new(1.0, 0.0) + poly, poly.norm().max(1.0))
            }
            Dominant::Monomial => (fac.c + k_over_z, fac.c.norm().max(k_over_z.norm())),
        }
    }

    /// `log|f(z)|` and `arg f(z)` without overflow. Requires `z != 0`.
    ///
    /// An exactly vanishing co-factor yields `log_magnitude = -inf`.
    pub fn evaluate_scaled(&self, z: Complex64) -> Result<EvalScale> {
        if z == Complex64::new(0.0, 0.0) {
            return Err(Error::DomainError(z));
        }
        let fac = self.factor(z);
        let w = fac.value();
        if w == Complex64::new(0.0, 0.0) {
            return Ok(EvalScale {
                log_magnitude: f64::NEG_INFINITY,
                phase: 0.0,
            });
        }
        Ok(EvalScale {
            log_magnitude: fac.log_dominant.re + w.norm().ln(),
            phase: principal_angle(fac.log_dominant.im + w.arg()),
        })
    }

    /// Newton step `f(z) / f'(z)` in dominance-factored form.
    pub fn newton_ratio(&self, z: Complex64) -> Result<Complex64> {
        if z == Complex64::new(0.0, 0.0) {
            // f(0) = 1, f'(0) = 1 + A when k = 1 and 1 otherwise.
            let poly = if self.k == 1 {
                self.a
            } else {
                Complex64::new(0.0, 0.0)
            };
            let df = Complex64::new(1.0, 0.0) + poly;
            if df.norm() < DERIVATIVE_FLOOR * poly.norm().max(1.0) {
                return Err(Error::DerivativeVanishes(z));
            }
            return Ok(Complex64::new(1.0, 0.0) / df);
        }
        let fac = self.factor(z);
        let (df, scale) = self.scaled_derivative(z, &fac);
        if df.norm() < DERIVATIVE_FLOOR * scale {
            return Err(Error::DerivativeVanishes(z));
        }
        Ok(fac.value() / df)
    }

    /// Logarithmic derivative `f'(z) / f(z)`. Infinite at an exact zero.
    pub fn log_derivative(&self, z: Complex64) -> Complex64 {
        if z == Complex64::new(0.0, 0.0) {
            let poly = if self.k == 1 {
                self.a
            } else {
                Complex64::new(0.0, 0.0)
            };
            return Complex64::new(1.0, 0.0) + poly;
        }
        let fac = self.factor(z);
        let (df, _) = self.scaled_derivative(z, &fac);
        df / fac.value()
    }

    /// `f'/f` together with the relative residual at `z`, from one factorization.
    pub(crate) fn integrand(&self, z: Complex64) -> (Complex64, f64) {
        if z == Complex64::new(0.0, 0.0) {
            return (self.log_derivative(z), 1.0);
        }
        let fac = self.factor(z);
        let (df, _) = self.scaled_derivative(z, &fac);
        let w = fac.value();
        (df / w, w.norm())
    }

    /// `|f(z)| / max(|e^z|, |A z^k|)`, the scale-free residual used
    /// throughout. Equals `|1 + c|` in factored form.
    pub fn relative_residual(&self, z: Complex64) -> f64 {
        if z == Complex64::new(0.0, 0.0) {
            return 1.0;
        }
        self.factor(z).value().norm()
    }

    /// Coefficient for which `f` has a double zero at `z = k`: `A = -e^k / k^k`.
    pub fn double_zero_coefficient(k: u32) -> Complex64 {
        let kf = k as f64;
        Complex64::new(-(kf - kf * kf.ln()).exp(), 0.0)
    }
}
