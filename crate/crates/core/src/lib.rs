//! Zeros, region geometry and lower bounds for the quasipolynomial
//! `f(z) = e^z + A z^k`.
//!
//! * [`quasipoly`]: the function itself, with overflow-free evaluation.
//! * [`regions`]: the curvilinear strip, its exterior domains, sectors and
//!   strip quadrangles.
//! * [`zeros`]: the indexed zero family, from asymptotic seeds to polished
//!   zeros, plus gap statistics.
//! * [`certify`]: argument-principle winding counts, the origin-disk search
//!   and completeness checks.
//! * [`bounds`]: sampled verification of the lower bounds of `|f|`.

pub mod bounds;
pub mod certify;
pub mod error;
pub mod quadrature;
pub mod quasipoly;
pub mod regions;
pub mod sampling;
pub mod zeros;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use quasipoly::{EvalScale, QuasiPolynomial};
