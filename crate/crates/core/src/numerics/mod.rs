//! Extended-precision reals and the handful of special functions the moment
//! machinery needs: Gamma, the upper incomplete Gamma, the generalized
//! exponential integral and generalized Gauss-Laguerre quadrature.
//!
//! All values are [`rug::Float`]s. Every public operation works at the
//! precision of its inputs (or of the [`ParameterContext`](crate::ParameterContext)
//! it is handed) and refuses to return NaN or an infinity.

mod format;
mod quadrature;
mod special;
mod tridiagonal;

pub use format::{decimal_digits, format_real, parse_real};
pub use quadrature::{gauss_laguerre_rule, integrate_adjusted, QuadratureRule};
pub use special::{exp_integral_e, gamma, upper_incomplete_gamma};
pub use tridiagonal::symmetric_tridiagonal_eigenvalues;

use crate::error::{Error, Result};

/// Extended-precision real number.
pub type Real = rug::Float;

/// Working precision used when nothing else is requested (~77 decimal digits).
pub const DEFAULT_PRECISION: u32 = 256;

/// Smallest precision any public constructor accepts.
pub const MIN_PRECISION: u32 = 128;

/// Extra bits carried inside iterative special-function evaluations.
pub(crate) const GUARD_BITS: u32 = 32;

/// `value` rounded to `prec` bits.
pub fn real<T>(prec: u32, value: T) -> Real
where
    Real: rug::Assign<T>,
{
    Real::with_val(prec, value)
}

pub(crate) fn check_precision(prec: u32) -> Result<()> {
    if prec < MIN_PRECISION {
        return Err(Error::Domain(format!(
            "precision {prec} bits is below the minimum of {MIN_PRECISION}"
        )));
    }
    Ok(())
}

pub(crate) fn ensure_finite(x: Real, what: &'static str) -> Result<Real> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// `|a - b| / |b|`, or `|a|` when `b` is zero.
pub fn relative_difference(a: &Real, b: &Real) -> Real {
    let prec = a.prec().max(b.prec());
    let diff = real(prec, a - b).abs();
    if b.is_zero() {
        diff
    } else {
        diff / real(prec, b.abs_ref())
    }
}

/// `2^(k - prec)`, the shape every precision-relative tolerance takes.
pub fn ulps(k: i32, prec: u32) -> Real {
    let exponent = k - prec as i32;
    let mut t = real(prec, 1);
    t <<= exponent;
    t
}

/// `10^-digits` at the given precision.
pub fn decimal_tolerance(digits: i32, prec: u32) -> Real {
    let ten = real(prec, 10);
    real(prec, rug::ops::Pow::pow(ten, -digits))
}
