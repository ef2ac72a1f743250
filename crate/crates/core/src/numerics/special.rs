use rug::ops::Pow;

use super::{ensure_finite, real, Real, GUARD_BITS};
use crate::error::{Error, Result};

const MAX_CF_TERMS: usize = 2_000_000;
const MAX_SERIES_TERMS: usize = 100_000;

/// Γ(x) for x > 0.
///
/// Backed by MPFR's correctly rounded gamma, so the result is within half an
/// ulp at the precision of `x`.
pub fn gamma(x: &Real) -> Result<Real> {
    if !x.is_finite() || *x <= 0 {
        return Err(Error::Domain(format!("gamma requires x > 0, got {}", x.to_f64())));
    }
    ensure_finite(x.clone().gamma(), "gamma")
}

/// Γ(x, a) = ∫_a^∞ t^(x-1) e^(-t) dt for a > 0 and any real x.
///
/// Uses the Legendre continued fraction, which converges for every real x
/// once a > 0. For a < 1 with x away from the poles of Γ the series for the
/// lower function is cheaper, so Γ(x) − γ(x, a) is used there instead.
pub fn upper_incomplete_gamma(x: &Real, a: &Real) -> Result<Real> {
    if !x.is_finite() || !a.is_finite() {
        return Err(Error::Domain("incomplete gamma needs finite arguments".into()));
    }
    if *a <= 0 {
        return Err(Error::Domain(format!(
            "incomplete gamma requires a > 0, got {}",
            a.to_f64()
        )));
    }
    let prec = x.prec().max(a.prec());
    let wp = prec + GUARD_BITS;
    let x_w = real(wp, x);
    let a_w = real(wp, a);

    let value = if *a < 1 && distance_to_pole(&x_w) > 0.1 {
        let full = x_w.clone().gamma();
        full - lower_gamma_series(&x_w, &a_w)?
    } else {
        let prefactor = real(wp, -&a_w).exp() * real(wp, (&a_w).pow(&x_w));
        prefactor * legendre_fraction(&x_w, &a_w)?
    };
    ensure_finite(real(prec, &value), "upper_incomplete_gamma")
}

/// E_a(x) = ∫_1^∞ e^(-xt) t^(-a) dt for x > 0.
///
/// Continued fraction for x ≥ 1, power series below that (when a is not a
/// positive integer). Satisfies E_a(x) = x^(a-1) Γ(1-a, x).
pub fn exp_integral_e(a: &Real, x: &Real) -> Result<Real> {
    if !x.is_finite() || !a.is_finite() {
        return Err(Error::Domain("exponential integral needs finite arguments".into()));
    }
    if *x <= 0 {
        return Err(Error::Domain(format!(
            "exponential integral requires x > 0, got {}",
            x.to_f64()
        )));
    }
    let prec = x.prec().max(a.prec());
    let wp = prec + GUARD_BITS;
    let a_w = real(wp, a);
    let x_w = real(wp, x);

    let positive_integer_order = a_w.is_integer() && a_w > 0;
    let value = if *x < 1 && !positive_integer_order {
        exp_integral_series(&a_w, &x_w)?
    } else {
        exp_integral_fraction(&a_w, &x_w)?
    };
    ensure_finite(real(prec, &value), "exp_integral_e")
}

fn distance_to_pole(x: &Real) -> f64 {
    if *x > 0 {
        return f64::INFINITY;
    }
    let nearest = x.clone().round();
    real(x.prec(), x - &nearest).abs().to_f64()
}

fn converged(delta_minus_one: &Real, wp: u32) -> bool {
    delta_minus_one.is_zero() || delta_minus_one.get_exp().is_some_and(|e| e < -(wp as i32))
}

/// Tiny value for the modified Lentz algorithm.
fn lentz_floor(wp: u32) -> Real {
    let mut t = real(wp, 1);
    t >>= 8 * wp;
    t
}

/// 1/(b0 - a1/(b1 - a2/(b2 - ...))) with b_k = a + 2k + 1 - x, a_k = k(k - x).
fn legendre_fraction(x: &Real, a: &Real) -> Result<Real> {
    let wp = x.prec();
    let tiny = lentz_floor(wp);
    let mut b = real(wp, a + 1u32) - x;
    let mut c = real(wp, 1) / &tiny;
    let mut d = if b.is_zero() { real(wp, 1) / &tiny } else { real(wp, 1) / &b };
    let mut h = d.clone();
    for k in 1..=MAX_CF_TERMS {
        let kf = real(wp, k as u32);
        let an = -(kf.clone() * (kf - x));
        b += 2u32;
        d = real(wp, &an * &d) + &b;
        if d.is_zero() {
            d = tiny.clone();
        }
        c = real(wp, &an / &c) + &b;
        if c.is_zero() {
            c = tiny.clone();
        }
        d.recip_mut();
        let delta = real(wp, &c * &d);
        h *= &delta;
        if converged(&(delta - 1u32).abs(), wp) {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete gamma continued fraction",
        iterations: MAX_CF_TERMS,
        detail: format!("x = {}, a = {}", x.to_f64(), a.to_f64()),
    })
}

/// γ(x, a) = a^x Σ (-a)^k / (k! (x + k)).
fn lower_gamma_series(x: &Real, a: &Real) -> Result<Real> {
    let wp = x.prec();
    let mut term = real(wp, 1);
    let mut sum = real(wp, 1) / x;
    for k in 1..MAX_SERIES_TERMS {
        term *= a;
        term /= k as u32;
        term = -term;
        let contribution = real(wp, &term / real(wp, x + k as u32));
        sum += &contribution;
        if contribution.is_zero() || negligible(&contribution, &sum, wp) {
            return Ok(sum * real(wp, a.pow(x)));
        }
    }
    Err(Error::NoConvergence {
        what: "lower incomplete gamma series",
        iterations: MAX_SERIES_TERMS,
        detail: format!("x = {}, a = {}", x.to_f64(), a.to_f64()),
    })
}

/// E_a(x) = x^(a-1) Γ(1-a) − Σ (-x)^k / (k! (1 - a + k)), a not a positive integer.
fn exp_integral_series(a: &Real, x: &Real) -> Result<Real> {
    let wp = x.prec();
    let one_minus_a = real(wp, 1u32 - a);
    let mut term = real(wp, 1);
    let mut sum = real(wp, 1) / &one_minus_a;
    for k in 1..MAX_SERIES_TERMS {
        term *= x;
        term /= k as u32;
        term = -term;
        let contribution = real(wp, &term / real(wp, &one_minus_a + k as u32));
        sum += &contribution;
        if contribution.is_zero() || negligible(&contribution, &sum, wp) {
            let leading = real(wp, x.pow(real(wp, a - 1u32))) * one_minus_a.gamma();
            return Ok(leading - sum);
        }
    }
    Err(Error::NoConvergence {
        what: "exponential integral series",
        iterations: MAX_SERIES_TERMS,
        detail: format!("a = {}, x = {}", a.to_f64(), x.to_f64()),
    })
}

/// e^(-x) / (x + a - 1·a/(x + a + 2 - 2(a+1)/(x + a + 4 - ...))).
fn exp_integral_fraction(a: &Real, x: &Real) -> Result<Real> {
    let wp = x.prec();
    let tiny = lentz_floor(wp);
    let a_minus_one = real(wp, a - 1u32);
    let mut b = real(wp, x + a);
    let mut c = real(wp, 1) / &tiny;
    let mut d = if b.is_zero() { real(wp, 1) / &tiny } else { real(wp, 1) / &b };
    let mut h = d.clone();
    for k in 1..=MAX_CF_TERMS {
        let an = -(real(wp, &a_minus_one + k as u32) * k as u32);
        b += 2u32;
        d = real(wp, &an * &d) + &b;
        if d.is_zero() {
            d = tiny.clone();
        }
        c = real(wp, &an / &c) + &b;
        if c.is_zero() {
            c = tiny.clone();
        }
        d.recip_mut();
        let delta = real(wp, &c * &d);
        h *= &delta;
        if converged(&(delta - 1u32).abs(), wp) {
            return Ok(h * real(wp, -x).exp());
        }
    }
    Err(Error::NoConvergence {
        what: "exponential integral continued fraction",
        iterations: MAX_CF_TERMS,
        detail: format!("a = {}, x = {}", a.to_f64(), x.to_f64()),
    })
}

fn negligible(term: &Real, sum: &Real, wp: u32) -> bool {
    match (term.get_exp(), sum.get_exp()) {
        (Some(t), Some(s)) => t < s - wp as i32,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{relative_difference, ulps};

    const P: u32 = 256;

    fn r(v: f64) -> Real {
        real(P, v)
    }

    #[test]
    fn gamma_at_integers() {
        assert!(relative_difference(&gamma(&r(1.0)).unwrap(), &r(1.0)) <= ulps(8, P));
        assert!(relative_difference(&gamma(&r(4.0)).unwrap(), &r(6.0)) <= ulps(8, P));
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(matches!(gamma(&r(0.0)), Err(Error::Domain(_))));
        assert!(matches!(gamma(&r(-2.5)), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_functional_equation() {
        for x in [0.5, 1.0, 2.5, 4.0] {
            let lhs = gamma(&r(x + 1.0)).unwrap();
            let rhs = r(x) * gamma(&r(x)).unwrap();
            assert!(relative_difference(&lhs, &rhs) <= ulps(8, P), "x = {x}");
        }
    }

    #[test]
    fn incomplete_gamma_of_one_is_exponential() {
        for a in [0.25, 0.75, 2.0, 7.5] {
            let got = upper_incomplete_gamma(&r(1.0), &r(a)).unwrap();
            let want = r(-a).exp();
            assert!(relative_difference(&got, &want) <= ulps(16, P), "a = {a}");
        }
    }

    #[test]
    fn incomplete_gamma_near_zero_tends_to_gamma() {
        for x in [0.5, 2.5, 4.0] {
            let tiny = real(P, 1) >> 400u32;
            let got = upper_incomplete_gamma(&r(x), &tiny).unwrap();
            let want = gamma(&r(x)).unwrap();
            // Γ(x) − Γ(x, a) ≈ a^x / x ≤ 2^-199 here
            assert!(relative_difference(&got, &want) <= ulps(60, P), "x = {x}");
        }
    }

    #[test]
    fn incomplete_gamma_rejects_non_positive_a() {
        assert!(matches!(
            upper_incomplete_gamma(&r(1.0), &r(0.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            upper_incomplete_gamma(&r(-0.5), &r(-1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn incomplete_gamma_agrees_with_mpfr() {
        // MPFR's own gamma_inc is an independent implementation.
        for (x, a) in [(-0.5, 0.275), (-1.0, 0.586), (-3.0, 2.0), (-3.7, 6.5), (2.5, 0.3), (-1.0, 3.41)] {
            let got = upper_incomplete_gamma(&r(x), &r(a)).unwrap();
            let want = real(P + 64, x).gamma_inc(&real(P + 64, a));
            assert!(
                relative_difference(&got, &real(P, &want)) <= ulps(16, P),
                "x = {x}, a = {a}"
            );
        }
    }

    #[test]
    fn exp_integral_order_zero() {
        for x in [0.3, 1.0, 4.0] {
            let got = exp_integral_e(&r(0.0), &r(x)).unwrap();
            let want = r(-x).exp() / r(x);
            assert!(relative_difference(&got, &want) <= ulps(16, P), "x = {x}");
        }
    }

    #[test]
    fn exp_integral_rejects_non_positive_x() {
        assert!(matches!(exp_integral_e(&r(1.0), &r(0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn exp_integral_matches_incomplete_gamma_identity() {
        for (a, x) in [(0.0, 0.5), (1.5, 0.2), (2.0, 1.0), (4.0, 7.46), (1.5, 2.72), (3.3, 0.75)] {
            let e = exp_integral_e(&r(a), &r(x)).unwrap();
            let g = upper_incomplete_gamma(&r(1.0 - a), &r(x)).unwrap();
            let rhs = real(P, r(x).pow(r(a - 1.0))) * g;
            assert!(relative_difference(&e, &rhs) <= ulps(16, P), "a = {a}, x = {x}");
        }
    }

    #[test]
    fn precision_doubling_is_stable() {
        let lo = upper_incomplete_gamma(&r(-3.0), &r(6.0)).unwrap();
        let hi = upper_incomplete_gamma(&real(2 * P, -3.0), &real(2 * P, 6.0)).unwrap();
        assert!(relative_difference(&lo, &real(P, &hi)) <= ulps(8, P));
    }
}
