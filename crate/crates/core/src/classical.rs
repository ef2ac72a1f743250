//! Classical generalized Laguerre polynomials, the α-derived constants and
//! the closed-form X₂ Type I Laguerre polynomial used as the reference
//! normalization.

use crate::error::{Error, Result};
use crate::numerics::{check_precision, parse_real, real, Real};
pub use crate::poly::MonomialPoly;

/// α together with every constant derived from it.
///
/// β = √(α+1) and the exceptional roots r = −(α+1) − β, s = −(α+1) + β of
/// L_2^(α−1)(−x). Everything is held at one working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterContext {
    alpha: Real,
    beta: Real,
    r: Real,
    s: Real,
    prec: u32,
}

impl ParameterContext {
    /// `alpha` is rounded to `prec` bits. Requires α > 0 and prec ≥ 128.
    pub fn new(alpha: &Real, prec: u32) -> Result<Self> {
        check_precision(prec)?;
        if !alpha.is_finite() || *alpha <= 0 {
            return Err(Error::Domain(format!(
                "alpha must be positive, got {}",
                alpha.to_f64()
            )));
        }
        let alpha = real(prec, alpha);
        let shift = real(prec, &alpha + 1u32);
        let beta = shift.clone().sqrt();
        let r = real(prec, -&shift) - &beta;
        let s = real(prec, -&shift) + &beta;
        Ok(ParameterContext {
            alpha,
            beta,
            r,
            s,
            prec,
        })
    }

    pub fn from_f64(alpha: f64, prec: u32) -> Result<Self> {
        ParameterContext::new(&real(prec, alpha), prec)
    }

    /// Parses α as a decimal at the working precision, so "3.7" means 37/10
    /// rounded to `prec` bits rather than the nearest double.
    pub fn from_decimal(alpha: &str, prec: u32) -> Result<Self> {
        ParameterContext::new(&parse_real(alpha, prec)?, prec)
    }

    pub fn alpha(&self) -> &Real {
        &self.alpha
    }

    /// √(α+1).
    pub fn beta(&self) -> &Real {
        &self.beta
    }

    /// The smaller exceptional root, −(α+1) − √(α+1).
    pub fn r(&self) -> &Real {
        &self.r
    }

    /// The larger exceptional root, −(α+1) + √(α+1).
    pub fn s(&self) -> &Real {
        &self.s
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn real<T>(&self, value: T) -> Real
    where
        Real: rug::Assign<T>,
    {
        real(self.prec, value)
    }
}

/// L_n^a(x) in monomial form, from the three-term recurrence
/// (k+1) L_{k+1} = (2k+1+a−x) L_k − (k+a) L_{k−1}.
///
/// `n = -1` gives the zero polynomial; that convention makes the closed form
/// below valid at n = 2.
pub fn laguerre(n: i64, a: &Real, ctx: &ParameterContext) -> Result<MonomialPoly> {
    let prec = ctx.precision();
    match n {
        n if n < -1 => Err(Error::Domain(format!("Laguerre degree must be ≥ -1, got {n}"))),
        -1 => Ok(MonomialPoly::zero(prec)),
        _ => {
            let x = MonomialPoly::from_f64(&[0.0, 1.0], prec);
            let mut previous = MonomialPoly::constant(real(prec, 1));
            let mut current = MonomialPoly::new(vec![real(prec, a + 1u32), real(prec, -1)], prec);
            if n == 0 {
                return Ok(previous);
            }
            for k in 1..n as u32 {
                let shift = MonomialPoly::constant(real(prec, a + (2 * k + 1)));
                let factor = &shift - &x;
                let lhs = &factor * &current;
                let rhs = previous.scale(&real(prec, a + k));
                let next = (&lhs - &rhs).scale(&(real(prec, 1u32) / (k + 1)));
                previous = std::mem::replace(&mut current, next);
            }
            Ok(current)
        }
    }
}

/// p(x) ↦ p(−x).
pub fn negate_argument(p: &MonomialPoly) -> MonomialPoly {
    p.negate_argument()
}

/// L_2^(α−1)(−x) = ½x² + (α+1)x + α(α+1)/2, whose roots are r and s.
pub fn exceptional_denominator(ctx: &ParameterContext) -> Result<MonomialPoly> {
    let a = ctx.real(ctx.alpha() - 1u32);
    Ok(laguerre(2, &a, ctx)?.negate_argument())
}

/// The X₂ Type I Laguerre polynomial of degree n ≥ 2 from classical ones:
/// L_2^α(−x) L_{n−2}^(α−1)(x) + L_2^(α−1)(−x) L_{n−3}^α(x).
pub fn closed_form_xop(n: usize, ctx: &ParameterContext) -> Result<MonomialPoly> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "exceptional polynomials start at degree 2, got {n}"
        )));
    }
    let alpha = ctx.alpha();
    let alpha_minus_one = ctx.real(alpha - 1u32);
    let first = &laguerre(2, alpha, ctx)?.negate_argument() * &laguerre(n as i64 - 2, &alpha_minus_one, ctx)?;
    let second = &exceptional_denominator(ctx)? * &laguerre(n as i64 - 3, alpha, ctx)?;
    Ok(&first + &second)
}

/// Leading coefficient of [`closed_form_xop`]: (−1)^n / (2 (n−2)!). Only the
/// first term reaches degree n.
pub fn closed_form_leading(n: usize, ctx: &ParameterContext) -> Result<Real> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "exceptional polynomials start at degree 2, got {n}"
        )));
    }
    let mut value = ctx.real(0.5);
    for k in 2..=(n as u32 - 2) {
        value /= k;
    }
    Ok(if n % 2 == 1 { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{relative_difference, ulps};
    use proptest::prelude::*;

    const P: u32 = 256;

    fn ctx(alpha: f64) -> ParameterContext {
        ParameterContext::from_f64(alpha, P).unwrap()
    }

    fn assert_coefficients(p: &MonomialPoly, want: &[f64], k: i32) {
        assert_eq!(p.coefficients().len(), want.len(), "{p:?}");
        for (got, want) in p.coefficients().iter().zip(want) {
            let want = real(P, *want);
            assert!(relative_difference(got, &want) <= ulps(k, P), "{got} vs {want}");
        }
    }

    #[test]
    fn context_invariants() {
        for alpha in [0.5, 1.0, 3.0, 3.7] {
            let c = ctx(alpha);
            assert!(c.r() < c.s() && *c.s() < 0);
            let two_beta = real(P, c.beta() * 2u32);
            assert!(relative_difference(&real(P, c.s() - c.r()), &two_beta) <= ulps(4, P));
            let product = real(P, c.r() * c.s());
            let want = real(P, c.alpha() * real(P, c.alpha() + 1u32));
            assert!(relative_difference(&product, &want) <= ulps(4, P));
            let sum = real(P, c.r() + c.s());
            let want = real(P, c.alpha() + 1u32) * -2i32;
            assert!(relative_difference(&sum, &want) <= ulps(4, P));
            let beta_sq = real(P, c.beta().square_ref());
            assert!(relative_difference(&beta_sq, &real(P, c.alpha() + 1u32)) <= ulps(2, P));
        }
    }

    #[test]
    fn alpha_three_roots() {
        let c = ctx(3.0);
        assert_eq!(*c.r(), -6);
        assert_eq!(*c.s(), -2);
        assert_eq!(*c.beta(), 2);
    }

    #[test]
    fn context_rejects_bad_input() {
        assert!(ParameterContext::from_f64(0.0, P).is_err());
        assert!(ParameterContext::from_f64(-1.0, P).is_err());
        assert!(ParameterContext::from_f64(1.0, 64).is_err());
        assert!(ParameterContext::from_decimal("nope", P).is_err());
    }

    #[test]
    fn decimal_alpha_is_parsed_at_working_precision() {
        let c = ParameterContext::from_decimal("3.7", P).unwrap();
        let want = real(P, 37) / 10u32;
        assert_eq!(*c.alpha(), want);
    }

    #[test]
    fn laguerre_low_degrees() {
        let c = ctx(3.0);
        let a = c.alpha().clone();
        assert_coefficients(&laguerre(0, &a, &c).unwrap(), &[1.0], 0);
        assert_coefficients(&laguerre(1, &a, &c).unwrap(), &[4.0, -1.0], 0);
        assert!(laguerre(-1, &a, &c).unwrap().is_zero());
        assert!(laguerre(-2, &a, &c).is_err());
    }

    #[test]
    fn denominator_expansion() {
        // ½x² + (α+1)x + α(α+1)/2 and its derivative x + α + 1
        for alpha in [0.5, 1.0, 3.0] {
            let c = ctx(alpha);
            let n = exceptional_denominator(&c).unwrap();
            assert_coefficients(&n, &[alpha * (alpha + 1.0) / 2.0, alpha + 1.0, 0.5], 4);
            assert_coefficients(&n.derivative(), &[alpha + 1.0, 1.0], 4);
            assert!(n.evaluate(c.r()).abs() <= ulps(8, P));
            assert!(n.evaluate(c.s()).abs() <= ulps(8, P));
        }
    }

    #[test]
    fn laguerre_two_negated_at_alpha_three() {
        // L_2^3(x) = x²/2 − 5x + 10
        let c = ctx(3.0);
        let l2 = laguerre(2, c.alpha(), &c).unwrap();
        assert_coefficients(&l2, &[10.0, -5.0, 0.5], 0);
        assert_coefficients(&negate_argument(&l2), &[10.0, 5.0, 0.5], 0);
    }

    #[test]
    fn closed_form_degree_two_is_negated_laguerre() {
        let c = ctx(3.0);
        let p = closed_form_xop(2, &c).unwrap();
        assert_coefficients(&p, &[10.0, 5.0, 0.5], 0);
        assert!(closed_form_xop(1, &c).is_err());
    }

    #[test]
    fn closed_form_has_full_degree() {
        for alpha in [0.5, 1.0, 3.0] {
            let c = ctx(alpha);
            for n in 2..=12 {
                let p = closed_form_xop(n, &c).unwrap();
                assert_eq!(p.degree(), Some(n));
                let want = closed_form_leading(n, &c).unwrap();
                assert!(relative_difference(&p.leading(), &want) <= ulps(16, P));
            }
        }
    }

    #[test]
    fn leading_coefficient_formula() {
        let c = ctx(1.0);
        assert_eq!(closed_form_leading(2, &c).unwrap(), 0.5);
        assert_eq!(closed_form_leading(3, &c).unwrap(), -0.5);
        assert_eq!(closed_form_leading(5, &c).unwrap(), real(P, -1) / 12u32);
        assert!(closed_form_leading(1, &c).is_err());
    }

    #[test]
    fn recurrence_holds_coefficientwise() {
        for alpha in [0.5, 1.0, 3.0] {
            let c = ctx(alpha);
            let a = c.alpha().clone();
            let x = MonomialPoly::from_f64(&[0.0, 1.0], P);
            for n in 1..=12u32 {
                let next = laguerre(n as i64 + 1, &a, &c).unwrap();
                let cur = laguerre(n as i64, &a, &c).unwrap();
                let prev = laguerre(n as i64 - 1, &a, &c).unwrap();
                let lhs = next.scale(&real(P, n + 1));
                let factor = &MonomialPoly::constant(real(P, &a + (2 * n + 1))) - &x;
                let rhs = &(&factor * &cur) - &prev.scale(&real(P, &a + n));
                let residual = (&lhs - &rhs).max_abs_coefficient();
                assert!(residual <= ulps(32, P) * lhs.max_abs_coefficient(), "n = {n}");
            }
        }
    }

    proptest! {
        #[test]
        fn laguerre_at_zero_is_binomial(n in 0i64..15, alpha in 0.1f64..5.0) {
            // L_n^a(0) = C(n + a, n)
            let c = ctx(alpha);
            let p = laguerre(n, c.alpha(), &c).unwrap();
            let mut want = real(P, 1);
            for k in 1..=n as u32 {
                want *= real(P, c.alpha() + k);
                want /= k;
            }
            prop_assert!(relative_difference(&p.evaluate(&real(P, 0)), &want) <= ulps(16, P));
        }
    }
}
