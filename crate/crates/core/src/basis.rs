//! The shifted basis B_k(x) = (x−r)^⌈k/2⌉ (x−s)^⌊k/2⌋ and the flag
//! v_2, v_3, v_4, … whose span is preserved by the exceptional operator.

use crate::classical::{laguerre, ParameterContext};
use crate::error::{Error, Result};
use crate::numerics::{real, Real};
use crate::poly::MonomialPoly;

/// Exponents (⌈k/2⌉, ⌊k/2⌋) of (x−r) and (x−s) in B_k.
pub fn exponents(k: usize) -> (usize, usize) {
    (k.div_ceil(2), k / 2)
}

/// B_k expanded in monomials. Monic of degree k.
pub fn basis_element(k: usize, ctx: &ParameterContext) -> MonomialPoly {
    let (pr, ps) = exponents(k);
    let xr = MonomialPoly::linear_factor(ctx.r());
    let xs = MonomialPoly::linear_factor(ctx.s());
    &xr.pow(pr) * &xs.pow(ps)
}

/// Σ a_k B_k(x).
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedPoly {
    coefficients: Vec<Real>,
    ctx: ParameterContext,
}

impl ShiftedPoly {
    pub fn new(coefficients: Vec<Real>, ctx: &ParameterContext) -> Self {
        let coefficients = coefficients.into_iter().map(|c| ctx.real(c)).collect();
        ShiftedPoly {
            coefficients,
            ctx: ctx.clone(),
        }
    }

    pub fn coefficients(&self) -> &[Real] {
        &self.coefficients
    }

    pub fn context(&self) -> &ParameterContext {
        &self.ctx
    }

    /// Index of the last coefficient; B_k is monic so this is the degree
    /// whenever that coefficient is nonzero.
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// a_n, which equals the monomial leading coefficient.
    pub fn leading(&self) -> Real {
        self.coefficients
            .last()
            .cloned()
            .unwrap_or_else(|| self.ctx.real(0))
    }

    pub fn scale(&self, factor: &Real) -> Self {
        let coefficients = self
            .coefficients
            .iter()
            .map(|c| self.ctx.real(c * factor))
            .collect();
        ShiftedPoly {
            coefficients,
            ctx: self.ctx.clone(),
        }
    }

    /// Rescales so that a_n equals `target`.
    pub fn with_leading(&self, target: &Real) -> Result<Self> {
        let lead = self.leading();
        if lead.is_zero() {
            return Err(Error::Domain("cannot normalize a polynomial with zero leading coefficient".into()));
        }
        Ok(self.scale(&self.ctx.real(target / &lead)))
    }

    pub fn to_monomial(&self) -> MonomialPoly {
        to_monomial(self)
    }
}

/// Extra bits carried through basis conversions; expanding B_k cancels up
/// to about k·log2(1+|r|) bits.
const CONVERSION_GUARD: u32 = 64;

fn guarded_context(ctx: &ParameterContext) -> ParameterContext {
    let wp = ctx.precision() + CONVERSION_GUARD;
    ParameterContext::new(ctx.alpha(), wp).expect("context already validated")
}

pub fn to_monomial(p: &ShiftedPoly) -> MonomialPoly {
    let prec = p.ctx.precision();
    let wide = guarded_context(&p.ctx);
    let sum = p
        .coefficients
        .iter()
        .enumerate()
        .fold(MonomialPoly::zero(wide.precision()), |acc, (k, a)| {
            &acc + &basis_element(k, &wide).scale(&wide.real(a))
        });
    MonomialPoly::new(sum.coefficients().to_vec(), prec)
}

/// Inverse of [`to_monomial`], solved from the top degree down: the x^k
/// coefficient of what remains fixes a_k because B_k is monic.
pub fn from_monomial(p: &MonomialPoly, ctx: &ParameterContext) -> ShiftedPoly {
    let Some(n) = p.degree() else {
        return ShiftedPoly::new(Vec::new(), ctx);
    };
    let wide = guarded_context(ctx);
    let wp = wide.precision();
    let mut remainder: Vec<Real> = (0..=n).map(|k| wide.real(p.coefficient(k))).collect();
    let mut coefficients = vec![wide.real(0); n + 1];
    for k in (0..=n).rev() {
        let a = remainder[k].clone();
        if !a.is_zero() {
            let b = basis_element(k, &wide);
            for (m, c) in b.coefficients().iter().enumerate() {
                remainder[m] -= real(wp, c * &a);
            }
        }
        coefficients[k] = a;
    }
    ShiftedPoly::new(coefficients, ctx)
}

/// Flag element v_l, l ≥ 2:
/// v_2 = L_2^α(−x) = ½(x−r)(x−s) + x − r − β,
/// v_3 = (x−r)²(x−s+1),
/// v_l = B_l for l ≥ 4.
pub fn flag_element(l: usize, ctx: &ParameterContext) -> Result<MonomialPoly> {
    let prec = ctx.precision();
    match l {
        0 | 1 => Err(Error::Domain(format!("the flag starts at degree 2, got {l}"))),
        2 => {
            let xr = MonomialPoly::linear_factor(ctx.r());
            let xs = MonomialPoly::linear_factor(ctx.s());
            let half = real(prec, 1) / 2u32;
            let quadratic = (&xr * &xs).scale(&half);
            let linear = &xr - &MonomialPoly::constant(ctx.beta().clone());
            Ok(&quadratic + &linear)
        }
        3 => {
            let xr = MonomialPoly::linear_factor(ctx.r());
            let shifted_root = ctx.real(ctx.s() - 1u32);
            Ok(&xr.pow(2) * &MonomialPoly::linear_factor(&shifted_root))
        }
        _ => Ok(basis_element(l, ctx)),
    }
}

/// v_l in shifted coordinates, exactly:
/// v_2 = ½B_2 + B_1 − βB_0, v_3 = B_3 + B_2 + 2βB_1 (from (x−r)² = B_2 + 2βB_1),
/// v_l = B_l for l ≥ 4.
pub fn flag_element_shifted(l: usize, ctx: &ParameterContext) -> Result<ShiftedPoly> {
    let zero = || ctx.real(0);
    let one = || ctx.real(1);
    let coefficients = match l {
        0 | 1 => return Err(Error::Domain(format!("the flag starts at degree 2, got {l}"))),
        2 => vec![ctx.real(-ctx.beta()), one(), ctx.real(0.5)],
        3 => vec![zero(), ctx.real(ctx.beta() * 2u32), one(), one()],
        _ => {
            let mut c = vec![zero(); l + 1];
            c[l] = one();
            c
        }
    };
    Ok(ShiftedPoly::new(coefficients, ctx))
}

/// v_2 straight from the classical definition L_2^α(−x); used to check the
/// shifted-root form above.
pub fn flag_v2_classical(ctx: &ParameterContext) -> Result<MonomialPoly> {
    Ok(laguerre(2, ctx.alpha(), ctx)?.negate_argument())
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

    fn poly(c: &[f64]) -> MonomialPoly {
        MonomialPoly::from_f64(c, P)
    }

    fn close(p: &MonomialPoly, q: &MonomialPoly, k: i32) -> bool {
        let scale = p.max_abs_coefficient().max(&q.max_abs_coefficient()).max(&real(P, 1));
        (p - q).max_abs_coefficient() <= ulps(k, P) * scale
    }

    #[test]
    fn exponents_are_ceil_and_floor() {
        assert_eq!(exponents(0), (0, 0));
        assert_eq!(exponents(1), (1, 0));
        assert_eq!(exponents(2), (1, 1));
        assert_eq!(exponents(5), (3, 2));
        for k in 0..20 {
            let (a, b) = exponents(k);
            assert_eq!(a + b, k);
        }
    }

    #[test]
    fn low_basis_elements() {
        let c = ctx(3.0);
        assert_eq!(basis_element(0, &c), poly(&[1.0]));
        assert_eq!(basis_element(1, &c), poly(&[6.0, 1.0]));
        assert_eq!(basis_element(2, &c), poly(&[12.0, 8.0, 1.0]));
        for k in 0..10 {
            let b = basis_element(k, &c);
            assert_eq!(b.degree(), Some(k));
            assert_eq!(b.leading(), 1);
        }
    }

    #[test]
    fn to_monomial_examples() {
        let c = ctx(3.0);
        let one = ShiftedPoly::new(vec![real(P, 1)], &c);
        assert_eq!(one.to_monomial(), poly(&[1.0]));
        let b1 = ShiftedPoly::new(vec![real(P, 0), real(P, 1)], &c);
        assert_eq!(b1.to_monomial(), poly(&[6.0, 1.0]));
        let p = ShiftedPoly::new(vec![real(P, 1), real(P, 2), real(P, 3)], &c);
        assert_eq!(p.to_monomial(), poly(&[49.0, 26.0, 3.0]));
    }

    #[test]
    fn from_monomial_examples() {
        let c = ctx(3.0);
        let constant = from_monomial(&poly(&[2.5]), &c);
        assert_eq!(constant.coefficients(), &[real(P, 2.5)]);
        let b2 = from_monomial(&poly(&[12.0, 8.0, 1.0]), &c);
        assert_eq!(b2.coefficients(), &[real(P, 0), real(P, 0), real(P, 1)]);
        assert!(from_monomial(&MonomialPoly::zero(P), &c).is_empty());
    }

    #[test]
    fn flag_v2_two_ways() {
        for alpha in [0.5, 1.0, 3.0, 3.7] {
            let c = ctx(alpha);
            assert!(close(&flag_element(2, &c).unwrap(), &flag_v2_classical(&c).unwrap(), 8));
        }
        let c = ctx(3.0);
        assert!(close(&flag_element(2, &c).unwrap(), &poly(&[10.0, 5.0, 0.5]), 4));
    }

    #[test]
    fn flag_v3_forms() {
        // (x+6)²(x+3) at α = 3
        let c = ctx(3.0);
        let want = &poly(&[6.0, 1.0]).pow(2) * &poly(&[3.0, 1.0]);
        assert!(close(&flag_element(3, &c).unwrap(), &want, 4));
        // (x−r)²(x−s) + (x−r)²
        for alpha in [0.5, 1.0, 3.0] {
            let c = ctx(alpha);
            let xr2 = MonomialPoly::linear_factor(c.r()).pow(2);
            let alt = &(&xr2 * &MonomialPoly::linear_factor(c.s())) + &xr2;
            assert!(close(&flag_element(3, &c).unwrap(), &alt, 8));
        }
    }

    #[test]
    fn flag_v4_is_basis_element() {
        let c = ctx(1.0);
        let xr = MonomialPoly::linear_factor(c.r());
        let xs = MonomialPoly::linear_factor(c.s());
        assert!(close(&flag_element(4, &c).unwrap(), &(&xr.pow(2) * &xs.pow(2)), 4));
        assert!(flag_element(1, &c).is_err());
    }

    #[test]
    fn shifted_flag_matches_monomial_flag() {
        for alpha in [0.5, 1.0, 3.0, 3.7] {
            let c = ctx(alpha);
            for l in 2..=8 {
                let shifted = flag_element_shifted(l, &c).unwrap().to_monomial();
                assert!(close(&shifted, &flag_element(l, &c).unwrap(), 8), "l = {l}");
            }
        }
        assert!(flag_element_shifted(1, &ctx(1.0)).is_err());
    }

    #[test]
    fn v2_at_r_is_minus_beta() {
        let c = ctx(3.0);
        let v2 = flag_element(2, &c).unwrap();
        assert!(relative_difference(&v2.evaluate(c.r()), &real(P, -2)) <= ulps(4, P));
    }

    /// Σ |a_k| max|coeff(B_k)|: the size of the monomial coefficients the
    /// round trip has to pass through.
    fn conversion_scale(p: &ShiftedPoly) -> Real {
        p.coefficients()
            .iter()
            .enumerate()
            .fold(real(P, 1), |acc, (k, a)| {
                acc + real(P, a.abs_ref()) * basis_element(k, p.context()).max_abs_coefficient()
            })
    }

    proptest! {
        #[test]
        fn monomial_round_trip(coeffs in prop::collection::vec(-100.0f64..100.0, 1..=11),
                               alpha in 0.2f64..4.0) {
            let c = ctx(alpha);
            let p = ShiftedPoly::new(coeffs.iter().map(|&v| real(P, v)).collect(), &c);
            let back = from_monomial(&p.to_monomial(), &c);
            let scale = conversion_scale(&p);
            for k in 0..p.len() {
                let got = back.coefficients().get(k).cloned().unwrap_or_else(|| real(P, 0));
                let diff = real(P, &got - &p.coefficients()[k]).abs();
                prop_assert!(diff <= ulps(16, P) * scale.clone());
            }
        }
    }
}
