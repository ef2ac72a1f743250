//! Dense polynomials in the monomial basis.
//!
//! This is the canonical representation for every polynomial in the crate;
//! the shifted basis of [`crate::basis`] converts to and from it.

use std::ops::{Add, Mul, Neg, Sub};

use crate::numerics::{real, Real};

/// Σ c_k x^k with `coefficients[k] = c_k`.
///
/// Exact trailing zeros are trimmed, so a nonzero polynomial always has a
/// nonzero leading coefficient. The zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialPoly {
    coefficients: Vec<Real>,
    prec: u32,
}

impl MonomialPoly {
    pub fn new(coefficients: Vec<Real>, prec: u32) -> Self {
        let coefficients = coefficients.into_iter().map(|c| real(prec, c)).collect();
        let mut p = MonomialPoly { coefficients, prec };
        p.trim();
        p
    }

    pub fn zero(prec: u32) -> Self {
        MonomialPoly {
            coefficients: Vec::new(),
            prec,
        }
    }

    pub fn constant(c: Real) -> Self {
        let prec = c.prec();
        MonomialPoly::new(vec![c], prec)
    }

    /// x − root.
    pub fn linear_factor(root: &Real) -> Self {
        let prec = root.prec();
        MonomialPoly::new(vec![real(prec, -root), real(prec, 1)], prec)
    }

    pub fn from_f64(coefficients: &[f64], prec: u32) -> Self {
        MonomialPoly::new(coefficients.iter().map(|&c| real(prec, c)).collect(), prec)
    }

    pub fn coefficients(&self) -> &[Real] {
        &self.coefficients
    }

    /// Coefficient of x^k, zero beyond the degree.
    pub fn coefficient(&self, k: usize) -> Real {
        self.coefficients
            .get(k)
            .cloned()
            .unwrap_or_else(|| real(self.prec, 0))
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn leading(&self) -> Real {
        self.coefficients
            .last()
            .cloned()
            .unwrap_or_else(|| real(self.prec, 0))
    }

    pub fn max_abs_coefficient(&self) -> Real {
        self.coefficients
            .iter()
            .fold(real(self.prec, 0), |m, c| m.max(&real(self.prec, c.abs_ref())))
    }

    /// Horner evaluation.
    pub fn evaluate(&self, x: &Real) -> Real {
        let prec = self.prec.max(x.prec());
        self.coefficients
            .iter()
            .rev()
            .fold(real(prec, 0), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| real(self.prec, c * k as u32))
            .collect();
        MonomialPoly::new(coefficients, self.prec)
    }

    pub fn scale(&self, factor: &Real) -> Self {
        let coefficients = self
            .coefficients
            .iter()
            .map(|c| real(self.prec, c * factor))
            .collect();
        MonomialPoly::new(coefficients, self.prec)
    }

    /// p(x) ↦ p(−x).
    pub fn negate_argument(&self) -> Self {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 1 { real(self.prec, -c) } else { c.clone() })
            .collect();
        MonomialPoly::new(coefficients, self.prec)
    }

    pub fn pow(&self, exponent: usize) -> Self {
        let mut result = MonomialPoly::constant(real(self.prec, 1));
        for _ in 0..exponent {
            result = &result * self;
        }
        result
    }

    fn trim(&mut self) {
        while self.coefficients.last().is_some_and(|c| c.is_zero()) {
            self.coefficients.pop();
        }
    }
}

impl Add for &MonomialPoly {
    type Output = MonomialPoly;

    fn add(self, rhs: &MonomialPoly) -> MonomialPoly {
        let prec = self.prec.max(rhs.prec);
        let len = self.coefficients.len().max(rhs.coefficients.len());
        let coefficients = (0..len)
            .map(|k| real(prec, &self.coefficient(k) + &rhs.coefficient(k)))
            .collect();
        MonomialPoly::new(coefficients, prec)
    }
}

impl Sub for &MonomialPoly {
    type Output = MonomialPoly;

    fn sub(self, rhs: &MonomialPoly) -> MonomialPoly {
        self + &(-rhs)
    }
}

impl Neg for &MonomialPoly {
    type Output = MonomialPoly;

    fn neg(self) -> MonomialPoly {
        let coefficients = self.coefficients.iter().map(|c| real(self.prec, -c)).collect();
        MonomialPoly::new(coefficients, self.prec)
    }
}

impl Mul for &MonomialPoly {
    type Output = MonomialPoly;

    fn mul(self, rhs: &MonomialPoly) -> MonomialPoly {
        let prec = self.prec.max(rhs.prec);
        if self.is_zero() || rhs.is_zero() {
            return MonomialPoly::zero(prec);
        }
        let mut coefficients = vec![real(prec, 0); self.coefficients.len() + rhs.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in rhs.coefficients.iter().enumerate() {
                coefficients[i + j] += real(prec, a * b);
            }
        }
        MonomialPoly::new(coefficients, prec)
    }
}
