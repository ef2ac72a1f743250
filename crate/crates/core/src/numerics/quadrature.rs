use rug::ops::Pow;

use super::{
    check_precision, ensure_finite, real, symmetric_tridiagonal_eigenvalues, Real, GUARD_BITS,
};
use crate::classical::ParameterContext;
use crate::error::{Error, Result};

const MAX_NEWTON_STEPS: usize = 100;

/// Generalized Gauss-Laguerre rule for the weight x^alpha e^(-x) on (0, ∞).
///
/// Exact for polynomials of degree up to `2 * node_count() - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<Real>,
    weights: Vec<Real>,
    alpha: Real,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[Real] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Real] {
        &self.weights
    }

    pub fn alpha(&self) -> &Real {
        &self.alpha
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn precision(&self) -> u32 {
        self.alpha.prec()
    }

    /// Σ w_k f(x_k), i.e. ∫ x^alpha e^(-x) f(x) dx.
    pub fn integrate<F>(&self, mut f: F) -> Real
    where
        F: FnMut(&Real) -> Real,
    {
        let prec = self.precision();
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(real(prec, 0), |acc, (x, w)| acc + real(prec, w * &f(x)))
    }
}

/// Builds the `node_count`-point generalized Gauss-Laguerre rule.
///
/// Nodes are seeded from the eigenvalues of the Jacobi matrix in double
/// precision, then polished by Newton's method on L_n^alpha at `precision`
/// plus guard bits. Weights use Γ(n+α+1) / (n! x [L_n^α'(x)]²).
pub fn gauss_laguerre_rule(alpha: &Real, node_count: usize, precision: u32) -> Result<QuadratureRule> {
    check_precision(precision)?;
    if node_count == 0 {
        return Err(Error::Domain("a quadrature rule needs at least one node".into()));
    }
    if !alpha.is_finite() || *alpha <= -1 {
        return Err(Error::Domain(format!(
            "Laguerre weight exponent must exceed -1, got {}",
            alpha.to_f64()
        )));
    }
    let wp = precision + GUARD_BITS;
    let alpha_w = real(wp, alpha);
    let a = alpha.to_f64();
    let n = node_count;

    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + 1.0 + a).collect();
    let off: Vec<f64> = (1..n)
        .map(|k| (k as f64 * (k as f64 + a)).sqrt())
        .collect();
    let guesses = symmetric_tridiagonal_eigenvalues(&diag, &off)?;

    let scale = {
        let top = real(wp, &alpha_w + (n as u32 + 1)).gamma();
        let fact = real(wp, Real::factorial(n as u32));
        top / fact
    };

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (index, guess) in guesses.into_iter().enumerate() {
        let x = newton_polish(&alpha_w, n, real(wp, guess), index)?;
        let (value, previous) = laguerre_pair(&alpha_w, n, &x);
        let derivative = laguerre_derivative(&alpha_w, n, &x, &value, &previous);
        let w = real(wp, &scale / &x) / derivative.square();
        nodes.push(ensure_finite(real(precision, &x), "quadrature node")?);
        weights.push(ensure_finite(real(precision, &w), "quadrature weight")?);
    }

    for (k, pair) in nodes.windows(2).enumerate() {
        if pair[1] <= pair[0] {
            return Err(Error::NoConvergence {
                what: "Gauss-Laguerre node refinement",
                iterations: MAX_NEWTON_STEPS,
                detail: format!(
                    "nodes {k} and {} collapsed near {:e} (n = {n}, alpha = {a})",
                    k + 1,
                    pair[0].to_f64()
                ),
            });
        }
    }
    if nodes[0] <= 0 || weights.iter().any(|w| *w <= 0) {
        return Err(Error::NoConvergence {
            what: "Gauss-Laguerre node refinement",
            iterations: MAX_NEWTON_STEPS,
            detail: format!("non-positive node or weight (n = {n}, alpha = {a})"),
        });
    }

    Ok(QuadratureRule {
        nodes,
        weights,
        alpha: real(precision, alpha),
    })
}

/// Quadrature estimate of the adjusted moment mu[i][j].
///
/// The rule absorbs x^alpha e^(-x); what remains of the exceptional weight
/// is (x-r)^i (x-s)^j / (L_2^(alpha-1)(-x))², and since
/// L_2^(alpha-1)(-x) = ½(x-r)(x-s) that is 4 (x-r)^(i-2) (x-s)^(j-2).
pub fn integrate_adjusted(
    rule: &QuadratureRule,
    i: usize,
    j: usize,
    ctx: &ParameterContext,
) -> Result<Real> {
    if rule.alpha() != ctx.alpha() {
        return Err(Error::Domain(
            "quadrature rule and parameter context use different alpha".into(),
        ));
    }
    let prec = ctx.precision();
    let pi = i as i32 - 2;
    let pj = j as i32 - 2;
    let sum = rule.integrate(|x| {
        let xr = real(prec, x - ctx.r()).pow(pi);
        let xs = real(prec, x - ctx.s()).pow(pj);
        xr * xs
    });
    ensure_finite(real(prec, sum * 4u32), "integrate_adjusted")
}

/// (L_n^a(x), L_{n-1}^a(x)) by the three-term recurrence.
fn laguerre_pair(a: &Real, n: usize, x: &Real) -> (Real, Real) {
    let prec = x.prec();
    let mut previous = real(prec, 1);
    let mut current = real(prec, a + 1u32) - x;
    if n == 0 {
        return (previous, real(prec, 0));
    }
    for k in 1..n {
        let k32 = k as u32;
        let factor = real(prec, a + (2 * k32 + 1)) - x;
        let next = (factor * &current - real(prec, a + k32) * &previous) / (k32 + 1);
        previous = std::mem::replace(&mut current, next);
    }
    (current, previous)
}

/// x L_n'(x) = n L_n(x) − (n + a) L_{n-1}(x).
fn laguerre_derivative(a: &Real, n: usize, x: &Real, value: &Real, previous: &Real) -> Real {
    let prec = x.prec();
    let lhs = real(prec, value * n as u32);
    let rhs = real(prec, a + n as u32) * previous;
    (lhs - rhs) / x
}

fn newton_polish(a: &Real, n: usize, mut x: Real, index: usize) -> Result<Real> {
    // The recurrence loses a few bits to rounding, so the iterate is only
    // required to settle at the output precision, not the guarded one.
    let target = x.prec() as i32 - GUARD_BITS as i32 + 8;
    let mut settled = false;
    for _ in 0..MAX_NEWTON_STEPS {
        let (value, previous) = laguerre_pair(a, n, &x);
        let derivative = laguerre_derivative(a, n, &x, &value, &previous);
        if derivative.is_zero() {
            break;
        }
        let step = value / derivative;
        x -= &step;
        let small = match (step.get_exp(), x.get_exp()) {
            (_, None) => true,
            (None, _) => true,
            (Some(es), Some(ex)) => es < ex - target,
        };
        if settled {
            return Ok(x);
        }
        // one extra step once the correction is at working precision
        settled = small;
    }
    Err(Error::NoConvergence {
        what: "Gauss-Laguerre Newton iteration",
        iterations: MAX_NEWTON_STEPS,
        detail: format!("node {index} of {n}, last iterate {:e}", x.to_f64()),
    })
}
