//! Independent checks on everything the other modules produce, and the
//! suite that runs them over a set of α values and degrees.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::ops::Pow;
use serde::Serialize;

use crate::basis::{basis_element, flag_element, from_monomial, ShiftedPoly};
use crate::classical::{closed_form_leading, closed_form_xop, exceptional_denominator, laguerre, ParameterContext};
use crate::determinantal::{
    self, build_matrix, construct, determinant_floor_margin, moment_inner_product, required_extent, Method,
};
use crate::error::{Error, Result};
use crate::linalg;
use crate::moments::{fill_table, fill_table_with, quadrature_table, FillOrder, FourTermKind, MomentTable};
use crate::numerics::{
    decimal_tolerance, exp_integral_e, format_real, gamma, gauss_laguerre_rule, real, relative_difference,
    ulps, upper_incomplete_gamma, QuadratureRule, Real,
};
use crate::poly::MonomialPoly;

/// Digits the working precision guarantees, ⌊prec · log10 2⌋.
pub fn precision_digits(prec: u32) -> u32 {
    (prec as f64 * std::f64::consts::LOG10_2).floor() as u32
}

/// (r p′(r) + α p(r), s p′(s) + α p(s)), each divided by max(1, max|coeff|).
pub fn exceptional_residuals(p: &MonomialPoly, ctx: &ParameterContext) -> (Real, Real) {
    let scale = p.max_abs_coefficient().max(&ctx.real(1));
    let dp = p.derivative();
    let at = |xi: &Real| {
        let value = ctx.real(xi * &dp.evaluate(xi)) + ctx.real(ctx.alpha() * &p.evaluate(xi));
        value / &scale
    };
    (at(ctx.r()), at(ctx.s()))
}

/// max|coeff R| / max(max|coeff((n−2) N p)|, 1) with
/// R = −x N p″ + [(x−α−1) N + 2x N′] p′ + [2α N′ − 2N] p − (n−2) N p
/// and N = L_2^(α−1)(−x): the eigenvalue equation multiplied through by N.
/// `p` must have degree exactly `n`.
pub fn operator_identity_residual(p: &MonomialPoly, n: usize, ctx: &ParameterContext) -> Result<Real> {
    if p.degree() != Some(n) {
        return Err(Error::Domain(format!(
            "operator identity needs a polynomial of degree {n}, got {:?}",
            p.degree()
        )));
    }
    let prec = ctx.precision();
    let x = MonomialPoly::from_f64(&[0.0, 1.0], prec);
    let big_n = exceptional_denominator(ctx)?;
    let dn = big_n.derivative();
    let dp = p.derivative();
    let ddp = dp.derivative();

    let shift = &x - &MonomialPoly::constant(ctx.real(ctx.alpha() + 1u32));
    let first = -&(&(&x * &big_n) * &ddp);
    let second_coeff = &(&shift * &big_n) + &(&x * &dn).scale(&ctx.real(2));
    let third_coeff = &dn.scale(&ctx.real(ctx.alpha() * 2u32)) - &big_n.scale(&ctx.real(2));
    let eigen = (&big_n * p).scale(&ctx.real(n as i64 - 2));
    let residual = &(&(&first + &(&second_coeff * &dp)) + &(&third_coeff * p)) - &eigen;
    let scale = eigen.max_abs_coefficient().max(&ctx.real(1));
    Ok(residual.max_abs_coefficient() / scale)
}

/// |⟨p, q⟩| / (‖p‖ ‖q‖) under the moment inner product.
pub fn orthogonality_residual(p: &MonomialPoly, q: &MonomialPoly, table: &MomentTable, ctx: &ParameterContext) -> Result<Real> {
    let (a, b) = (from_monomial(p, ctx), from_monomial(q, ctx));
    let cross = moment_inner_product(a.coefficients(), b.coefficients(), table)?;
    let pp = moment_inner_product(a.coefficients(), a.coefficients(), table)?;
    let qq = moment_inner_product(b.coefficients(), b.coefficients(), table)?;
    let norms = ctx.real(&pp * &qq).sqrt();
    Ok(cross.abs() / norms)
}

/// ∫ p q Ŵ by quadrature: the rule carries x^α e^(−x) and the remaining
/// factor is 1/N² = 4/((x−r)²(x−s)²).
pub fn quadrature_inner_product(p: &MonomialPoly, q: &MonomialPoly, rule: &QuadratureRule, ctx: &ParameterContext) -> Real {
    let sum = rule.integrate(|x| {
        let xr = ctx.real(x - ctx.r());
        let xs = ctx.real(x - ctx.s());
        let denominator = ctx.real(&xr * &xs).square();
        ctx.real(&p.evaluate(x) * &q.evaluate(x)) / denominator
    });
    sum * 4u32
}

/// Off-diagonal/diagonal ratio max |G_mn| / √(G_mm G_nn) and the smallest
/// diagonal entry of the Gram matrix of `polys`.
pub fn gram_orthogonality(polys: &[ShiftedPoly], table: &MomentTable) -> Result<(Real, Real)> {
    let ctx = table.context();
    let k = polys.len();
    let mut g = vec![vec![ctx.real(0); k]; k];
    for i in 0..k {
        for j in i..k {
            let v = moment_inner_product(polys[i].coefficients(), polys[j].coefficients(), table)?;
            g[i][j] = v.clone();
            g[j][i] = v;
        }
    }
    let mut worst = ctx.real(0);
    let mut smallest: Option<Real> = None;
    for i in 0..k {
        smallest = Some(match smallest {
            Some(m) => m.min(&g[i][i]),
            None => g[i][i].clone(),
        });
        for j in i + 1..k {
            let norm = ctx.real(&g[i][i] * &g[j][j]).abs().sqrt();
            worst = worst.max(&(g[i][j].clone().abs() / norm));
        }
    }
    Ok((worst, smallest.unwrap_or_else(|| ctx.real(0))))
}

/// max_k |p_k − q_k| / max_k |q_k| over monomial coefficients.
pub fn coefficient_deviation(p: &MonomialPoly, q: &MonomialPoly) -> Real {
    let scale = q.max_abs_coefficient();
    (p - q).max_abs_coefficient() / scale
}

/// One check outcome. Numbers are kept at full working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub check: String,
    pub alpha: String,
    pub n: Option<usize>,
    pub residual: Real,
    pub tolerance: Real,
    pub pass: bool,
    pub error: Option<String>,
}

impl CheckRecord {
    /// pass ⇔ residual ≤ tolerance.
    pub fn measured(check: impl Into<String>, alpha: &str, n: Option<usize>, residual: Real, tolerance: Real) -> Self {
        let pass = residual.is_finite() && residual <= tolerance;
        CheckRecord {
            check: check.into(),
            alpha: alpha.to_string(),
            n,
            residual,
            tolerance,
            pass,
            error: None,
        }
    }

    /// A check that could not run. Always fails.
    pub fn errored(check: impl Into<String>, alpha: &str, n: Option<usize>, error: &Error, prec: u32) -> Self {
        CheckRecord {
            check: check.into(),
            alpha: alpha.to_string(),
            n,
            residual: real(prec, f64::INFINITY),
            tolerance: real(prec, 0),
            pass: false,
            error: Some(error.to_string()),
        }
    }

    fn from_result(check: &str, alpha: &str, n: Option<usize>, prec: u32, outcome: Result<(Real, Real)>) -> Self {
        match outcome {
            Ok((residual, tolerance)) => CheckRecord::measured(check, alpha, n, residual, tolerance),
            Err(e) => CheckRecord::errored(check, alpha, n, &e, prec),
        }
    }
}

#[derive(Serialize)]
struct RecordJson<'a> {
    check: &'a str,
    alpha: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    residual: serde_json::Value,
    tolerance: serde_json::Value,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

/// A JSON number carrying every digit of `x`; non-finite values become
/// strings since JSON has no literal for them.
pub fn json_number(x: &Real) -> serde_json::Value {
    if !x.is_finite() {
        return serde_json::Value::String(if x.is_nan() { "nan".into() } else { format!("{}inf", if x.is_sign_negative() { "-" } else { "" }) });
    }
    let text = format_real(x);
    serde_json::Number::from_str(&text)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::String(text))
}

fn json_decimal(text: &str) -> serde_json::Value {
    serde_json::Number::from_str(text)
        .map(serde_json::Value::Number)
        .unwrap_or_else(|_| serde_json::Value::String(text.to_string()))
}

/// Everything one run of the suite produced.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub alphas: Vec<String>,
    pub n_max: usize,
    pub precision: u32,
    pub quad_nodes: usize,
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn passed(&self) -> usize {
        self.records.iter().filter(|r| r.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.records.len() - self.passed()
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let records: Vec<serde_json::Value> = self
            .records
            .iter()
            .map(|r| {
                serde_json::to_value(RecordJson {
                    check: &r.check,
                    alpha: json_decimal(&r.alpha),
                    n: r.n,
                    residual: json_number(&r.residual),
                    tolerance: json_number(&r.tolerance),
                    pass: r.pass,
                    error: r.error.as_deref(),
                })
                .expect("record serializes")
            })
            .collect();
        serde_json::json!({
            "alphas": self.alphas.iter().map(|a| json_decimal(a)).collect::<Vec<_>>(),
            "n_range": [2, self.n_max],
            "precision_bits": self.precision,
            "quad_nodes": self.quad_nodes,
            "records": records,
            "summary": {
                "passed": self.passed(),
                "failed": self.failed(),
                "total": self.records.len(),
            },
        })
    }
}

/// Settings shared by every case of a suite run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    pub precision: u32,
    pub quad_nodes: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            precision: crate::numerics::DEFAULT_PRECISION,
            quad_nodes: 200,
        }
    }
}

/// Runs every check for each α (given as decimal text) over degrees
/// 2..=n_max. Failures of any kind become failing records.
pub fn run_suite(alphas: &[String], n_max: usize, options: SuiteOptions) -> Result<VerificationReport> {
    if n_max < 2 {
        return Err(Error::Domain(format!("n_max must be at least 2, got {n_max}")));
    }
    let records = alphas
        .par_iter()
        .map(|alpha| alpha_records(alpha, n_max, options))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(VerificationReport {
        alphas: alphas.to_vec(),
        n_max,
        precision: options.precision,
        quad_nodes: options.quad_nodes,
        records,
    })
}

/// Everything a case needs, computed once per α.
struct Fixture {
    ctx: ParameterContext,
    /// At least 9×9 and wide enough for every degree up to n_max.
    table: MomentTable,
}

type TableCheck = fn(&Fixture, SuiteOptions, usize) -> Result<(Real, Real)>;

fn alpha_records(alpha: &str, n_max: usize, options: SuiteOptions) -> Vec<CheckRecord> {
    let prec = options.precision;
    let setup = || -> Result<Fixture> {
        let ctx = ParameterContext::from_decimal(alpha, prec)?;
        let (imax, jmax) = required_extent(n_max);
        let table = fill_table(&ctx, imax.max(8), jmax.max(8))?;
        Ok(Fixture { ctx, table })
    };
    let fixture = match setup() {
        Ok(f) => f,
        Err(e) => return vec![CheckRecord::errored("setup", alpha, None, &e, prec)],
    };

    let global: Vec<(&str, TableCheck)> = vec![
        ("numerics/gamma_functional_equation", check_gamma_recurrence),
        ("numerics/exp_integral_identity", check_exp_integral_identity),
        ("numerics/quadrature_exactness", check_quadrature_exactness),
        ("numerics/quadrature_node_doubling", check_node_doubling),
        ("numerics/precision_doubling", check_precision_doubling),
        ("classical/recurrence", check_laguerre_recurrence),
        ("basis/v3_forms", check_v3_forms),
        ("basis/round_trip", check_round_trip),
        ("moments/initial_mu22", check_mu22),
        ("moments/quadrature_agreement", check_quadrature_agreement),
        ("moments/three_term_residual", check_three_term),
        ("moments/four_term_consistency", check_four_term),
        ("moments/path_independence", check_path_independence),
        ("moments/positivity", check_positivity),
        ("verify/gram_orthogonality", check_gram),
        ("verify/inner_product_vs_quadrature", check_inner_products),
    ];
    let mut records: Vec<CheckRecord> = global
        .par_iter()
        .map(|(name, check)| {
            CheckRecord::from_result(name, alpha, None, prec, check(&fixture, options, n_max))
        })
        .collect();

    let per_degree: Vec<CheckRecord> = (2..=n_max)
        .into_par_iter()
        .map(|n| degree_records(&fixture, alpha, n))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    records.extend(per_degree);
    records
}

fn degree_records(f: &Fixture, alpha: &str, n: usize) -> Vec<CheckRecord> {
    let ctx = &f.ctx;
    let prec = ctx.precision();
    let mut out = Vec::new();
    let mut push = |name: String, outcome: Result<(Real, Real)>| {
        out.push(CheckRecord::from_result(&name, alpha, Some(n), prec, outcome));
    };
    let exceptional_tol = ulps(32, prec);

    push("classical/closed_form_degree".into(), attempt(|| {
        let p = closed_form_xop(n, ctx)?;
        let ok = p.degree() == Some(n) && !p.leading().is_zero();
        Ok((ctx.real(if ok { 0 } else { 1 }), ctx.real(0)))
    }));
    push("basis/flag_exceptional".into(), attempt(|| {
        let (a, b) = exceptional_residuals(&flag_element(n, ctx)?, ctx);
        Ok((a.abs().max(&b.abs()), exceptional_tol.clone()))
    }));
    if n - 2 <= 6 {
        push("basis/constraint_rank".into(), constraint_rank_defect(n, ctx));
    }
    push("determinantal/nonsingular".into(), attempt(|| {
        let mm = build_matrix(n, &f.table, ctx)?;
        let det = mm.determinant()?;
        let singular = linalg::numerically_singular(&det, mm.matrix());
        Ok((ctx.real(if singular { 1 } else { 0 }), ctx.real(0)))
    }));
    push("determinantal/determinant_floor".into(), attempt(|| {
        // residual = 2^(−margin): at most 1 when |det| clears the floor
        let margin = determinant_floor_margin(&build_matrix(n, &f.table, ctx)?)?;
        Ok((ctx.real(2).pow_ref_f64(-margin), ctx.real(1)))
    }));
    push("determinantal/k_n_invariance".into(), attempt(|| {
        let mm = build_matrix(n, &f.table, ctx)?;
        let base = determinantal::normalize(&determinantal::solve_representation_a(&mm)?, n)?;
        let scaled = determinantal::solve_representation_a(&mm.with_k_n(ctx.real(3))?)?;
        let scaled = determinantal::normalize(&scaled, n)?;
        Ok((coefficient_deviation(&scaled.to_monomial(), &base.to_monomial()), ulps(32, prec)))
    }));

    let oracle = closed_form_xop(n, ctx);
    for method in Method::ALL {
        let built = construct(method, n, &f.table, ctx, true).map(|p| p.to_monomial());
        let tag = method.as_str();
        if method != Method::ClosedForm {
            push(format!("determinantal/cross_method/{tag}"), attempt(|| {
                let (p, q) = (built.clone()?, oracle.clone()?);
                Ok((coefficient_deviation(&p, &q), decimal_tolerance(20, prec)))
            }));
        }
        push(format!("verify/exceptional/{tag}"), attempt(|| {
            let (a, b) = exceptional_residuals(&built.clone()?, ctx);
            Ok((a.abs().max(&b.abs()), exceptional_tol.clone()))
        }));
        push(format!("verify/operator_identity/{tag}"), attempt(|| {
            Ok((operator_identity_residual(&built.clone()?, n, ctx)?, ulps(40, prec)))
        }));
        if n == 2 {
            push(format!("verify/degree_two_is_v2/{tag}"), attempt(|| {
                let v2 = flag_element(2, ctx)?;
                let p = built.clone()?.scale(&(ctx.real(0.5) / closed_form_leading(2, ctx)?));
                Ok((coefficient_deviation(&p, &v2), ulps(48, prec)))
            }));
        }
    }
    out
}

/// |rank − 2| of the 2×(k+3) matrix of the two exceptional conditions on
/// 1, x, …, x^(k+2), k = n − 2, plus a membership check of L̂_{2,n}: the
/// residual is 0 only if the rank is 2 and the closed form satisfies the
/// conditions to 2^(32−prec).
fn constraint_rank_defect(n: usize, ctx: &ParameterContext) -> Result<(Real, Real)> {
    let prec = ctx.precision();
    let row = |xi: &Real| -> Vec<Real> {
        (0..=n)
            .map(|k| {
                // ξ·k ξ^(k−1) + α ξ^k = (k + α) ξ^k
                let power = ctx.real(xi.clone().pow(k as u32));
                ctx.real(ctx.alpha() + k as u32) * power
            })
            .collect()
    };
    let (a, b) = (row(ctx.r()), row(ctx.s()));
    let norm = |v: &[Real]| v.iter().fold(ctx.real(0), |s, x| s + ctx.real(x.square_ref())).sqrt();
    let scale = norm(&a) * norm(&b);
    let mut largest_minor = ctx.real(0);
    for i in 0..=n {
        for j in i + 1..=n {
            let minor = ctx.real(&a[i] * &b[j]) - ctx.real(&a[j] * &b[i]);
            largest_minor = largest_minor.max(&minor.abs());
        }
    }
    let rank = if largest_minor / &scale > ulps(prec as i32 / 2, prec) { 2 } else { 1 };
    let (ra, rb) = exceptional_residuals(&closed_form_xop(n, ctx)?, ctx);
    let member = ra.abs().max(&rb.abs()) <= ulps(32, prec);
    let defect = (2 - rank) + if member { 0 } else { 1 };
    Ok((ctx.real(defect), ctx.real(0)))
}

fn check_gamma_recurrence(f: &Fixture, _: SuiteOptions, _: usize) -> Result<(Real, Real)> {
    let ctx = &f.ctx;
    let mut worst = ctx.real(0);
    for x in [0.5, 1.0, 2.5, 4.0] {
        let x = ctx.real(x);
        let lhs = gamma(&ctx.real(&x + 1u32))?;
        let rhs = ctx.real(&x * &gamma(&x)?);
        worst = worst.max(&relative_difference(&lhs, &rhs));
    }
    Ok((worst, ulps(8, ctx.precision())))
}

fn check_exp_integral_identity(f: &Fixture, _: SuiteOptions, _: usize) -> Result<(Real, Real)> {
    let ctx = &f.ctx;
    let minus_r = ctx.real(-ctx.r());
    let minus_s = ctx.real(-ctx.s());
    let cases = [
        (ctx.real(ctx.alpha() + 1u32), minus_r),
        (ctx.real(ctx.alpha() + 1u32), minus_s),
        (ctx.real(0.5), ctx.real(2)),
        (ctx.real(2), ctx.real(0.5)),
    ];
    let mut worst = ctx.real(0);
    for (a, x) in cases {
        let lhs = exp_integral_e(&a, &x)?;
        let power = ctx.real(Pow::pow(&x, &ctx.real(&a - 1u32)));
        let rhs = power * upper_incomplete_gamma(&ctx.real(1u32 - &a), &x)?;
        worst = worst.max(&relative_difference(&lhs, &rhs));
    }
    Ok((worst, ulps(16, ctx.precision())))
}

/// Σ w x^k against Γ(α+k+1) for 0 ≤ k ≤ 2N−1, tolerance 10^(−0.8 d).
fn check_quadrature_exactness(f: &Fixture, options: SuiteOptions, _: usize) -> Result<(Real, Real)> {
    let ctx = &f.ctx;
    let rule = gauss_laguerre_rule(ctx.alpha(), options.quad_nodes, ctx.precision())?;
    let mut worst = ctx.real(0);
    let mut powers: Vec<Real> = rule.weights().to_vec();
    for k in 0..2 * rule.node_count() {
        let sum = powers.iter().fold(ctx.real(0), |acc, w| acc + w);
        let want = gamma(&ctx.real(ctx.alpha() + (k as u32 + 1)))?;
        worst = worst.max(&relative_difference(&sum, &want));
        for (p, x) in powers.iter_mut().zip(rule.nodes()) {
            *p *= x;
        }
    }
    let digits = 0.8 * precision_digits(ctx.precision()) as f64;
    Ok((worst, ctx.real(10).pow_ref_f64(-digits)))
}

/// Relative change of every μ̃[i][j], i, j ≤ 8, from N to 2N nodes,
/// tolerance 10^(−d/2).
fn check_node_doubling(f: &Fixture, options: SuiteOptions, _: usize) -> Result<(Real, Real)> {
    let ctx = &f.ctx;
    let prec = ctx.precision();
    let coarse = quadrature_table(&gauss_laguerre_rule(ctx.alpha(), options.quad_nodes, prec)?, ctx, 8, 8)?;
    let fine = quadrature_table(&gauss_laguerre_rule(ctx.alpha(), 2 * options.quad_nodes, prec)?, ctx, 8, 8)?;
    let digits = precision_digits(prec) as f64 / 2.0;
    Ok((coarse.max_relative_difference(&fine)?, ctx.real(10).pow_ref_f64(-digits)))
}

/// The 9×9 table at prec and 2·prec agree to the lower precision's own
/// table tolerance.
fn check_precision_doubling(f: &Fixture, _: SuiteOptions, _: usize) -> Result<(Real, Real)> {
    let ctx = &f.ctx;
    let prec = ctx.precision();
    let wide = ParameterContext::new(ctx.alpha(), 2 * prec)?;
    let low = fill_table(ctx, 8, 8)?;
    let high = fill_table(&wide, 8, 8)?;
    let mut worst = ctx.real(0);
    for (i, j, v, _) in low.entries() {
        worst = worst.max(&ctx.real(relative_difference(&real(2 * prec, v), high.get(i, j)?)));
    }
    Ok((worst, ulps(48, prec)))
}

fn check_laguerre_recurrence(f: &Fixture, _: SuiteOptions, _: usize) -> Result<(Real, Real)> {
    let ctx = &f.ctx;
    let prec = ctx.precision();
    let a = ctx.alpha();
    let x = MonomialPoly::from_f64(&[0.0, 1.0], prec);
    let mut worst = ctx.real(0);
    for n in 1..=11u32 {
        let next = laguerre(n as i64 + 1, a, ctx)?;
        let cur = laguerre(n as i64, a, ctx)?;
        let prev = laguerre(n as i64 - 1, a, ctx)?;
        let lhs = next.scale(&ctx.real(n + 1));
        let factor = &MonomialPoly::constant(ctx.real(a + (2 * n + 1))) - &x;
        let rhs = &(&factor * &cur) - &prev.scale(&ctx.real(a + n));
        worst = worst.max(&coefficient_deviation(&rhs, &lhs));
    }
    Ok((worst, ulps(32, prec)))
}

fn check_v3_forms(f: &Fixture, _: SuiteOptions, _: usize) -> Result<(Real, Real)> {
    let ctx = &f.ctx;
    let xr2 = MonomialPoly::linear_factor(ctx.r()).pow(2);
    let alt = &(&xr2 * &MonomialPoly::linear_factor(ctx.s())) + &xr2;
    Ok((coefficient_deviation(&flag_element(3, ctx)?, &alt), ulps(16, ctx.precision())))
}

fn check_round_trip(f: &Fixture, _: SuiteOptions, _: usize) -> Result<(Real, Real)> {
    let ctx = &f.ctx;
    let prec = ctx.precision();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = ctx.real(0);
    for _ in 0..20 {
        let len = rng.gen_range(1..=11);
        let coefficients: Vec<Real> = (0..len).map(|_| ctx.real(rng.gen_range(-100.0..100.0))).collect();
        let p = ShiftedPoly::new(coefficients, ctx);
        let back = crate::basis::from_monomial(&p.to_monomial(), ctx);
        let scale = p
            .coefficients()
            .iter()
            .enumerate()
            .fold(ctx.real(1), |acc, (k, a)| acc + ctx.real(a.abs_ref()) * basis_element(k, ctx).max_abs_coefficient());
        for (k, a) in p.coefficients().iter().enumerate() {
            let got = back.coefficients().get(k).cloned().unwrap_or_else(|| ctx.real(0));
            worst = worst.max(&(ctx.real(&got - a).abs() / &scale));
        }
    }
    Ok((worst, ulps(16, prec)))
}

fn check_mu22(f: &Fixture, _: SuiteOptions, _: usize) -> Result<(Real, Real)> {
    let ctx = &f.ctx;
    let want = ctx.real(gamma(&ctx.real(ctx.alpha() + 1u32))? * 4u32);
    Ok((relative_difference(f.table.get(2, 2)?, &want), ulps(8, ctx.precision())))
}

fn check_quadrature_agreement(f: &Fixture, options: SuiteOptions, _: usize) -> Result<(Real, Real)> {
    let ctx = &f.ctx;
    let rule = gauss_laguerre_rule(ctx.alpha(), options.quad_nodes, ctx.precision())?;
    let quad = quadrature_table(&rule, ctx, 8, 8)?;
    Ok((f.table.max_relative_difference(&quad)?, decimal_tolerance(25, ctx.precision())))
}

fn check_three_term(f: &Fixture, _: SuiteOptions, _: usize) -> Result<(Real, Real)> {
    Ok((f.table.three_term_residual()?, ulps(48, f.ctx.precision())))
}

fn check_four_term(f: &Fixture, _: SuiteOptions, _: usize) -> Result<(Real, Real)> {
    let t = &f.table;
    let worst = t
        .four_term_disagreement()?
        .max(&t.four_term_residual(FourTermKind::A)?)
        .max(&t.four_term_residual(FourTermKind::B)?);
    Ok((worst, ulps(48, f.ctx.precision())))
}

fn check_path_independence(f: &Fixture, _: SuiteOptions, _: usize) -> Result<(Real, Real)> {
    let t = &f.table;
    let swapped = fill_table_with(&f.ctx, t.imax(), t.jmax(), FillOrder::Swapped)?;
    Ok((t.max_relative_difference(&swapped)?, ulps(48, f.ctx.precision())))
}

fn check_positivity(f: &Fixture, _: SuiteOptions, _: usize) -> Result<(Real, Real)> {
    let t = &f.table;
    let mut bad = 0;
    for k in 0..=t.imax().min(t.jmax()) / 2 {
        if *t.get(2 * k, 2 * k)? <= 0 {
            bad += 1;
        }
    }
    Ok((f.ctx.real(bad), f.ctx.real(0)))
}

/// Gram matrix of the closed forms L̂_{2,2}..L̂_{2,max(n_max, 8)}: off-diagonal
/// ratio ≤ 10^(−25) and a positive diagonal.
fn check_gram(f: &Fixture, _: SuiteOptions, n_max: usize) -> Result<(Real, Real)> {
    let ctx = &f.ctx;
    let top = n_max.max(8);
    let (imax, jmax) = required_extent(top);
    let table = if f.table.imax() >= imax && f.table.jmax() >= jmax {
        f.table.clone()
    } else {
        fill_table(ctx, imax, jmax)?
    };
    let polys = (2..=top)
        .map(|n| Ok(from_monomial(&closed_form_xop(n, ctx)?, ctx)))
        .collect::<Result<Vec<_>>>()?;
    let (ratio, smallest) = gram_orthogonality(&polys, &table)?;
    if smallest <= 0 {
        return Err(Error::Degenerate(2));
    }
    Ok((ratio, decimal_tolerance(25, ctx.precision())))
}

/// 10 seeded random pairs of degree ≤ 6.
fn check_inner_products(f: &Fixture, options: SuiteOptions, _: usize) -> Result<(Real, Real)> {
    let ctx = &f.ctx;
    let prec = ctx.precision();
    let rule = gauss_laguerre_rule(ctx.alpha(), options.quad_nodes, prec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x1d);
    let mut worst = ctx.real(0);
    let random_poly = |rng: &mut ChaCha8Rng| {
        let degree = rng.gen_range(0..=6);
        let c: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
        MonomialPoly::from_f64(&c, prec)
    };
    for _ in 0..10 {
        let p = random_poly(&mut rng);
        let q = random_poly(&mut rng);
        let (a, b) = (from_monomial(&p, ctx), from_monomial(&q, ctx));
        let moments = moment_inner_product(a.coefficients(), b.coefficients(), &f.table)?;
        let quad = quadrature_inner_product(&p, &q, &rule, ctx);
        // relative to ‖p‖‖q‖ so that nearly orthogonal pairs are not penalized
        let pp = moment_inner_product(a.coefficients(), a.coefficients(), &f.table)?;
        let qq = moment_inner_product(b.coefficients(), b.coefficients(), &f.table)?;
        let scale = ctx.real(&pp * &qq).sqrt();
        worst = worst.max(&(ctx.real(&moments - &quad).abs() / scale));
    }
    Ok((worst, decimal_tolerance(20, prec)))
}

fn attempt<F: FnOnce() -> Result<(Real, Real)>>(f: F) -> Result<(Real, Real)> {
    f()
}

trait PowF64 {
    fn pow_ref_f64(&self, e: f64) -> Real;
}

impl PowF64 for Real {
    fn pow_ref_f64(&self, e: f64) -> Real {
        let prec = self.prec();
        let exponent = real(prec, e);
        real(prec, Pow::pow(self, &exponent))
    }
}
