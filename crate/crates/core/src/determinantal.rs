//! The linear system M a = b whose solution gives the coefficients of
//! L̂_{2,n} in the shifted basis, its two determinantal solutions, and
//! Gram–Schmidt on the flag as a third route.

use rug::ops::Pow;

use crate::basis::{exponents, flag_element_shifted, ShiftedPoly};
use crate::classical::{closed_form_leading, ParameterContext};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::moments::{fill_table, MomentTable};
use crate::numerics::{real, ulps, Real};

/// Smallest table that [`build_matrix`] and the Gram–Schmidt inner products
/// need for degree `n`: i ≤ 2⌈n/2⌉, j ≤ 2⌊n/2⌋, never below 2.
pub fn required_extent(n: usize) -> (usize, usize) {
    let (up, down) = exponents(n);
    ((2 * up).max(2), (2 * down).max(2))
}

/// M, b = (0, …, 0, K_n) and the data they were built from.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    n: usize,
    m: Matrix,
    b: Vec<Real>,
    k_n: Real,
    ctx: ParameterContext,
}

impl MomentMatrix {
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn rhs(&self) -> &[Real] {
        &self.b
    }

    pub fn k_n(&self) -> &Real {
        &self.k_n
    }

    pub fn context(&self) -> &ParameterContext {
        &self.ctx
    }

    /// Same matrix with a different nonzero K_n.
    pub fn with_k_n(&self, k_n: Real) -> Result<MomentMatrix> {
        if k_n.is_zero() || !k_n.is_finite() {
            return Err(Error::Domain("K_n must be finite and nonzero".into()));
        }
        let mut out = self.clone();
        out.k_n = self.ctx.real(&k_n);
        out.b[self.n] = out.k_n.clone();
        Ok(out)
    }

    pub fn determinant(&self) -> Result<Real> {
        linalg::determinant(&self.m)
    }

    pub fn max_abs_entry(&self) -> Real {
        self.m
            .iter()
            .flatten()
            .fold(self.ctx.real(0), |acc, x| acc.max(&self.ctx.real(x.abs_ref())))
    }
}

/// Row l+1 of M for the moment rows (l ≥ 2), as a function of column k.
fn moment_row_entry(l: usize, k: usize, table: &MomentTable, ctx: &ParameterContext) -> Result<Real> {
    let (ku, kd) = exponents(k);
    let mu = |i: usize, j: usize| table.get(i, j).cloned();
    match l {
        // ⟨B_k, v_2⟩ = ½μ[k̄+1][ǩ+1] + μ[k̄+1][ǩ] − βμ[k̄][ǩ]
        2 => {
            let half = ctx.real(mu(ku + 1, kd + 1)? / 2u32);
            let beta_term = ctx.real(ctx.beta() * &mu(ku, kd)?);
            Ok(half + mu(ku + 1, kd)? - beta_term)
        }
        // ⟨B_k, v_3⟩ = μ[k̄+2][ǩ+1] + μ[k̄+2][ǩ]
        3 => Ok(ctx.real(mu(ku + 2, kd + 1)? + mu(ku + 2, kd)?)),
        // ⟨B_k, B_l⟩ = μ[k̄+l̄][ǩ+ľ]
        _ => {
            let (lu, ld) = exponents(l);
            mu(ku + lu, kd + ld)
        }
    }
}

/// Builds M and b with K_n = 1.
///
/// Rows 1 and 2 are the exceptional conditions ξ p′(ξ) + α p(ξ) = 0 at
/// ξ = r, s applied to B_0..B_n; row l+1 (2 ≤ l ≤ n−1) is orthogonality
/// against v_l; the last row is ⟨·, v_n⟩ = K_n.
pub fn build_matrix(n: usize, table: &MomentTable, ctx: &ParameterContext) -> Result<MomentMatrix> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "exceptional polynomials start at degree 2, got {n}"
        )));
    }
    let (alpha, r, s) = (ctx.alpha(), ctx.r(), ctx.s());
    let size = n + 1;
    let zero = || ctx.real(0);
    let s_minus_r = ctx.real(s - r);

    let mut row1 = vec![zero(); size];
    row1[0] = alpha.clone();
    row1[1] = r.clone();
    row1[2] = ctx.real(r * &s_minus_r) * -1i32;

    let mut row2 = vec![zero(); size];
    row2[0] = alpha.clone();
    row2[1] = ctx.real(s + ctx.real(alpha * &s_minus_r));
    row2[2] = ctx.real(s * &s_minus_r);
    if size > 3 {
        row2[3] = ctx.real(s * ctx.real(s_minus_r.square_ref()));
    }

    let mut m = vec![row1, row2];
    for l in 2..=n {
        let row = (0..size)
            .map(|k| moment_row_entry(l, k, table, ctx))
            .collect::<Result<Vec<_>>>()?;
        m.push(row);
    }
    let mut b = vec![zero(); size];
    b[n] = ctx.real(1);
    Ok(MomentMatrix {
        n,
        m,
        b,
        k_n: ctx.real(1),
        ctx: ctx.clone(),
    })
}

/// [`build_matrix`] on a freshly filled table of the required size.
pub fn moment_matrix(n: usize, ctx: &ParameterContext) -> Result<MomentMatrix> {
    let (imax, jmax) = required_extent(n);
    let table = fill_table(ctx, imax, jmax)?;
    build_matrix(n, &table, ctx)
}

/// Extra bits carried through determinants and solves. The first two rows
/// are exact constraints, and without these bits the ill-conditioning of the
/// moment rows leaks into how well the solution satisfies them.
const SOLVE_GUARD: u32 = 64;

fn widen(rows: &[Vec<Real>], prec: u32) -> Matrix {
    rows.iter().map(|row| row.iter().map(|x| real(prec + SOLVE_GUARD, x)).collect()).collect()
}

fn widen_vec(v: &[Real], prec: u32) -> Vec<Real> {
    v.iter().map(|x| real(prec + SOLVE_GUARD, x)).collect()
}

fn nonsingular_determinant(mm: &MomentMatrix) -> Result<Real> {
    let det = linalg::determinant(&widen(&mm.m, mm.ctx.precision()))?;
    if linalg::numerically_singular(&real(mm.ctx.precision(), &det), &mm.m) {
        return Err(Error::Singular(format!(
            "moment matrix for n = {} is singular at {} bits (det = {:e})",
            mm.n,
            mm.ctx.precision(),
            det.to_f64()
        )));
    }
    Ok(det)
}

/// a_k = det(M_k) / det(M), with M_k having column k replaced by b.
pub fn cramer_coefficients(mm: &MomentMatrix) -> Result<Vec<Real>> {
    let det = nonsingular_determinant(mm)?;
    let prec = mm.ctx.precision();
    let (m, b) = (widen(&mm.m, prec), widen_vec(&mm.b, prec));
    (0..=mm.n)
        .map(|k| Ok(real(prec, linalg::determinant(&linalg::replace_column(&m, k, &b))? / &det)))
        .collect()
}

/// a from elimination on M a = b.
pub fn elimination_coefficients(mm: &MomentMatrix) -> Result<Vec<Real>> {
    nonsingular_determinant(mm)?;
    let prec = mm.ctx.precision();
    let x = linalg::solve(&widen(&mm.m, prec), &widen_vec(&mm.b, prec))?;
    Ok(x.iter().map(|v| real(prec, v)).collect())
}

/// Σ det(M_k)/det(M) B_k. Cramer and elimination are both run and must
/// agree to half the working precision; disagreement is reported as a
/// singularity because it means the precision is exhausted.
pub fn solve_representation_a(mm: &MomentMatrix) -> Result<ShiftedPoly> {
    let cramer = cramer_coefficients(mm)?;
    let eliminated = elimination_coefficients(mm)?;
    let prec = mm.ctx.precision();
    let scale = cramer
        .iter()
        .fold(real(prec, 0), |acc, a| acc.max(&real(prec, a.abs_ref())));
    let tolerance = ulps(prec as i32 / 2, prec) * scale;
    for (k, (a, e)) in cramer.iter().zip(&eliminated).enumerate() {
        if real(prec, a - e).abs() > tolerance {
            return Err(Error::Singular(format!(
                "Cramer and elimination disagree on a_{k} for n = {}",
                mm.n
            )));
        }
    }
    Ok(ShiftedPoly::new(cramer, &mm.ctx))
}

/// log2(|det M| / (2^(−prec/2) · max|M_ij|^(n+1))); positive when the
/// determinant clears that floor.
pub fn determinant_floor_margin(mm: &MomentMatrix) -> Result<f64> {
    let prec = mm.ctx.precision();
    let det = mm.determinant()?.abs();
    let floor = ulps(prec as i32 / 2, prec) * mm.max_abs_entry().pow((mm.n + 1) as u32);
    Ok(det.log2().to_f64() - floor.log2().to_f64())
}

/// Coefficients of the bordered determinant with the first n rows of M and
/// the last row (B_0(x), …, B_n(x)), expanded along that last row:
/// c_k = (−1)^(n+k) det(M without row n and column k) = det(M_k) / K_n.
pub fn solve_representation_b(mm: &MomentMatrix) -> Result<ShiftedPoly> {
    nonsingular_determinant(mm)?;
    let n = mm.n;
    let prec = mm.ctx.precision();
    let m = widen(&mm.m, prec);
    let coefficients = (0..=n)
        .map(|k| {
            let minor = real(prec, linalg::determinant(&linalg::minor(&m, n, k))?);
            Ok(if (n + k) % 2 == 1 { -minor } else { minor })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShiftedPoly::new(coefficients, &mm.ctx))
}

/// The bordered determinant evaluated directly at x, for checking the
/// cofactor expansion.
pub fn bordered_determinant(mm: &MomentMatrix, x: &Real) -> Result<Real> {
    let ctx = &mm.ctx;
    let xr = ctx.real(x - ctx.r());
    let xs = ctx.real(x - ctx.s());
    let last: Vec<Real> = (0..=mm.n)
        .map(|k| {
            let (up, down) = exponents(k);
            ctx.real(xr.clone().pow(up as u32) * xs.clone().pow(down as u32))
        })
        .collect();
    let mut bordered = mm.m[..mm.n].to_vec();
    bordered.push(last);
    linalg::determinant(&bordered)
}

/// ⟨p, q⟩ = Σ_j Σ_k p_j q_k μ[j̄+k̄][ǰ+ǩ] for shifted coefficient vectors.
pub fn moment_inner_product(p: &[Real], q: &[Real], table: &MomentTable) -> Result<Real> {
    let ctx = table.context();
    let mut sum = ctx.real(0);
    for (j, pj) in p.iter().enumerate() {
        if pj.is_zero() {
            continue;
        }
        let (ju, jd) = exponents(j);
        let mut row = ctx.real(0);
        for (k, qk) in q.iter().enumerate() {
            if qk.is_zero() {
                continue;
            }
            let (ku, kd) = exponents(k);
            row += ctx.real(qk * table.get(ju + ku, jd + kd)?);
        }
        sum += ctx.real(pj * &row);
    }
    Ok(sum)
}

fn axpy(y: &mut [Real], a: &Real, x: &[Real]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi -= Real::with_val(yi.prec(), a * xi);
    }
}

/// Gram–Schmidt on v_2, …, v_n under the moment inner product. Element
/// l−2 of the result has degree l and is orthogonal to all earlier ones.
/// Classical Gram–Schmidt with one re-orthogonalization pass.
pub fn gram_schmidt_sequence(n: usize, table: &MomentTable, ctx: &ParameterContext) -> Result<Vec<ShiftedPoly>> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "exceptional polynomials start at degree 2, got {n}"
        )));
    }
    let prec = ctx.precision();
    let mut basis: Vec<(Vec<Real>, Real)> = Vec::new();
    let mut out = Vec::new();
    for l in 2..=n {
        let v = flag_element_shifted(l, ctx)?;
        let mut u: Vec<Real> = v.coefficients().to_vec();
        u.resize(l + 1, ctx.real(0));
        let original = moment_inner_product(&u, &u, table)?;
        for _pass in 0..2 {
            let projections = basis
                .iter()
                .map(|(q, qq)| Ok(moment_inner_product(&u, q, table)? / qq))
                .collect::<Result<Vec<_>>>()?;
            for ((q, _), c) in basis.iter().zip(&projections) {
                axpy(&mut u, c, q);
            }
        }
        let norm = moment_inner_product(&u, &u, table)?;
        if norm <= 0 || norm <= ulps(16, prec) * original.clone().abs() {
            return Err(Error::Degenerate(l));
        }
        out.push(ShiftedPoly::new(u.clone(), ctx));
        basis.push((u, norm));
    }
    Ok(out)
}

/// The degree-n Gram–Schmidt element, scaled to the closed-form leading
/// coefficient.
pub fn gram_schmidt_flag(n: usize, table: &MomentTable, ctx: &ParameterContext) -> Result<ShiftedPoly> {
    let last = gram_schmidt_sequence(n, table, ctx)?
        .pop()
        .expect("sequence has n−1 ≥ 1 elements");
    normalize(&last, n)
}

/// Rescales so the leading coefficient matches the closed form's.
pub fn normalize(p: &ShiftedPoly, n: usize) -> Result<ShiftedPoly> {
    p.with_leading(&closed_form_leading(n, p.context())?)
}

/// The four ways of producing L̂_{2,n}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    DetA,
    DetB,
    GramSchmidt,
    ClosedForm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::DetA, Method::DetB, Method::GramSchmidt, Method::ClosedForm];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::DetA => "det-a",
            Method::DetB => "det-b",
            Method::GramSchmidt => "gram-schmidt",
            Method::ClosedForm => "closed-form",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// L̂_{2,n} by `method` in shifted coordinates. Unnormalized outputs keep
/// each method's natural scale: K_n = 1 for the determinants, the raw
/// Gram–Schmidt vector, and the closed form as is.
pub fn construct(
    method: Method,
    n: usize,
    table: &MomentTable,
    ctx: &ParameterContext,
    normalized: bool,
) -> Result<ShiftedPoly> {
    let raw = match method {
        Method::DetA => solve_representation_a(&build_matrix(n, table, ctx)?)?,
        Method::DetB => solve_representation_b(&build_matrix(n, table, ctx)?)?,
        Method::GramSchmidt => gram_schmidt_sequence(n, table, ctx)?
            .pop()
            .expect("sequence has n−1 ≥ 1 elements"),
        Method::ClosedForm => crate::basis::from_monomial(&crate::classical::closed_form_xop(n, ctx)?, ctx),
    };
    if normalized {
        normalize(&raw, n)
    } else {
        Ok(raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::from_monomial;
    use crate::classical::closed_form_xop;
    use crate::numerics::decimal_tolerance;

    const P: u32 = 256;

    fn ctx(alpha: f64) -> ParameterContext {
        ParameterContext::from_f64(alpha, P).unwrap()
    }

    /// max_k |a_k − b_k| / max_k |b_k|.
    fn deviation(a: &[Real], b: &[Real]) -> Real {
        let len = a.len().max(b.len());
        let at = |v: &[Real], k: usize| v.get(k).cloned().unwrap_or_else(|| real(P, 0));
        let scale = (0..len).fold(real(P, 0), |m, k| m.max(&at(b, k).abs()));
        let diff = (0..len).fold(real(P, 0), |m, k| m.max(&real(P, at(a, k) - at(b, k)).abs()));
        diff / scale
    }

    fn as_f64(row: &[Real]) -> Vec<f64> {
        row.iter().map(Real::to_f64).collect()
    }

    #[test]
    fn extent_covers_matrix() {
        assert_eq!(required_extent(2), (2, 2));
        assert_eq!(required_extent(3), (4, 2));
        assert_eq!(required_extent(8), (8, 8));
        for n in 2..=10 {
            let (imax, jmax) = required_extent(n);
            let c = ctx(1.0);
            let table = fill_table(&c, imax, jmax).unwrap();
            assert!(build_matrix(n, &table, &c).is_ok(), "n = {n}");
            assert!(gram_schmidt_sequence(n, &table, &c).is_ok(), "n = {n}");
        }
    }

    #[test]
    fn constraint_rows_at_alpha_three() {
        let mm = moment_matrix(3, &ctx(3.0)).unwrap();
        assert_eq!(as_f64(&mm.matrix()[0]), [3.0, -6.0, 24.0, 0.0]);
        assert_eq!(as_f64(&mm.matrix()[1]), [3.0, 10.0, -8.0, -32.0]);
        assert_eq!(as_f64(mm.rhs()), [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn entry_three_one() {
        let c = ctx(1.0);
        let table = fill_table(&c, 2, 2).unwrap();
        let mm = build_matrix(2, &table, &c).unwrap();
        let mu = |i, j| table.get(i, j).unwrap().clone();
        let want = mu(1, 1) / 2u32 + mu(1, 0) - real(P, c.beta() * &mu(0, 0));
        assert_eq!(mm.matrix()[2][0], want);
    }

    #[test]
    fn short_table_is_a_coverage_error() {
        let c = ctx(1.0);
        let table = fill_table(&c, 3, 2).unwrap();
        assert_eq!(build_matrix(3, &table, &c).unwrap_err(), Error::Coverage { i: 4, j: 2 });
        assert!(build_matrix(1, &table, &c).is_err());
    }

    #[test]
    fn representation_a_solves_system() {
        for alpha in [0.5, 1.0, 3.0] {
            for n in 2..=8 {
                let mm = moment_matrix(n, &ctx(alpha)).unwrap();
                let a = solve_representation_a(&mm).unwrap();
                let residual = linalg::mat_vec(mm.matrix(), a.coefficients());
                for (got, want) in residual.iter().zip(mm.rhs()) {
                    assert!(real(P, got - want).abs() <= ulps(48, P), "alpha = {alpha}, n = {n}");
                }
            }
        }
    }

    #[test]
    fn cramer_matches_elimination() {
        let mm = moment_matrix(7, &ctx(0.5)).unwrap();
        let a = cramer_coefficients(&mm).unwrap();
        let e = elimination_coefficients(&mm).unwrap();
        assert!(deviation(&a, &e) <= ulps(64, P));
    }

    #[test]
    fn representation_a_matches_closed_form() {
        let c = ctx(1.0);
        let a = normalize(&solve_representation_a(&moment_matrix(5, &c).unwrap()).unwrap(), 5).unwrap();
        let oracle = closed_form_xop(5, &c).unwrap();
        let got = a.to_monomial();
        assert!(deviation(got.coefficients(), oracle.coefficients()) <= decimal_tolerance(25, P));
    }

    #[test]
    fn degree_two_is_v2() {
        for alpha in [0.5, 1.0, 3.0] {
            let c = ctx(alpha);
            let v2 = flag_element_shifted(2, &c).unwrap();
            let mm = moment_matrix(2, &c).unwrap();
            for p in [solve_representation_a(&mm).unwrap(), solve_representation_b(&mm).unwrap()] {
                let scaled = p.with_leading(&real(P, 0.5)).unwrap();
                assert!(deviation(scaled.coefficients(), v2.coefficients()) <= ulps(48, P));
            }
        }
    }

    #[test]
    fn representation_ratio_is_det_over_k() {
        for alpha in [0.5, 3.0] {
            for n in 2..=8 {
                let mm = moment_matrix(n, &ctx(alpha)).unwrap();
                let a = solve_representation_a(&mm).unwrap();
                let b = solve_representation_b(&mm).unwrap();
                let ratio = mm.determinant().unwrap() / mm.k_n();
                let scaled = a.scale(&ratio);
                assert!(deviation(b.coefficients(), scaled.coefficients()) <= ulps(64, P), "n = {n}");
            }
        }
    }

    #[test]
    fn cofactor_expansion_matches_bordered_determinant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [2, 3, 6] {
            let c = ctx(1.0);
            let mm = moment_matrix(n, &c).unwrap();
            let poly = solve_representation_b(&mm).unwrap().to_monomial();
            for _ in 0..3 {
                let x = real(P, rng.gen_range(-5.0..10.0));
                let direct = bordered_determinant(&mm, &x).unwrap();
                let expanded = poly.evaluate(&x);
                let scale = poly.max_abs_coefficient() * real(P, x.clone().abs() + 10u32).pow(n as u32);
                assert!(real(P, &direct - &expanded).abs() <= ulps(64, P) * scale, "n = {n}");
            }
        }
    }

    #[test]
    fn k_n_scales_solution() {
        let mm = moment_matrix(4, &ctx(1.0)).unwrap();
        let a = solve_representation_a(&mm).unwrap();
        let scaled = solve_representation_a(&mm.with_k_n(real(P, 3)).unwrap()).unwrap();
        let want = a.scale(&real(P, 3));
        assert!(deviation(scaled.coefficients(), want.coefficients()) <= ulps(16, P));
        assert_eq!(normalize(&a, 4).unwrap().coefficients().len(), 5);
        assert!(mm.with_k_n(real(P, 0)).is_err());
    }

    #[test]
    fn determinant_clears_spec_floor() {
        // |det M| > 2^(−prec/2) (max entry)^(n+1); past n = 5 this floor is
        // not met at 256 bits, see `verify` for the full sweep
        for alpha in [0.5, 1.0, 3.0, 3.7] {
            for n in 2..=5 {
                let mm = moment_matrix(n, &ctx(alpha)).unwrap();
                assert!(determinant_floor_margin(&mm).unwrap() > 0.0, "alpha = {alpha}, n = {n}");
            }
        }
    }

    #[test]
    fn matrices_are_nonsingular_through_degree_ten() {
        for alpha in [0.5, 1.0, 3.0, 3.7] {
            for n in 2..=10 {
                let mm = moment_matrix(n, &ctx(alpha)).unwrap();
                let det = mm.determinant().unwrap();
                assert!(!linalg::numerically_singular(&det, mm.matrix()), "alpha = {alpha}, n = {n}");
            }
        }
    }

    #[test]
    fn gram_schmidt_starts_with_v2_and_is_orthogonal() {
        let c = ctx(1.0);
        let table = fill_table(&c, 8, 8).unwrap();
        let seq = gram_schmidt_sequence(8, &table, &c).unwrap();
        assert_eq!(seq[0], flag_element_shifted(2, &c).unwrap());
        for m in 0..seq.len() {
            for k in m + 1..seq.len() {
                let (p, q) = (seq[m].coefficients(), seq[k].coefficients());
                let cross = moment_inner_product(p, q, &table).unwrap().abs();
                let norms = (moment_inner_product(p, p, &table).unwrap()
                    * moment_inner_product(q, q, &table).unwrap())
                .sqrt();
                assert!(cross / norms <= decimal_tolerance(25, P));
            }
        }
    }

    #[test]
    fn gram_schmidt_matches_representation_a() {
        let c = ctx(1.0);
        let table = fill_table(&c, 4, 4).unwrap();
        let gs = gram_schmidt_flag(4, &table, &c).unwrap();
        let a = normalize(&solve_representation_a(&build_matrix(4, &table, &c).unwrap()).unwrap(), 4).unwrap();
        assert!(deviation(gs.coefficients(), a.coefficients()) <= decimal_tolerance(25, P));
    }

    #[test]
    fn closed_form_in_shifted_basis_satisfies_system() {
        // the oracle, rescaled so ⟨p, v_n⟩ = 1, solves M a = b
        let c = ctx(3.0);
        let n = 6;
        let mm = moment_matrix(n, &c).unwrap();
        let p = from_monomial(&closed_form_xop(n, &c).unwrap(), &c);
        let image = linalg::mat_vec(mm.matrix(), p.coefficients());
        let last = image[n].clone();
        for v in &image[..n] {
            assert!(v.clone().abs() <= decimal_tolerance(25, P) * last.clone().abs());
        }
    }
}
