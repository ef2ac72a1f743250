//! Adjusted moments mu[i][j] = ∫ (x−r)^i (x−s)^j Ŵ(x) dx of the X₂ weight
//! Ŵ(x) = x^α e^(−x) / (L_2^(α−1)(−x))².
//!
//! A [`MomentTable`] is filled from three closed-form seeds using only the
//! three-term and the two four-term recursions; quadrature is kept as an
//! independent cross-check.

use std::fmt;

use rug::ops::Pow;

use crate::classical::ParameterContext;
use crate::error::{Error, Result};
use crate::numerics::{
    ensure_finite, gamma, integrate_adjusted, relative_difference, upper_incomplete_gamma,
    QuadratureRule, Real,
};

/// How a table entry was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Initial,
    ThreeTerm,
    FourTermA,
    FourTermB,
    Quadrature,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Initial => "initial",
            Provenance::ThreeTerm => "three_term",
            Provenance::FourTermA => "four_term_a",
            Provenance::FourTermB => "four_term_b",
            Provenance::Quadrature => "quadrature",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// mu[2][2], mu[1][2], mu[2][1] in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialMoments {
    pub mu22: Real,
    pub mu12: Real,
    pub mu21: Real,
}

/// mu[2][2] = 4Γ(1+α),
/// mu[1][2] = 4 e^(−r) (−r)^α Γ(1+α) Γ(−α, −r),
/// mu[2][1] = 4 e^(−s) (−s)^α Γ(1+α) Γ(−α, −s).
pub fn initial_moments(ctx: &ParameterContext) -> Result<InitialMoments> {
    let alpha = ctx.alpha();
    let gamma_shifted = gamma(&ctx.real(alpha + 1u32))?;
    let mu22 = ctx.real(&gamma_shifted * 4u32);

    let one_sided = |root: &Real| -> Result<Real> {
        let minus_root = ctx.real(-root);
        let minus_alpha = ctx.real(-alpha);
        let tail = upper_incomplete_gamma(&minus_alpha, &minus_root)?;
        let power = ctx.real((&minus_root).pow(alpha));
        let value = minus_root.exp() * power * &mu22 * tail;
        ensure_finite(value, "initial moment")
    };
    Ok(InitialMoments {
        mu12: one_sided(ctx.r())?,
        mu21: one_sided(ctx.s())?,
        mu22,
    })
}

/// mu[i+1][j] = mu[i][j+1] + 2β mu[i][j], from (x−r) = (x−s) + 2β.
pub mod three_term {
    use super::*;

    /// mu[i+1][j] from mu[i][j] and mu[i][j+1].
    pub fn forward(mu_ij: &Real, mu_i_jp1: &Real, ctx: &ParameterContext) -> Real {
        ctx.real(mu_i_jp1 + ctx.real(ctx.beta() * 2u32) * mu_ij)
    }

    /// mu[i][j+1] from mu[i+1][j] and mu[i][j].
    pub fn solve_right(mu_ip1_j: &Real, mu_ij: &Real, ctx: &ParameterContext) -> Real {
        ctx.real(mu_ip1_j - ctx.real(ctx.beta() * 2u32) * mu_ij)
    }

    /// mu[i][j] = (mu[i+1][j] − mu[i][j+1]) / (2β).
    pub fn solve_base(mu_ip1_j: &Real, mu_i_jp1: &Real, ctx: &ParameterContext) -> Real {
        ctx.real(mu_ip1_j - mu_i_jp1) / ctx.real(ctx.beta() * 2u32)
    }
}

/// Which of the two four-term recursions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourTermKind {
    /// Walks down column j: mu[i+1][j], mu[i][j], mu[i−1][j] → mu[i+1][j+1].
    A,
    /// Walks along row i: mu[i][j+1], mu[i][j], mu[i][j−1] → mu[i+1][j+1].
    B,
}

/// target = lead·m_lead + mid·m_mid + trail·m_trail for one (i, j).
///
/// For kind A the three inputs are mu[i+1][j], mu[i][j], mu[i−1][j]; for
/// kind B they are mu[i][j+1], mu[i][j], mu[i][j−1]. The target is always
/// mu[i+1][j+1].
#[derive(Debug, Clone)]
pub struct FourTerm {
    pub kind: FourTermKind,
    pub i: usize,
    pub j: usize,
    pub lead: Real,
    pub mid: Real,
    pub trail: Real,
}

impl FourTerm {
    /// Coefficients of the first recursion:
    /// lead  = i+j−1+2α+β,
    /// mid   = (1−i−j)(α+1) + (3−3i−j−4α)β,
    /// trail = (2i−4)(α+1)(β+1).
    pub fn a(i: usize, j: usize, ctx: &ParameterContext) -> FourTerm {
        let (alpha, beta) = (ctx.alpha(), ctx.beta());
        let (fi, fj) = (i as i64, j as i64);
        let a1 = ctx.real(alpha + 1u32);
        let lead = ctx.real(alpha * 2u32) + beta + (fi + fj - 1);
        let mid = ctx.real(&a1 * (1 - fi - fj))
            + ctx.real(ctx.real(alpha * -4i32) + (3 - 3 * fi - fj)) * beta;
        let trail = ctx.real(&a1 * (2 * fi - 4)) * ctx.real(beta + 1u32);
        FourTerm {
            kind: FourTermKind::A,
            i,
            j,
            lead,
            mid,
            trail,
        }
    }

    /// Coefficients of the second recursion:
    /// lead  = i+j−1+2α−β,
    /// mid   = (1−i−j)(α+1) + (−3+i+3j+4α)β,
    /// trail = (4−2j)(α+1)(β−1).
    pub fn b(i: usize, j: usize, ctx: &ParameterContext) -> FourTerm {
        let (alpha, beta) = (ctx.alpha(), ctx.beta());
        let (fi, fj) = (i as i64, j as i64);
        let a1 = ctx.real(alpha + 1u32);
        let lead = ctx.real(alpha * 2u32) - beta + (fi + fj - 1);
        let mid = ctx.real(&a1 * (1 - fi - fj))
            + ctx.real(ctx.real(alpha * 4u32) + (-3 + fi + 3 * fj)) * beta;
        let trail = ctx.real(&a1 * (4 - 2 * fj)) * ctx.real(beta - 1u32);
        FourTerm {
            kind: FourTermKind::B,
            i,
            j,
            lead,
            mid,
            trail,
        }
    }

    pub fn of_kind(kind: FourTermKind, i: usize, j: usize, ctx: &ParameterContext) -> FourTerm {
        match kind {
            FourTermKind::A => FourTerm::a(i, j, ctx),
            FourTermKind::B => FourTerm::b(i, j, ctx),
        }
    }

    /// Table positions of (lead, mid, trail) inputs. `None` where an index
    /// would go negative.
    pub fn inputs(&self) -> [Option<(usize, usize)>; 3] {
        let (i, j) = (self.i, self.j);
        match self.kind {
            FourTermKind::A => [Some((i + 1, j)), Some((i, j)), i.checked_sub(1).map(|im| (im, j))],
            FourTermKind::B => [Some((i, j + 1)), Some((i, j)), j.checked_sub(1).map(|jm| (i, jm))],
        }
    }

    pub fn target(&self) -> (usize, usize) {
        (self.i + 1, self.j + 1)
    }

    pub fn forward(&self, lead: &Real, mid: &Real, trail: &Real) -> Real {
        let prec = lead.prec();
        let sum = Real::with_val(prec, &self.lead * lead) + Real::with_val(prec, &self.mid * mid);
        sum + Real::with_val(prec, &self.trail * trail)
    }

    /// The trailing input from the target and the other two.
    pub fn solve_trail(&self, target: &Real, lead: &Real, mid: &Real) -> Result<Real> {
        self.solve(&self.trail, "trail", target, [(&self.lead, lead), (&self.mid, mid)])
    }

    /// The leading input from the target and the other two.
    pub fn solve_lead(&self, target: &Real, mid: &Real, trail: &Real) -> Result<Real> {
        self.solve(&self.lead, "lead", target, [(&self.mid, mid), (&self.trail, trail)])
    }

    fn solve(
        &self,
        coefficient: &Real,
        slot: &str,
        target: &Real,
        known: [(&Real, &Real); 2],
    ) -> Result<Real> {
        let prec = target.prec();
        let scale = self
            .lead
            .clone()
            .abs()
            .max(&self.mid.clone().abs())
            .max(&self.trail.clone().abs());
        let threshold = crate::numerics::ulps(16, prec) * scale;
        if coefficient.clone().abs() <= threshold {
            return Err(Error::SingularCoefficient(format!(
                "four-term recursion {:?} at (i, j) = ({}, {}) cannot be solved for its {slot} term",
                self.kind, self.i, self.j
            )));
        }
        let mut rest = target.clone();
        for (c, v) in known {
            rest -= Real::with_val(prec, c * v);
        }
        Ok(rest / coefficient)
    }
}

/// Fill order for [`fill_table_with`]. Both produce the same numbers up to
/// rounding; the swapped order exists as an alternate path for checking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FillOrder {
    /// New anti-diagonals are seeded with recursion A, then closed with the
    /// three-term recursion walking from the seed towards row 0 first.
    Standard,
    /// Seeds with recursion B and closes towards column 0 first.
    Swapped,
}

/// The rectangular array mu[i][j], 0 ≤ i ≤ imax, 0 ≤ j ≤ jmax.
#[derive(Debug, Clone)]
pub struct MomentTable {
    ctx: ParameterContext,
    imax: usize,
    jmax: usize,
    values: Vec<Option<Real>>,
    provenance: Vec<Option<Provenance>>,
}

impl MomentTable {
    fn empty(ctx: &ParameterContext, imax: usize, jmax: usize) -> Self {
        let len = (imax + 1) * (jmax + 1);
        MomentTable {
            ctx: ctx.clone(),
            imax,
            jmax,
            values: vec![None; len],
            provenance: vec![None; len],
        }
    }

    pub fn context(&self) -> &ParameterContext {
        &self.ctx
    }

    pub fn imax(&self) -> usize {
        self.imax
    }

    pub fn jmax(&self) -> usize {
        self.jmax
    }

    pub fn covers(&self, i: usize, j: usize) -> bool {
        i <= self.imax && j <= self.jmax && self.values[self.index(i, j)].is_some()
    }

    pub fn get(&self, i: usize, j: usize) -> Result<&Real> {
        if i > self.imax || j > self.jmax {
            return Err(Error::Coverage { i, j });
        }
        self.values[self.index(i, j)]
            .as_ref()
            .ok_or(Error::Coverage { i, j })
    }

    pub fn provenance(&self, i: usize, j: usize) -> Option<Provenance> {
        if i > self.imax || j > self.jmax {
            return None;
        }
        self.provenance[self.index(i, j)]
    }

    /// Every populated entry in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Real, Provenance)> {
        (0..=self.imax).flat_map(move |i| {
            (0..=self.jmax).filter_map(move |j| {
                let k = self.index(i, j);
                match (&self.values[k], self.provenance[k]) {
                    (Some(v), Some(p)) => Some((i, j, v, p)),
                    _ => None,
                }
            })
        })
    }

    fn index(&self, i: usize, j: usize) -> usize {
        i * (self.jmax + 1) + j
    }

    fn set(&mut self, i: usize, j: usize, value: Real, how: Provenance) -> Result<()> {
        if i > self.imax || j > self.jmax {
            return Ok(());
        }
        let value = ensure_finite(value, "moment table entry")?;
        let k = self.index(i, j);
        self.values[k] = Some(value);
        self.provenance[k] = Some(how);
        Ok(())
    }

    fn value(&self, cell: (usize, usize)) -> Result<&Real> {
        self.get(cell.0, cell.1)
    }

    /// Largest |mu[i+1][j] − mu[i][j+1] − 2β mu[i][j]| / |mu[i+1][j]| over
    /// all triples inside the table.
    pub fn three_term_residual(&self) -> Result<Real> {
        let mut worst = self.ctx.real(0);
        for i in 0..self.imax {
            for j in 0..self.jmax {
                let lhs = self.get(i + 1, j)?;
                let rhs = three_term::forward(self.get(i, j)?, self.get(i, j + 1)?, &self.ctx);
                worst = worst.max(&relative_difference(&rhs, lhs));
            }
        }
        Ok(worst)
    }

    /// Largest relative disagreement between the two four-term recursions
    /// wherever both produce the same target from cells in the table.
    pub fn four_term_disagreement(&self) -> Result<Real> {
        let mut worst = self.ctx.real(0);
        for i in 1..self.imax {
            for j in 1..self.jmax {
                let a = evaluate_forward(self, &FourTerm::a(i, j, &self.ctx))?;
                let b = evaluate_forward(self, &FourTerm::b(i, j, &self.ctx))?;
                worst = worst.max(&relative_difference(&a, &b));
            }
        }
        Ok(worst)
    }

    /// Largest relative deviation of each four-term recursion from the
    /// stored target, over every (i, j) where the recursion fits.
    pub fn four_term_residual(&self, kind: FourTermKind) -> Result<Real> {
        let mut worst = self.ctx.real(0);
        for i in 1..self.imax {
            for j in 0..self.jmax {
                if kind == FourTermKind::B && j == 0 {
                    continue;
                }
                let relation = FourTerm::of_kind(kind, i, j, &self.ctx);
                let predicted = evaluate_forward(self, &relation)?;
                let (ti, tj) = relation.target();
                worst = worst.max(&relative_difference(&predicted, self.get(ti, tj)?));
            }
        }
        Ok(worst)
    }

    /// Largest relative difference to another table over the common range.
    pub fn max_relative_difference(&self, other: &MomentTable) -> Result<Real> {
        let mut worst = self.ctx.real(0);
        for i in 0..=self.imax.min(other.imax) {
            for j in 0..=self.jmax.min(other.jmax) {
                worst = worst.max(&relative_difference(self.get(i, j)?, other.get(i, j)?));
            }
        }
        Ok(worst)
    }
}

fn evaluate_forward(table: &MomentTable, relation: &FourTerm) -> Result<Real> {
    let [lead, mid, trail] = relation.inputs();
    let missing = || Error::Coverage {
        i: relation.i,
        j: relation.j,
    };
    let lead = table.value(lead.ok_or_else(missing)?)?;
    let mid = table.value(mid.ok_or_else(missing)?)?;
    let trail = table.value(trail.ok_or_else(missing)?)?;
    Ok(relation.forward(lead, mid, trail))
}

/// Fills mu[i][j] for 0 ≤ i ≤ imax, 0 ≤ j ≤ jmax from the three initial
/// moments and the recursions alone.
pub fn fill_table(ctx: &ParameterContext, imax: usize, jmax: usize) -> Result<MomentTable> {
    fill_table_with(ctx, imax, jmax, FillOrder::Standard)
}

/// Schedule:
/// 1. seeds mu[2][2], mu[1][2], mu[2][1];
/// 2. mu[1][1] by the three-term recursion solved for its base;
/// 3. mu[0][1] from recursion A at (1, 1) solved for its trailing term,
///    mu[1][0] from recursion B at (1, 1) likewise;
/// 4. mu[0][0] by the three-term recursion;
/// 5. mu[0][2] and mu[2][0] by the three-term recursion;
/// 6. every further anti-diagonal d = i + j gets one cell from a four-term
///    recursion and the rest from the three-term recursion walking outwards.
pub fn fill_table_with(
    ctx: &ParameterContext,
    imax: usize,
    jmax: usize,
    order: FillOrder,
) -> Result<MomentTable> {
    if imax < 2 || jmax < 2 {
        return Err(Error::Domain(format!(
            "moment table needs imax, jmax ≥ 2, got ({imax}, {jmax})"
        )));
    }
    let mut table = MomentTable::empty(ctx, imax, jmax);
    // Cells (0..=2, 0..=2) are always computed; the table stores only those
    // that fit, and a 3×3 seed block always fits.
    let seeds = initial_moments(ctx)?;
    table.set(2, 2, seeds.mu22.clone(), Provenance::Initial)?;
    table.set(1, 2, seeds.mu12.clone(), Provenance::Initial)?;
    table.set(2, 1, seeds.mu21.clone(), Provenance::Initial)?;

    let mu11 = three_term::solve_base(&seeds.mu21, &seeds.mu12, ctx);
    table.set(1, 1, mu11.clone(), Provenance::ThreeTerm)?;

    let mu01 = FourTerm::a(1, 1, ctx).solve_trail(&seeds.mu22, &seeds.mu21, &mu11)?;
    table.set(0, 1, mu01.clone(), Provenance::FourTermA)?;
    let mu10 = FourTerm::b(1, 1, ctx).solve_trail(&seeds.mu22, &seeds.mu12, &mu11)?;
    table.set(1, 0, mu10.clone(), Provenance::FourTermB)?;

    let mu00 = three_term::solve_base(&mu10, &mu01, ctx);
    table.set(0, 0, mu00, Provenance::ThreeTerm)?;

    // (i, j) = (0, 1): mu[1][1] = mu[0][2] + 2β mu[0][1]
    let mu02 = three_term::solve_right(&mu11, &mu01, ctx);
    table.set(0, 2, mu02, Provenance::ThreeTerm)?;
    // (i, j) = (1, 0): mu[2][0] = mu[1][1] + 2β mu[1][0]
    let mu20 = three_term::forward(&mu10, &mu11, ctx);
    table.set(2, 0, mu20, Provenance::ThreeTerm)?;

    // Anti-diagonals 3 and 4 already hold a cell inside the 3×3 block.
    for d in 3..=imax + jmax {
        let lo = d.saturating_sub(jmax);
        let hi = d.min(imax);
        let known = (lo..=hi).find(|&i| table.covers(i, d - i));
        let seed_row = match known {
            Some(i) => i,
            None => seed_diagonal(&mut table, d, order)?,
        };
        close_diagonal(&mut table, d, seed_row, order)?;
    }
    Ok(table)
}

/// Computes one cell of anti-diagonal `d` from a four-term recursion whose
/// inputs all lie on the two previous (complete) anti-diagonals.
fn seed_diagonal(table: &mut MomentTable, d: usize, order: FillOrder) -> Result<usize> {
    let (imax, jmax) = (table.imax, table.jmax);
    let ctx = table.ctx.clone();
    // Kind A target (p, q) = (i+1, j+1) needs i ≥ 1; kind B needs j ≥ 1.
    let a_target = {
        let p = imax.min(d - 1);
        let q = d - p;
        (p >= 2 && q >= 1 && q <= jmax).then_some((p, q))
    };
    let b_target = {
        let q = jmax.min(d.saturating_sub(2));
        let p = d - q;
        (q >= 2 && p >= 2 && p <= imax).then_some((p, q))
    };
    let choice = match order {
        FillOrder::Standard => a_target.map(|t| (FourTermKind::A, t)).or(b_target.map(|t| (FourTermKind::B, t))),
        FillOrder::Swapped => b_target.map(|t| (FourTermKind::B, t)).or(a_target.map(|t| (FourTermKind::A, t))),
    };
    let Some((kind, (p, q))) = choice else {
        return Err(Error::Domain(format!("no four-term recursion reaches anti-diagonal {d}")));
    };
    let relation = FourTerm::of_kind(kind, p - 1, q - 1, &ctx);
    let value = evaluate_forward(table, &relation)?;
    let how = match kind {
        FourTermKind::A => Provenance::FourTermA,
        FourTermKind::B => Provenance::FourTermB,
    };
    table.set(p, q, value, how)?;
    Ok(p)
}

/// Fills the rest of anti-diagonal `d` from the known cell in row
/// `seed_row`, using the three-term recursion against anti-diagonal d−1.
fn close_diagonal(table: &mut MomentTable, d: usize, seed_row: usize, order: FillOrder) -> Result<()> {
    let ctx = table.ctx.clone();
    let lo = d.saturating_sub(table.jmax);
    let hi = d.min(table.imax);

    let walk_up = |table: &mut MomentTable| -> Result<()> {
        // (p, q) → (p−1, q+1): mu[p−1][q+1] = mu[p][q] − 2β mu[p−1][q]
        for p in (lo + 1..=seed_row).rev() {
            let q = d - p;
            if table.covers(p - 1, q + 1) {
                continue;
            }
            let value = three_term::solve_right(table.get(p, q)?, table.get(p - 1, q)?, &ctx);
            table.set(p - 1, q + 1, value, Provenance::ThreeTerm)?;
        }
        Ok(())
    };
    let walk_down = |table: &mut MomentTable| -> Result<()> {
        // (p, q) → (p+1, q−1): mu[p+1][q−1] = mu[p][q] + 2β mu[p][q−1]
        for p in seed_row..hi {
            let q = d - p;
            if table.covers(p + 1, q - 1) {
                continue;
            }
            let value = three_term::forward(table.get(p, q - 1)?, table.get(p, q)?, &ctx);
            table.set(p + 1, q - 1, value, Provenance::ThreeTerm)?;
        }
        Ok(())
    };
    match order {
        FillOrder::Standard => {
            walk_up(table)?;
            walk_down(table)
        }
        FillOrder::Swapped => {
            walk_down(table)?;
            walk_up(table)
        }
    }
}

/// The same table computed entry by entry with a quadrature rule.
pub fn quadrature_table(
    rule: &QuadratureRule,
    ctx: &ParameterContext,
    imax: usize,
    jmax: usize,
) -> Result<MomentTable> {
    let mut table = MomentTable::empty(ctx, imax, jmax);
    for i in 0..=imax {
        for j in 0..=jmax {
            let value = integrate_adjusted(rule, i, j, ctx)?;
            table.set(i, j, value, Provenance::Quadrature)?;
        }
    }
    Ok(table)
}
