//! Dense square systems at working precision: fraction-free (Bareiss)
//! elimination with partial pivoting, shared by determinants and solves.

use crate::error::{Error, Result};
use crate::numerics::{real, Real};

/// Row-major square matrix.
pub type Matrix = Vec<Vec<Real>>;

fn check_square(m: &[Vec<Real>]) -> Result<usize> {
    let n = m.len();
    if n == 0 {
        return Err(Error::Domain("empty matrix".into()));
    }
    if let Some(row) = m.iter().find(|row| row.len() != n) {
        return Err(Error::Domain(format!(
            "matrix is not square: {n} rows but a row of length {}",
            row.len()
        )));
    }
    Ok(n)
}

fn precision_of(m: &[Vec<Real>]) -> u32 {
    m.iter().flatten().map(Real::prec).max().unwrap_or(crate::numerics::MIN_PRECISION)
}

/// Bareiss elimination of the leading `n` columns of `work` in place, with
/// the extra columns (if any) carried along. Returns the sign of the row
/// permutation, or `None` if a column has no nonzero pivot.
fn bareiss(work: &mut [Vec<Real>], n: usize, prec: u32) -> Option<i32> {
    let width = work[0].len();
    let mut sign = 1;
    let mut previous = real(prec, 1);
    for k in 0..n {
        let pivot_row = (k..n)
            .max_by(|&a, &b| {
                let (x, y) = (work[a][k].clone().abs(), work[b][k].clone().abs());
                x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty range");
        if work[pivot_row][k].is_zero() {
            return None;
        }
        if pivot_row != k {
            work.swap(pivot_row, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..width {
                let lhs = real(prec, &work[k][k] * &work[i][j]);
                let rhs = real(prec, &work[i][k] * &work[k][j]);
                work[i][j] = (lhs - rhs) / &previous;
            }
            work[i][k] = real(prec, 0);
        }
        previous = work[k][k].clone();
    }
    Some(sign)
}

/// det(m). An exactly singular matrix gives zero.
pub fn determinant(m: &[Vec<Real>]) -> Result<Real> {
    let n = check_square(m)?;
    let prec = precision_of(m);
    let mut work: Matrix = m.iter().map(|row| row.iter().map(|x| real(prec, x)).collect()).collect();
    match bareiss(&mut work, n, prec) {
        None => Ok(real(prec, 0)),
        Some(sign) => {
            let det = work[n - 1][n - 1].clone();
            Ok(if sign < 0 { -det } else { det })
        }
    }
}

/// Hadamard's bound Π ‖row‖₂ on |det(m)|.
pub fn hadamard_bound(m: &[Vec<Real>]) -> Real {
    let prec = precision_of(m);
    m.iter().fold(real(prec, 1), |acc, row| {
        let norm = row
            .iter()
            .fold(real(prec, 0), |s, x| s + real(prec, x.square_ref()))
            .sqrt();
        acc * norm
    })
}

/// Hadamard's bound after scaling every column to unit max-norm, scaled
/// back: Π_k max|m_ik| · Π_i ‖row_i / colmax‖₂. Unlike the plain bound it
/// is not fooled by columns of very different magnitude.
pub fn equilibrated_bound(m: &[Vec<Real>]) -> Real {
    let prec = precision_of(m);
    let width = m.first().map_or(0, Vec::len);
    let colmax: Vec<Real> = (0..width)
        .map(|k| m.iter().fold(real(prec, 0), |acc, row| acc.max(&real(prec, row[k].abs_ref()))))
        .collect();
    if colmax.iter().any(Real::is_zero) {
        return real(prec, 0);
    }
    let scaled: Matrix = m
        .iter()
        .map(|row| row.iter().zip(&colmax).map(|(x, c)| real(prec, x / c)).collect())
        .collect();
    colmax.iter().fold(hadamard_bound(&scaled), |acc, c| acc * c)
}

/// True when |det| is within 2^(16−prec) of the column-equilibrated
/// Hadamard bound, i.e. the matrix is indistinguishable from singular at
/// this precision.
pub fn numerically_singular(det: &Real, m: &[Vec<Real>]) -> bool {
    let prec = precision_of(m);
    det.clone().abs() <= crate::numerics::ulps(16, prec) * equilibrated_bound(m)
}

/// Solves m·x = b.
pub fn solve(m: &[Vec<Real>], b: &[Real]) -> Result<Vec<Real>> {
    let n = check_square(m)?;
    if b.len() != n {
        return Err(Error::Domain(format!(
            "right-hand side has length {} for a {n}×{n} matrix",
            b.len()
        )));
    }
    let prec = precision_of(m).max(b.iter().map(Real::prec).max().unwrap_or(0));
    let mut work: Matrix = m
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut row: Vec<Real> = row.iter().map(|x| real(prec, x)).collect();
            row.push(real(prec, rhs));
            row
        })
        .collect();
    let singular = || Error::Singular(format!("{n}×{n} system has no unique solution"));
    bareiss(&mut work, n, prec).ok_or_else(singular)?;
    let mut x = vec![real(prec, 0); n];
    for i in (0..n).rev() {
        let mut acc = work[i][n].clone();
        for j in i + 1..n {
            acc -= real(prec, &work[i][j] * &x[j]);
        }
        x[i] = acc / &work[i][i];
    }
    Ok(x)
}

/// Copy of `m` with column `k` replaced by `b`.
pub fn replace_column(m: &[Vec<Real>], k: usize, b: &[Real]) -> Matrix {
    m.iter()
        .zip(b)
        .map(|(row, v)| {
            let mut row = row.clone();
            row[k] = v.clone();
            row
        })
        .collect()
}

/// `m` without row `i` and column `k`.
pub fn minor(m: &[Vec<Real>], i: usize, k: usize) -> Matrix {
    m.iter()
        .enumerate()
        .filter(|&(row, _)| row != i)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|&(col, _)| col != k)
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect()
}

pub fn mat_vec(m: &[Vec<Real>], x: &[Real]) -> Vec<Real> {
    let prec = precision_of(m);
    m.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(real(prec, 0), |acc, (a, b)| acc + real(prec, a * b))
        })
        .collect()
}
