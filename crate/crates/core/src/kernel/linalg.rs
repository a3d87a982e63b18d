use super::Matrix;
use crate::error::{Error, Result};

/// Relative pivot threshold used by [`rank`] when callers have no opinion.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

// Pivots below this fraction of the largest input entry mean "singular".
const INVERSE_PIVOT_TOL: f64 = 1e-13;

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn inverse(a: &Matrix) -> Result<Matrix> {
    let n = a.ensure_square()?;
    a.ensure_finite("inverse input")?;
    let scale = a.max_abs();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    if scale == 0.0 {
        return Err(Error::Singular { pivot: 0.0 });
    }

    let mut lhs = a.clone();
    let mut inv = Matrix::identity(n);
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| lhs[(i, col)].abs().total_cmp(&lhs[(j, col)].abs()))
            .unwrap();
        let pivot = lhs[(p, col)];
        if pivot.abs() <= INVERSE_PIVOT_TOL * scale {
            return Err(Error::Singular { pivot });
        }
        swap_rows(&mut lhs, p, col);
        swap_rows(&mut inv, p, col);

        let r = 1.0 / pivot;
        for j in 0..n {
            lhs[(col, j)] *= r;
            inv[(col, j)] *= r;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = lhs[(i, col)];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                lhs[(i, j)] -= f * lhs[(col, j)];
                inv[(i, j)] -= f * inv[(col, j)];
            }
        }
    }
    inv.ensure_finite("inverse result")?;
    Ok(inv)
}

/// Numerical rank by row echelon reduction with partial pivoting.
///
/// A pivot counts when `|pivot| > tol * max|a_ij|` of the original matrix.
pub fn rank(a: &Matrix, tol: f64) -> Result<usize> {
    a.ensure_finite("rank input")?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "rank tolerance must be positive, got {tol}"
        )));
    }
    let threshold = tol * a.max_abs();
    if threshold == 0.0 {
        return Ok(0);
    }

    let mut m = a.clone();
    let (rows, cols) = (m.rows(), m.cols());
    let mut r = 0;
    for col in 0..cols {
        if r == rows {
            break;
        }
        let p = (r..rows)
            .max_by(|&i, &j| m[(i, col)].abs().total_cmp(&m[(j, col)].abs()))
            .unwrap();
        if m[(p, col)].abs() <= threshold {
            continue;
        }
        swap_rows(&mut m, p, r);
        for i in r + 1..rows {
            let f = m[(i, col)] / m[(r, col)];
            if f == 0.0 {
                continue;
            }
            for j in col..cols {
                m[(i, j)] -= f * m[(r, j)];
            }
        }
        r += 1;
    }
    Ok(r)
}

fn swap_rows(m: &mut Matrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.cols() {
        let t = m[(a, j)];
        m[(a, j)] = m[(b, j)];
        m[(b, j)] = t;
    }
}
