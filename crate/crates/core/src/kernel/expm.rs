use super::Matrix;
use crate::error::{Error, Result};

const SCALED_NORM_BOUND: f64 = 0.5;
const TERM_TOL: f64 = 1e-16;
const MAX_TERMS: usize = 60;

/// Matrix exponential by scaling and squaring around a truncated Taylor series.
///
/// `A` is scaled by `2^-k` until `||A / 2^k||_inf <= 0.5`; the series is
/// summed until the next term has infinity norm below 1e-16, then the
/// result is squared `k` times.
pub fn mat_exp(a: &Matrix) -> Result<Matrix> {
    let n = a.ensure_square()?;
    a.ensure_finite("mat_exp input")?;

    let norm = a.norm_inf();
    let mut squarings = 0u32;
    if norm > SCALED_NORM_BOUND {
        squarings = (norm / SCALED_NORM_BOUND).log2().ceil() as u32;
    }
    let scaled = a.scale(0.5f64.powi(squarings as i32));

    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=MAX_TERMS {
        term = (&term * &scaled).scale(1.0 / k as f64);
        sum = &sum + &term;
        if term.norm_inf() < TERM_TOL {
            break;
        }
    }

    for _ in 0..squarings {
        sum = &sum * &sum;
        if !sum.is_finite() {
            return Err(Error::NonFinite("mat_exp result (overflow)"));
        }
    }
    sum.ensure_finite("mat_exp result (overflow)")?;
    Ok(sum)
}
