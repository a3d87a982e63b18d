//! Zero-order-hold discretization.
//!
//! `A_d = e^(AT)` and `B_d = int_0^T e^(A(T - tau)) B dtau` are read off a
//! single exponential of the augmented block `[[A, B], [0, 0]] T`. This
//! works for singular `A`, which the pendulum has (the cart position is a
//! pure integrator), so no `A^-1 (A_d - I) B` shortcut is used anywhere.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{mat_exp, Matrix};
use crate::model::{LinearSystem, TimeDomain};

/// Exact ZOH equivalent of a continuous system at sampling period `period`.
pub fn zoh_discretize(sys: &LinearSystem, period: f64) -> Result<LinearSystem> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidPeriod(period));
    }
    if sys.domain() != TimeDomain::Continuous {
        return Err(Error::InvalidConfig(
            "ZOH discretization needs a continuous system".into(),
        ));
    }
    let n = sys.order();
    let m = sys.inputs();

    let top = Matrix::hstack(&[sys.a().clone(), sys.b().clone()])?;
    let augmented = Matrix::vstack(&[top, Matrix::zeros(m, n + m)])?.scale(period);
    let e = mat_exp(&augmented)?;

    LinearSystem::new(
        e.block(0, 0, n, n),
        e.block(0, n, n, m),
        sys.c().clone(),
        TimeDomain::Discrete { period },
    )
}

/// One discretization per period, in input order.
pub fn sweep_discretize(sys: &LinearSystem, periods: &[f64]) -> Result<Vec<LinearSystem>> {
    periods
        .par_iter()
        .map(|&t| zoh_discretize(sys, t))
        .collect()
}
