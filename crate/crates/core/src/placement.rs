//! State-feedback synthesis through the controllable canonical form.
//!
//! For a controllable single-input pair `(A, B)` with open-loop polynomial
//! `|sI - A| = s^n + g_1 s^(n-1) + ... + g_n`, the transform
//! `Phi = Ctrb * Gamma` (with `Gamma` the Hankel array of the `g_i`) takes
//! the system to companion form. In those coordinates a feedback row
//! `K_hat` only shifts the last companion row, so matching coefficients
//! against the desired polynomial `s^n + d_1 s^(n-1) + ... + d_n` gives
//!
//! ```text
//! k_hat[n - i] = d_i - g_i        (i = 1..n, 0-indexed k_hat)
//! K = K_hat * Phi^-1
//! ```
//!
//! The same algebra serves the continuous and the sampled design; only the
//! pole set differs (`z = e^(sT)` for the latter).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{
    char_poly, char_poly_hessenberg, inverse, poly_from_roots, sort_poles, Matrix, Polynomial,
    DEFAULT_RANK_TOL,
};
use crate::model::{LinearSystem, TimeDomain};
use crate::props::check;

/// Coefficient residual above which a synthesized gain is rejected.
pub const PLACEMENT_TOL: f64 = 1e-6;

const REFINE_STEPS: usize = 3;

/// Similarity to controllable canonical form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm {
    /// Open-loop characteristic polynomial.
    pub open_loop: Polynomial,
    pub gamma_matrix: Matrix,
    /// `Phi = Ctrb * Gamma`.
    pub transform: Matrix,
    pub transform_inv: Matrix,
}

impl CanonicalForm {
    /// `Phi^-1 A Phi`, the companion matrix.
    pub fn companion_a(&self, sys: &LinearSystem) -> Matrix {
        &(&self.transform_inv * sys.a()) * &self.transform
    }

    /// `Phi^-1 B`, which is `e_n`.
    pub fn companion_b(&self, sys: &LinearSystem) -> Matrix {
        &self.transform_inv * sys.b()
    }
}

/// A synthesized feedback law `u = -K x + Psi * delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSpec {
    /// Requested closed-loop poles, sorted by real then imaginary part.
    pub desired_poles: Vec<Complex64>,
    pub gain: Vec<f64>,
    pub feedforward: Option<f64>,
    pub domain: TimeDomain,
    pub desired_polynomial: Polynomial,
    pub open_loop_polynomial: Polynomial,
    /// Gain in canonical coordinates.
    pub canonical_gain: Vec<f64>,
    /// Relative coefficient mismatch of `|sI - (A - BK)|` against the request.
    pub residual: f64,
}

impl GainSpec {
    /// Roots of `|sI - (A - BK)|`.
    pub fn closed_loop_poles(&self, sys: &LinearSystem) -> Result<Vec<Complex64>> {
        Ok(char_poly(&closed_loop_matrix(sys, &self.gain)?)?.roots())
    }

    /// Attaches the unit-DC-gain reference feedforward for output `output_index`.
    pub fn with_feedforward(mut self, sys: &LinearSystem, output_index: usize) -> Result<Self> {
        self.feedforward = Some(feedforward_gain(sys, &self.gain, output_index)?);
        Ok(self)
    }
}

/// Hankel array with the polynomial coefficients above a unit anti-diagonal:
///
/// ```text
/// [ g_{n-1} g_{n-2} ... g_1 1 ]
/// [ g_{n-2} g_{n-3} ... 1   0 ]
/// [  ...                      ]
/// [ 1       0       ... 0   0 ]
/// ```
pub fn gamma_matrix(poly: &Polynomial) -> Matrix {
    let n = poly.degree();
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n - i {
            // coeff(0) == 1 supplies the anti-diagonal
            g[(i, j)] = poly.coeff(n - 1 - i - j);
        }
    }
    g
}

/// Builds `Phi = Ctrb * Gamma` and its inverse; fails on uncontrollable pairs.
pub fn canonical_transform(sys: &LinearSystem) -> Result<CanonicalForm> {
    let (ctrb, _) = check(sys, DEFAULT_RANK_TOL)?;
    if !ctrb.holds {
        return Err(Error::Uncontrollable {
            rank: ctrb.rank,
            required: ctrb.required,
        });
    }
    let open_loop = char_poly(sys.a())?;
    let gamma_matrix = gamma_matrix(&open_loop);
    let transform = &ctrb.matrix * &gamma_matrix;
    let transform_inv = inverse(&transform).map_err(|_| Error::Uncontrollable {
        rank: ctrb.rank,
        required: ctrb.required,
    })?;
    Ok(CanonicalForm {
        open_loop,
        gamma_matrix,
        transform,
        transform_inv,
    })
}

/// `A - B K` for a single-input system.
pub fn closed_loop_matrix(sys: &LinearSystem, gain: &[f64]) -> Result<Matrix> {
    if sys.inputs() != 1 || gain.len() != sys.order() {
        return Err(Error::DimensionMismatch(format!(
            "gain of length {} for a system with {} states and {} inputs",
            gain.len(),
            sys.order(),
            sys.inputs()
        )));
    }
    Ok(sys.a() - &(sys.b() * &Matrix::row(gain)))
}

/// Places the closed-loop poles of `A - BK` at `desired`.
///
/// The result is checked against the requested polynomial before it is
/// returned; a mismatch above [`PLACEMENT_TOL`] is an error, not a warning.
pub fn place(sys: &LinearSystem, desired: &[Complex64]) -> Result<GainSpec> {
    let n = sys.order();
    if desired.len() != n {
        return Err(Error::PoleCount {
            expected: n,
            got: desired.len(),
        });
    }
    let desired_polynomial = poly_from_roots(desired)?;
    let canon = canonical_transform(sys)?;

    let mut canonical_gain = vec![0.0; n];
    for i in 1..=n {
        canonical_gain[n - i] = desired_polynomial.coeff(i) - canon.open_loop.coeff(i);
    }
    let to_gain = |k_hat: &[f64]| {
        (&Matrix::row(k_hat) * &canon.transform_inv)
            .as_slice()
            .to_vec()
    };
    let mut gain = to_gain(&canonical_gain);

    // closed-loop coefficients are affine in K, so the coefficient error
    // maps straight back through Phi^-1
    let mut achieved = char_poly_hessenberg(&closed_loop_matrix(sys, &gain)?)?;
    let mut residual = achieved.relative_residual(&desired_polynomial);
    for _ in 0..REFINE_STEPS {
        let mut correction = vec![0.0; n];
        for i in 1..=n {
            correction[n - i] = desired_polynomial.coeff(i) - achieved.coeff(i);
        }
        let candidate: Vec<f64> = gain
            .iter()
            .zip(to_gain(&correction))
            .map(|(k, d)| k + d)
            .collect();
        let next = char_poly_hessenberg(&closed_loop_matrix(sys, &candidate)?)?;
        let next_residual = next.relative_residual(&desired_polynomial);
        if next_residual.is_nan() || next_residual >= residual {
            break;
        }
        gain = candidate;
        achieved = next;
        residual = next_residual;
    }
    if residual.is_nan() || residual > PLACEMENT_TOL {
        return Err(Error::SynthesisFailed { residual });
    }

    let mut desired_poles = desired.to_vec();
    sort_poles(&mut desired_poles);
    Ok(GainSpec {
        desired_poles,
        gain,
        feedforward: None,
        domain: sys.domain(),
        desired_polynomial,
        open_loop_polynomial: canon.open_loop,
        canonical_gain,
        residual,
    })
}

/// `z = e^(s T)` for every pole.
pub fn map_poles_s_to_z(poles: &[Complex64], period: f64) -> Vec<Complex64> {
    poles.iter().map(|s| (s * period).exp()).collect()
}

/// Reference gain `Psi` giving unit DC gain from `delta` to output `output_index`.
///
/// Continuous: `Psi = 1 / (c (BK - A)^-1 B)`.
/// Discrete:   `Psi = 1 / (c (I - A + BK)^-1 B)`.
pub fn feedforward_gain(sys: &LinearSystem, gain: &[f64], output_index: usize) -> Result<f64> {
    if output_index >= sys.outputs() {
        return Err(Error::DimensionMismatch(format!(
            "output index {output_index} out of range for {} outputs",
            sys.outputs()
        )));
    }
    let closed = closed_loop_matrix(sys, gain)?;
    let dc_operator = match sys.domain() {
        TimeDomain::Continuous => -&closed,
        TimeDomain::Discrete { .. } => &Matrix::identity(sys.order()) - &closed,
    };
    let solved = inverse(&dc_operator).map_err(|e| match e {
        Error::Singular { .. } => Error::ClosedLoopIntegrator,
        other => other,
    })?;
    let c_row = Matrix::row(sys.c().row_slice(output_index));
    let dc_gain = (&(&c_row * &solved) * sys.b())[(0, 0)];
    let scale = sys.b().max_abs() * c_row.max_abs() * solved.max_abs();
    if dc_gain.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::ClosedLoopIntegrator);
    }
    Ok(1.0 / dc_gain)
}
