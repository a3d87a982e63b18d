use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};

/// Largest order accepted by [`char_poly`].
pub const DEFAULT_MAX_ORDER: usize = 8;

// Relative tolerance for deciding that two roots are conjugates.
const CONJUGATE_TOL: f64 = 1e-9;

/// Monic real polynomial `s^n + c[1] s^(n-1) + ... + c[n]`.
///
/// Coefficients are stored highest power first, so `coeffs()[i]` is the
/// coefficient of `s^(n-i)` and `coeffs()[0] == 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::EmptyPolynomial);
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("polynomial coefficients"));
        }
        if coeffs[0] != 1.0 {
            return Err(Error::InvalidConfig(format!(
                "polynomial must be monic, leading coefficient is {}",
                coeffs[0]
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `s^(n-i)`; `coeff(0) == 1`.
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs[i]
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    /// Largest per-coefficient difference, scaled by `max(1, |other_i|)`.
    pub fn relative_residual(&self, other: &Polynomial) -> f64 {
        if self.degree() != other.degree() {
            return f64::INFINITY;
        }
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
            .fold(0.0, f64::max)
    }

    /// All complex roots, sorted by real part then imaginary part.
    ///
    /// Aberth-Ehrlich simultaneous iteration followed by a Newton polish.
    /// Simple roots come back to near machine precision; a root of
    /// multiplicity m is only accurate to roughly eps^(1/m).
    pub fn roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        let deriv: Vec<f64> = self.coeffs[..n]
            .iter()
            .enumerate()
            .map(|(i, c)| c * (n - i) as f64)
            .collect();
        let eval_deriv = |s: Complex64| {
            deriv
                .iter()
                .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
        };

        // Cauchy bound on root magnitudes.
        let radius = 1.0
            + self.coeffs[1..]
                .iter()
                .fold(0.0, |m: f64, c| m.max(c.abs()));
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| {
                let theta = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
                Complex64::from_polar(0.5 * radius, theta)
            })
            .collect();

        for _ in 0..500 {
            let mut max_step = 0.0f64;
            for i in 0..n {
                let p = self.eval(z[i]);
                if p.norm() == 0.0 {
                    continue;
                }
                let ratio = p / eval_deriv(z[i]);
                let repulsion: Complex64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (z[i] - z[j]).inv())
                    .sum();
                let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
                if step.is_finite() {
                    z[i] -= step;
                    max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
                }
            }
            if max_step < 1e-15 {
                break;
            }
        }

        for root in z.iter_mut() {
            for _ in 0..3 {
                let d = eval_deriv(*root);
                if d.norm() == 0.0 {
                    break;
                }
                let step = self.eval(*root) / d;
                if !step.is_finite() {
                    break;
                }
                *root -= step;
            }
        }
        symmetrize_conjugates(&mut z);
        sort_poles(&mut z);
        z
    }
}

// Real coefficients: snap near-real roots onto the axis and make each
// remaining pair exact conjugates, so ordering is stable under round-off.
fn symmetrize_conjugates(z: &mut [Complex64]) {
    const REAL_TOL: f64 = 1e-10;
    for r in z.iter_mut() {
        if r.im.abs() <= REAL_TOL * (1.0 + r.norm()) {
            r.im = 0.0;
        }
    }
    let mut paired = vec![false; z.len()];
    for i in 0..z.len() {
        if paired[i] || z[i].im <= 0.0 {
            continue;
        }
        let target = z[i].conj();
        let partner = (0..z.len())
            .filter(|&j| !paired[j] && z[j].im < 0.0)
            .min_by(|&a, &b| (z[a] - target).norm().total_cmp(&(z[b] - target).norm()));
        if let Some(j) = partner {
            let mean = (z[i] + z[j].conj()) * 0.5;
            z[i] = mean;
            z[j] = mean.conj();
            paired[i] = true;
            paired[j] = true;
        }
    }
}

impl TryFrom<Vec<f64>> for Polynomial {
    type Error = Error;

    fn try_from(coeffs: Vec<f64>) -> Result<Self> {
        Polynomial::new(coeffs)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

/// Canonical ordering: ascending real part, then ascending imaginary part.
pub fn sort_poles(poles: &mut [Complex64]) {
    poles.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Characteristic polynomial `|sI - A|` for matrices up to [`DEFAULT_MAX_ORDER`].
pub fn char_poly(a: &Matrix) -> Result<Polynomial> {
    char_poly_with_max(a, DEFAULT_MAX_ORDER)
}

/// Faddeev-LeVerrier recurrence:
/// `M_k = A M_{k-1} + c_{k-1} I`, `c_k = -tr(A M_k) / k`, with `M_0 = 0`, `c_0 = 1`.
pub fn char_poly_with_max(a: &Matrix, max_order: usize) -> Result<Polynomial> {
    let n = a.ensure_square()?;
    a.ensure_finite("char_poly input")?;
    if n == 0 {
        return Err(Error::EmptyPolynomial);
    }
    if n > max_order {
        return Err(Error::OrderTooLarge {
            order: n,
            max: max_order,
        });
    }

    let mut coeffs = vec![0.0; n + 1];
    coeffs[0] = 1.0;
    let mut m = Matrix::zeros(n, n);
    for k in 1..=n {
        let mut next = a * &m;
        for i in 0..n {
            next[(i, i)] += coeffs[k - 1];
        }
        m = next;
        coeffs[k] = -(a * &m).trace() / k as f64;
    }
    Polynomial::new(coeffs)
}

/// Characteristic polynomial via orthogonal Hessenberg reduction and the
/// La Budde recurrence on the leading principal blocks.
///
/// Slower than [`char_poly`] but holds relative accuracy on matrices with
/// large entries (high-gain closed loops) where the trace recurrence
/// cancels badly.
pub fn char_poly_hessenberg(a: &Matrix) -> Result<Polynomial> {
    let n = a.ensure_square()?;
    a.ensure_finite("char_poly input")?;
    if n == 0 {
        return Err(Error::EmptyPolynomial);
    }
    let h = hessenberg(a);

    // p[i]: ascending coefficients of the leading i x i block's polynomial
    let mut p: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    p.push(vec![1.0]);
    for i in 1..=n {
        let r = i - 1;
        let mut next = vec![0.0; i + 1];
        for (d, &c) in p[r].iter().enumerate() {
            next[d + 1] += c;
            next[d] -= h[(r, r)] * c;
        }
        let mut sub = 1.0;
        for m in 1..i {
            sub *= h[(r - m + 1, r - m)];
            let w = h[(r - m, r)] * sub;
            for (d, &c) in p[r - m].iter().enumerate() {
                next[d] -= w * c;
            }
        }
        p.push(next);
    }
    let mut coeffs = p.pop().unwrap_or_default();
    coeffs.reverse();
    Polynomial::new(coeffs)
}

/// Upper Hessenberg form by Householder reflections.
fn hessenberg(a: &Matrix) -> Matrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<f64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        v[0] += if v[0] < 0.0 { -norm } else { norm };
        let vv: f64 = v.iter().map(|x| x * x).sum();
        for j in 0..n {
            let d = 2.0 * (0..v.len()).map(|i| v[i] * h[(k + 1 + i, j)]).sum::<f64>() / vv;
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= d * vi;
            }
        }
        for i in 0..n {
            let d = 2.0 * (0..v.len()).map(|j| h[(i, k + 1 + j)] * v[j]).sum::<f64>() / vv;
            for (j, vj) in v.iter().enumerate() {
                h[(i, k + 1 + j)] -= d * vj;
            }
        }
    }
    h
}

/// Monic real polynomial with exactly the given roots.
///
/// Non-real roots must come in conjugate pairs.
pub fn poly_from_roots(roots: &[Complex64]) -> Result<Polynomial> {
    if roots.is_empty() {
        return Err(Error::EmptyPolynomial);
    }
    if roots.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("polynomial roots"));
    }
    check_conjugate_closed(roots)?;

    let mut acc = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
        for (i, &c) in acc.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        acc = next;
    }
    Polynomial::new(acc.into_iter().map(|c| c.re).collect())
}

pub(crate) fn check_conjugate_closed(roots: &[Complex64]) -> Result<()> {
    let tol = |z: Complex64| CONJUGATE_TOL * (1.0 + z.norm());
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        let z = roots[i];
        if used[i] || z.im.abs() <= tol(z) {
            continue;
        }
        let partner = (0..roots.len())
            .find(|&j| j != i && !used[j] && (roots[j] - z.conj()).norm() <= tol(z));
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => return Err(Error::UnpairedConjugate(z)),
        }
    }
    Ok(())
}
