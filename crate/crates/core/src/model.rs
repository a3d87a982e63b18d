//! The cart/pendulum plant: nonlinear dynamics, output map, equilibria
//! and first-order (Taylor) linearization.
//!
//! State ordering is `[s, s_dot, phi, phi_dot]` with the cart force `u` as
//! the single input and `y = [s, phi]` as the measured output. The
//! pendulum point mass is neglected in the cart equation, which leaves
//!
//! ```text
//! M s_dd + F s_d = u
//! phi_dd = (g/L) sin(phi) - (1/L) cos(phi) s_dd
//! ```
//!
//! so neither the pendulum mass nor its inertia appear as parameters.
//! Angles are never wrapped; `phi = 0` is the configuration the linear
//! design targets.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{char_poly, Matrix};

/// Physical constants of the plant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct PendulumParams {
    /// Cart mass `M` (kg).
    pub cart_mass: f64,
    /// Pendulum length `L` (m).
    pub length: f64,
    /// Viscous cart friction `F` (kg/s).
    pub friction: f64,
    /// Gravitational acceleration `g` (m/s^2).
    pub gravity: f64,
}

#[derive(Deserialize)]
struct RawParams {
    cart_mass: f64,
    length: f64,
    friction: f64,
    gravity: f64,
}

impl TryFrom<RawParams> for PendulumParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        PendulumParams::new(r.cart_mass, r.length, r.friction, r.gravity)
    }
}

impl PendulumParams {
    pub fn new(cart_mass: f64, length: f64, friction: f64, gravity: f64) -> Result<Self> {
        let p = Self {
            cart_mass,
            length,
            friction,
            gravity,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.cart_mass, self.length, self.friction, self.gravity];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if self.cart_mass <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "cart mass must be > 0, got {}",
                self.cart_mass
            )));
        }
        if self.length <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "length must be > 0, got {}",
                self.length
            )));
        }
        if self.gravity <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "gravity must be > 0, got {}",
                self.gravity
            )));
        }
        if self.friction < 0.0 {
            return Err(Error::InvalidParams(format!(
                "friction must be >= 0, got {}",
                self.friction
            )));
        }
        Ok(())
    }
}

impl Default for PendulumParams {
    /// M = 1 kg, L = 0.842 m, F = 1 kg/s, g = 9.8093 m/s^2.
    fn default() -> Self {
        Self {
            cart_mass: 1.0,
            length: 0.842,
            friction: 1.0,
            gravity: 9.8093,
        }
    }
}

/// `[s, s_dot, phi, phi_dot]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(pub [f64; 4]);

impl StateVector {
    pub const ZERO: StateVector = StateVector([0.0; 4]);

    pub fn new(position: f64, velocity: f64, angle: f64, angular_velocity: f64) -> Self {
        Self([position, velocity, angle, angular_velocity])
    }

    pub fn position(&self) -> f64 {
        self.0[0]
    }

    pub fn velocity(&self) -> f64 {
        self.0[1]
    }

    pub fn angle(&self) -> f64 {
        self.0[2]
    }

    pub fn angular_velocity(&self) -> f64 {
        self.0[3]
    }

    pub fn as_array(&self) -> &[f64; 4] {
        &self.0
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Add for StateVector {
    type Output = StateVector;

    fn add(self, rhs: StateVector) -> StateVector {
        StateVector(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for StateVector {
    type Output = StateVector;

    fn sub(self, rhs: StateVector) -> StateVector {
        StateVector(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Mul<f64> for StateVector {
    type Output = StateVector;

    fn mul(self, k: f64) -> StateVector {
        StateVector(self.0.map(|v| v * k))
    }
}

impl From<[f64; 4]> for StateVector {
    fn from(v: [f64; 4]) -> Self {
        Self(v)
    }
}

/// Continuous or sampled time base of a [`LinearSystem`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeDomain {
    Continuous,
    Discrete { period: f64 },
}

impl TimeDomain {
    pub fn period(&self) -> Option<f64> {
        match *self {
            TimeDomain::Continuous => None,
            TimeDomain::Discrete { period } => Some(period),
        }
    }
}

/// Deterministic state-space triple `(A, B, C)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct LinearSystem {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    domain: TimeDomain,
}

#[derive(Deserialize)]
struct RawSystem {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    domain: TimeDomain,
}

impl TryFrom<RawSystem> for LinearSystem {
    type Error = Error;

    fn try_from(r: RawSystem) -> Result<Self> {
        LinearSystem::new(r.a, r.b, r.c, r.domain)
    }
}

impl LinearSystem {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, domain: TimeDomain) -> Result<Self> {
        let n = a.ensure_square()?;
        if n == 0 {
            return Err(Error::DimensionMismatch("system has no states".into()));
        }
        if b.rows() != n || b.cols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "B is {}x{}, expected {n}xm with m >= 1",
                b.rows(),
                b.cols()
            )));
        }
        if c.cols() != n || c.rows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "C is {}x{}, expected px{n} with p >= 1",
                c.rows(),
                c.cols()
            )));
        }
        if let TimeDomain::Discrete { period } = domain {
            if !(period > 0.0 && period.is_finite()) {
                return Err(Error::InvalidPeriod(period));
            }
        }
        Ok(Self { a, b, c, domain })
    }

    pub fn continuous(a: Matrix, b: Matrix, c: Matrix) -> Result<Self> {
        Self::new(a, b, c, TimeDomain::Continuous)
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn order(&self) -> usize {
        self.a.rows()
    }

    pub fn inputs(&self) -> usize {
        self.b.cols()
    }

    pub fn outputs(&self) -> usize {
        self.c.rows()
    }

    /// Open-loop poles (roots of the characteristic polynomial).
    pub fn poles(&self) -> Result<Vec<Complex64>> {
        Ok(char_poly(&self.a)?.roots())
    }
}

/// Which zero-input equilibrium to expand around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatingPoint {
    /// `phi = 0`.
    AngleZero,
    /// `phi = pi`, expressed in the shifted angle `phi - pi`.
    AnglePi,
}

impl OperatingPoint {
    pub fn angle(&self) -> f64 {
        match self {
            OperatingPoint::AngleZero => 0.0,
            OperatingPoint::AnglePi => std::f64::consts::PI,
        }
    }
}

/// Stability of an equilibrium, read off the linearization's eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    /// Every eigenvalue strictly in the left half plane.
    Asymptotic,
    /// No eigenvalue in the open right half plane, at least one on the axis.
    Marginal,
    Unstable,
}

// Real parts within this band of the imaginary axis count as on it.
const AXIS_TOL: f64 = 1e-8;

impl Stability {
    pub fn from_continuous_poles(poles: &[Complex64]) -> Self {
        let max_re = poles.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
        if max_re > AXIS_TOL {
            Stability::Unstable
        } else if max_re < -AXIS_TOL {
            Stability::Asymptotic
        } else {
            Stability::Marginal
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub point: OperatingPoint,
    /// Representative state with `s = 0`; any cart position is also an equilibrium.
    pub state: StateVector,
    pub stability: Stability,
    pub eigenvalues: Vec<Complex64>,
}

/// State derivative of the nonlinear plant.
pub fn dynamics(x: &StateVector, u: f64, p: &PendulumParams) -> Result<StateVector> {
    if !x.is_finite() || !u.is_finite() {
        return Err(Error::NonFinite("dynamics input"));
    }
    Ok(dynamics_unchecked(x, u, p))
}

#[inline]
pub(crate) fn dynamics_unchecked(x: &StateVector, u: f64, p: &PendulumParams) -> StateVector {
    let [_, v, phi, omega] = x.0;
    let (m, l, f, g) = (p.cart_mass, p.length, p.friction, p.gravity);
    let (sin, cos) = phi.sin_cos();
    StateVector([
        v,
        -(f / m) * v + u / m,
        omega,
        (g / l) * sin + (f / (m * l)) * cos * v - cos * u / (m * l),
    ])
}

/// Measured output `(s, phi)`.
pub fn output(x: &StateVector) -> [f64; 2] {
    [x.0[0], x.0[2]]
}

/// First-order expansion of [`dynamics`] about the chosen equilibrium.
pub fn linearize(p: &PendulumParams, point: OperatingPoint) -> Result<LinearSystem> {
    p.validate()?;
    let (m, l, f, g) = (p.cart_mass, p.length, p.friction, p.gravity);
    // cos(phi) at the operating point; sin(phi) ~ cos * (phi - phi_0).
    let cos = match point {
        OperatingPoint::AngleZero => 1.0,
        OperatingPoint::AnglePi => -1.0,
    };
    let a = Matrix::from_rows(&[
        [0.0, 1.0, 0.0, 0.0],
        [0.0, -f / m, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, cos * f / (m * l), cos * g / l, 0.0],
    ])?;
    let b = Matrix::column(&[0.0, 1.0 / m, 0.0, -cos / (m * l)]);
    let c = Matrix::from_rows(&[[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]])?;
    LinearSystem::continuous(a, b, c)
}

/// The two zero-input equilibria, tagged by the eigenvalues of their linearization.
pub fn equilibria(p: &PendulumParams) -> Result<Vec<Equilibrium>> {
    [OperatingPoint::AngleZero, OperatingPoint::AnglePi]
        .into_iter()
        .map(|point| {
            let eigenvalues = linearize(p, point)?.poles()?;
            Ok(Equilibrium {
                point,
                state: StateVector::new(0.0, 0.0, point.angle(), 0.0),
                stability: Stability::from_continuous_poles(&eigenvalues),
                eigenvalues,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn params_validation() {
        assert!(PendulumParams::new(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(PendulumParams::new(1.0, -1.0, 0.0, 1.0).is_err());
        assert!(PendulumParams::new(1.0, 1.0, -0.1, 1.0).is_err());
        assert!(PendulumParams::new(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(PendulumParams::new(1.0, 1.0, f64::NAN, 1.0).is_err());
        assert!(PendulumParams::new(1.0, 1.0, 0.0, 1.0).is_ok());
        let raw = RawParams {
            cart_mass: -1.0,
            length: 1.0,
            friction: 0.0,
            gravity: 1.0,
        };
        assert!(PendulumParams::try_from(raw).is_err());
    }

    #[test]
    fn dynamics_examples() {
        let p = PendulumParams::default();
        assert_eq!(
            dynamics(&StateVector::ZERO, 0.0, &p).unwrap(),
            StateVector::ZERO
        );

        let d = dynamics(&StateVector::new(0.0, 0.0, PI / 2.0, 0.0), 0.0, &p).unwrap();
        assert!(close(&d.0[..3], &[0.0, 0.0, 0.0], 1e-15));
        assert!((d.0[3] - 9.8093 / 0.842).abs() < 1e-12);
        assert!((d.0[3] - 11.6500).abs() < 5e-5);

        let d = dynamics(&StateVector::new(0.0, 1.0, 0.0, 0.0), 1.0, &p).unwrap();
        assert!(close(&d.0, &[1.0, 0.0, 0.0, 0.0], 1e-15), "{d:?}");
    }

    #[test]
    fn dynamics_rejects_non_finite() {
        let p = PendulumParams::default();
        assert!(dynamics(&StateVector::new(f64::NAN, 0.0, 0.0, 0.0), 0.0, &p).is_err());
        assert!(dynamics(&StateVector::ZERO, f64::INFINITY, &p).is_err());
    }

    #[test]
    fn output_examples() {
        assert_eq!(output(&StateVector::new(0.5, 0.0, 0.3, 0.0)), [0.5, 0.3]);
        assert_eq!(output(&StateVector::ZERO), [0.0, 0.0]);
        assert_eq!(
            output(&StateVector::new(7.0, 0.0, PI / 2.0, 0.0)),
            [7.0, PI / 2.0]
        );
    }

    #[test]
    fn linearize_reproduces_printed_matrices() {
        let sys = linearize(&PendulumParams::default(), OperatingPoint::AngleZero).unwrap();
        let want_a = [
            [0.0, 1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 1.1876, 11.6500, 0.0],
        ];
        for (i, row) in want_a.iter().enumerate() {
            assert!(close(sys.a().row_slice(i), row, 5e-5), "row {i}");
        }
        assert!(close(sys.b().as_slice(), &[0.0, 1.0, 0.0, -1.1876], 5e-5));
        assert_eq!(sys.domain(), TimeDomain::Continuous);
        assert_eq!((sys.order(), sys.inputs(), sys.outputs()), (4, 1, 2));
    }

    #[test]
    fn linearize_frictionless_unit_system() {
        let p = PendulumParams::new(1.0, 1.0, 0.0, 1.0).unwrap();
        let a = linearize(&p, OperatingPoint::AngleZero)
            .unwrap()
            .a()
            .clone();
        assert_eq!(a[(3, 2)], 1.0);
        assert_eq!(a[(1, 1)], 0.0);
        assert_eq!(a[(3, 1)], 0.0);
    }

    #[test]
    fn linearize_angle_pi_flips_pendulum_signs() {
        let p = PendulumParams::default();
        let up = linearize(&p, OperatingPoint::AngleZero).unwrap();
        let down = linearize(&p, OperatingPoint::AnglePi).unwrap();
        assert_eq!(down.a()[(3, 2)], -up.a()[(3, 2)]);
        assert_eq!(down.a()[(3, 1)], -up.a()[(3, 1)]);
        assert_eq!(down.b()[(3, 0)], -up.b()[(3, 0)]);
        assert_eq!(down.a().block(0, 0, 3, 4), up.a().block(0, 0, 3, 4));
    }

    #[test]
    fn taylor_remainder_is_second_order() {
        let p = PendulumParams::default();
        let sys = linearize(&p, OperatingPoint::AngleZero).unwrap();
        let grid = [-1e-2, -3e-3, 0.0, 4e-3, 1e-2];
        for &a in &grid {
            for &b in &grid {
                for &u in &[-1e-2, 0.0, 1e-2] {
                    let x = StateVector::new(a, b, -b, a);
                    let nl = dynamics(&x, u, &p).unwrap();
                    let mut lin = sys.a().mul_vec(&x.0);
                    lin[3] += sys.b()[(3, 0)] * u;
                    lin[1] += sys.b()[(1, 0)] * u;
                    let res =
                        nl.0.iter()
                            .zip(&lin)
                            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                    assert!(res <= 1e-3, "residual {res} at {x:?}, u={u}");
                }
            }
        }
    }

    #[test]
    fn angle_pi_linearization_matches_shifted_dynamics() {
        let p = PendulumParams::default();
        let sys = linearize(&p, OperatingPoint::AnglePi).unwrap();
        let h = 1e-6;
        for j in 0..4 {
            let mut plus = StateVector::new(0.0, 0.0, PI, 0.0);
            let mut minus = plus;
            plus.0[j] += h;
            minus.0[j] -= h;
            let dp = dynamics(&plus, 0.0, &p).unwrap();
            let dm = dynamics(&minus, 0.0, &p).unwrap();
            for i in 0..4 {
                let fd = (dp.0[i] - dm.0[i]) / (2.0 * h);
                assert!((fd - sys.a()[(i, j)]).abs() < 1e-6, "A[{i},{j}]");
            }
        }
    }

    #[test]
    fn equilibria_tags_follow_eigenvalues() {
        let p = PendulumParams::default();
        let eq = equilibria(&p).unwrap();
        assert_eq!(eq.len(), 2);

        assert_eq!(eq[0].point, OperatingPoint::AngleZero);
        assert_eq!(eq[0].stability, Stability::Unstable);
        let max_re = eq[0]
            .eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::MIN, f64::max);
        assert!((max_re - (9.8093f64 / 0.842).sqrt()).abs() < 1e-9);
        assert!((max_re - 3.4132).abs() < 5e-5);

        assert_eq!(eq[1].point, OperatingPoint::AnglePi);
        assert_eq!(eq[1].stability, Stability::Marginal);
        assert!(eq[1].eigenvalues.iter().all(|z| z.re <= 1e-9));

        for e in &eq {
            // sin(pi) is not exactly zero in floating point
            assert!(dynamics(&e.state, 0.0, &p).unwrap().norm_inf() < 1e-14);
        }
    }

    #[test]
    fn stability_classifier() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(
            Stability::from_continuous_poles(&[c(-1.0, 0.0), c(-2.0, 1.0)]),
            Stability::Asymptotic
        );
        assert_eq!(
            Stability::from_continuous_poles(&[c(-1.0, 0.0), c(0.0, 1.0)]),
            Stability::Marginal
        );
        assert_eq!(
            Stability::from_continuous_poles(&[c(0.1, 0.0)]),
            Stability::Unstable
        );
    }

    #[test]
    fn linear_system_validation() {
        let a = Matrix::identity(2);
        let b = Matrix::column(&[0.0, 1.0]);
        let c = Matrix::row(&[1.0, 0.0]);
        assert!(LinearSystem::continuous(a.clone(), b.clone(), c.clone()).is_ok());
        assert!(LinearSystem::continuous(a.clone(), Matrix::column(&[1.0]), c.clone()).is_err());
        assert!(LinearSystem::continuous(a.clone(), b.clone(), Matrix::row(&[1.0])).is_err());
        assert!(LinearSystem::new(
            a.clone(),
            b.clone(),
            c.clone(),
            TimeDomain::Discrete { period: 0.0 }
        )
        .is_err());
        assert!(LinearSystem::new(a, b, c, TimeDomain::Discrete { period: 0.1 }).is_ok());
    }
}
