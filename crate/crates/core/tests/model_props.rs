mod common;

use common::*;
use pendctl::kernel::{inverse, rank, Matrix};
use pendctl::{
    check, dynamics, linearize, output, zoh_discretize, LinearSystem, OperatingPoint,
    PendulumParams, StateVector,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn params() -> impl Strategy<Value = PendulumParams> {
    (0.2f64..5.0, 0.1f64..3.0, 0.0f64..3.0, 1.0f64..20.0)
        .prop_map(|(m, l, f, g)| PendulumParams::new(m, l, f, g).unwrap())
}

fn state(range: f64) -> impl Strategy<Value = StateVector> {
    prop::array::uniform4(-range..range).prop_map(StateVector)
}

fn max_diff(a: &StateVector, b: &StateVector) -> f64 {
    (*a - *b).norm_inf()
}

/// Central-difference Jacobian of the vector field at `(x, u)`.
fn fd_jacobian(x: &StateVector, u: f64, p: &PendulumParams) -> (Matrix, Matrix) {
    let eps = 1e-6;
    let mut a = Matrix::zeros(4, 4);
    for j in 0..4 {
        let mut hi = *x;
        let mut lo = *x;
        hi.0[j] += eps;
        lo.0[j] -= eps;
        let d = (dynamics(&hi, u, p).unwrap() - dynamics(&lo, u, p).unwrap()) * (0.5 / eps);
        for i in 0..4 {
            a[(i, j)] = d.0[i];
        }
    }
    let d = (dynamics(x, u + eps, p).unwrap() - dynamics(x, u - eps, p).unwrap()) * (0.5 / eps);
    (a, Matrix::column(&d.0))
}

#[test]
fn default_linearization_to_four_decimals() {
    let sys = paper_system();
    let a = Matrix::from_rows(&[
        [0.0, 1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 1.1876, 11.6500, 0.0],
    ])
    .unwrap();
    let b = Matrix::column(&[0.0, 1.0, 0.0, -1.1876]);
    assert!(sys.a().max_abs_diff(&a).unwrap() < 5e-5);
    assert!(sys.b().max_abs_diff(&b).unwrap() < 5e-5);
}

#[test]
fn both_equilibria_match_finite_differences() {
    let p = PendulumParams::default();
    for point in [OperatingPoint::AngleZero, OperatingPoint::AnglePi] {
        let sys = linearize(&p, point).unwrap();
        let (a, b) = fd_jacobian(&StateVector::new(0.0, 0.0, point.angle(), 0.0), 0.0, &p);
        assert!(sys.a().max_abs_diff(&a).unwrap() < 1e-6);
        assert!(sys.b().max_abs_diff(&b).unwrap() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dynamics_periodic_in_angle(p in params(), x in state(3.0), u in -5.0f64..5.0, k in -3i32..=3) {
        let mut shifted = x;
        shifted.0[2] += 2.0 * PI * f64::from(k);
        let f0 = dynamics(&x, u, &p).unwrap();
        let f1 = dynamics(&shifted, u, &p).unwrap();
        prop_assert!(max_diff(&f0, &f1) < 1e-9 * f0.norm_inf().max(1.0));
    }

    #[test]
    fn dynamics_affine_in_input(p in params(), x in state(3.0), u1 in -5.0f64..5.0, u2 in -5.0f64..5.0, w in 0.0f64..1.0) {
        let mixed = dynamics(&x, w * u1 + (1.0 - w) * u2, &p).unwrap();
        let combo = dynamics(&x, u1, &p).unwrap() * w + dynamics(&x, u2, &p).unwrap() * (1.0 - w);
        prop_assert!(max_diff(&mixed, &combo) < 1e-10 * mixed.norm_inf().max(1.0));
    }

    #[test]
    fn cart_subsystem_ignores_pendulum(p in params(), x in state(3.0), y in state(3.0), u in -5.0f64..5.0) {
        let mut other = x;
        other.0[2] = y.0[2];
        other.0[3] = y.0[3];
        let f0 = dynamics(&x, u, &p).unwrap();
        let f1 = dynamics(&other, u, &p).unwrap();
        prop_assert_eq!(f0.0[0], f1.0[0]);
        prop_assert_eq!(f0.0[1], f1.0[1]);
    }

    #[test]
    fn output_is_c_times_state(x in state(10.0)) {
        let c = paper_system().c().clone();
        let y = c.mul_vec(&x.0);
        prop_assert_eq!(output(&x).to_vec(), y);
    }

    #[test]
    fn jacobian_matches_finite_differences(p in params()) {
        for point in [OperatingPoint::AngleZero, OperatingPoint::AnglePi] {
            let sys = linearize(&p, point).unwrap();
            let (a, b) = fd_jacobian(&StateVector::new(0.0, 0.0, point.angle(), 0.0), 0.0, &p);
            let scale = sys.a().max_abs().max(1.0);
            prop_assert!(sys.a().max_abs_diff(&a).unwrap() < 1e-6 * scale);
            prop_assert!(sys.b().max_abs_diff(&b).unwrap() < 1e-6 * scale);
        }
    }

    #[test]
    fn linearization_predicts_small_perturbations(p in params(), dir in state(1.0), u in -1.0f64..1.0) {
        let sys = linearize(&p, OperatingPoint::AngleZero).unwrap();
        let eps = 1e-4;
        let x = dir * eps;
        let f = dynamics(&x, u * eps, &p).unwrap();
        let lin: Vec<f64> = sys
            .a()
            .mul_vec(&x.0)
            .iter()
            .zip(sys.b().col_vec(0))
            .map(|(ax, b)| ax + b * u * eps)
            .collect();
        let err = f.0.iter().zip(&lin).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        // quadratic remainder
        prop_assert!(err < 1e-6 * sys.a().max_abs().max(1.0));
    }

    #[test]
    fn controllability_survives_similarity(p in params(), t in prop::collection::vec(-2.0f64..2.0, 16)) {
        let sys = linearize(&p, OperatingPoint::AngleZero).unwrap();
        let t = &Matrix::new(4, 4, t).unwrap() + &Matrix::identity(4).scale(3.0);
        let Ok(t_inv) = inverse(&t) else { return Ok(()); };
        let (ctrb, obsv) = check(&sys, 1e-9).unwrap();
        prop_assert!(ctrb.holds && obsv.holds);

        let moved = LinearSystem::continuous(
            &(&t_inv * sys.a()) * &t,
            &t_inv * sys.b(),
            sys.c() * &t,
        )
        .unwrap();
        let (c2, o2) = check(&moved, 1e-9).unwrap();
        prop_assert_eq!(c2.rank, ctrb.rank);
        prop_assert_eq!(o2.rank, obsv.rank);
        // the Krylov matrices are related by the same transform
        prop_assert!((&t * &c2.matrix).max_abs_diff(&ctrb.matrix).unwrap() < 1e-8 * ctrb.matrix.max_abs());
    }

    #[test]
    fn sampled_pendulum_stays_controllable(t in 0.01f64..0.5) {
        let d = zoh_discretize(&paper_system(), t).unwrap();
        let (ctrb, obsv) = check(&d, 1e-9).unwrap();
        prop_assert!(ctrb.holds, "T = {} rank {}", t, ctrb.rank);
        prop_assert!(obsv.holds);
        prop_assert_eq!(rank(&ctrb.matrix, 1e-9).unwrap(), 4);
    }
}
