//! Controllability and observability by the Kalman rank test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{rank, Matrix};
use crate::model::LinearSystem;

/// Outcome of one rank test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub matrix: Matrix,
    pub rank: usize,
    pub required: usize,
    pub holds: bool,
    /// Relative pivot tolerance the rank was computed with.
    pub tol: f64,
}

impl PropertyReport {
    fn from_matrix(matrix: Matrix, required: usize, tol: f64) -> Result<Self> {
        let rank = rank(&matrix, tol)?;
        Ok(Self {
            matrix,
            rank,
            required,
            holds: rank == required,
            tol,
        })
    }
}

/// `[B | AB | ... | A^(n-1) B]` for a single-input system.
pub fn controllability_matrix(sys: &LinearSystem) -> Result<Matrix> {
    if sys.inputs() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "controllability matrix needs a single input, system has {}",
            sys.inputs()
        )));
    }
    let n = sys.order();
    let mut blocks = Vec::with_capacity(n);
    let mut col = sys.b().clone();
    for _ in 0..n {
        let next = sys.a() * &col;
        blocks.push(col);
        col = next;
    }
    Matrix::hstack(&blocks)
}

/// `[C; CA; ...; C A^(n-1)]`, of size `(p n) x n`.
pub fn observability_matrix(sys: &LinearSystem) -> Result<Matrix> {
    let n = sys.order();
    let mut blocks = Vec::with_capacity(n);
    let mut row = sys.c().clone();
    for _ in 0..n {
        let next = &row * sys.a();
        blocks.push(row);
        row = next;
    }
    Matrix::vstack(&blocks)
}

/// Runs both rank tests; returns `(controllability, observability)`.
pub fn check(sys: &LinearSystem, tol: f64) -> Result<(PropertyReport, PropertyReport)> {
    let n = sys.order();
    let ctrb = PropertyReport::from_matrix(controllability_matrix(sys)?, n, tol)?;
    let obsv = PropertyReport::from_matrix(observability_matrix(sys)?, n, tol)?;
    Ok((ctrb, obsv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::DEFAULT_RANK_TOL;
    use crate::model::{linearize, OperatingPoint, PendulumParams};

    fn sys(a: Matrix, b: Matrix, c: Matrix) -> LinearSystem {
        LinearSystem::continuous(a, b, c).unwrap()
    }

    fn paper_system() -> LinearSystem {
        linearize(&PendulumParams::default(), OperatingPoint::AngleZero).unwrap()
    }

    #[test]
    fn pendulum_controllability_matrix() {
        let ctrb = controllability_matrix(&paper_system()).unwrap();
        let printed = [
            [0.0, 1.0, -1.0, 1.0],
            [1.0, -1.0, 1.0, -1.0],
            [0.0, -1.1876, 1.1876, -15.0238],
            [-1.1876, 1.1876, -15.0238, 15.0238],
        ];
        for (i, row) in printed.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                assert!(
                    (ctrb[(i, j)] - want).abs() < 5e-5,
                    "({i},{j}) = {}",
                    ctrb[(i, j)]
                );
            }
        }
    }

    #[test]
    fn pendulum_observability_matrix() {
        let obsv = observability_matrix(&paper_system()).unwrap();
        assert_eq!((obsv.rows(), obsv.cols()), (8, 4));
        let printed = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, -1.0, 0.0, 0.0],
            [0.0, 1.1876, 11.6500, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, -1.1876, 0.0, 11.6500],
        ];
        for (i, row) in printed.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                assert!(
                    (obsv[(i, j)] - want).abs() < 5e-5,
                    "({i},{j}) = {}",
                    obsv[(i, j)]
                );
            }
        }
    }

    #[test]
    fn pendulum_is_controllable_and_observable() {
        let (c, o) = check(&paper_system(), DEFAULT_RANK_TOL).unwrap();
        assert!(c.holds && o.holds);
        assert_eq!((c.rank, o.rank, c.required), (4, 4, 4));
        assert_eq!(c.tol, DEFAULT_RANK_TOL);
    }

    #[test]
    fn small_examples() {
        let e1 = Matrix::column(&[1.0, 0.0]);
        let c = Matrix::identity(2);
        let s = sys(Matrix::zeros(2, 2), e1.clone(), c.clone());
        let ctrb = controllability_matrix(&s).unwrap();
        assert_eq!(ctrb, Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap());
        assert_eq!(check(&s, 1e-9).unwrap().0.rank, 1);

        let dbl = sys(
            Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap(),
            Matrix::column(&[0.0, 1.0]),
            c,
        );
        let ctrb = controllability_matrix(&dbl).unwrap();
        assert_eq!(ctrb, Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap());
        let (cr, or) = check(&dbl, 1e-9).unwrap();
        assert_eq!(cr.rank, 2);
        assert_eq!(or.rank, 2);
    }

    #[test]
    fn uncontrollable_and_unobservable_pairs() {
        let s = sys(
            Matrix::diag(&[1.0, 2.0]),
            Matrix::column(&[1.0, 0.0]),
            Matrix::row(&[1.0, 0.0]),
        );
        let obsv = observability_matrix(&s).unwrap();
        assert_eq!(obsv, Matrix::from_rows(&[[1.0, 0.0], [1.0, 0.0]]).unwrap());
        let (c, o) = check(&s, 1e-9).unwrap();
        assert!(!c.holds);
        assert!(!o.holds);
        assert_eq!(o.rank, 1);
    }

    #[test]
    fn multi_input_is_rejected() {
        let s = sys(
            Matrix::identity(2),
            Matrix::identity(2),
            Matrix::identity(2),
        );
        assert!(matches!(
            controllability_matrix(&s),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn columns_follow_the_krylov_recursion() {
        let s = paper_system();
        let ctrb = controllability_matrix(&s).unwrap();
        for j in 0..3 {
            let next = s.a().mul_vec(&ctrb.col_vec(j));
            let got = ctrb.col_vec(j + 1);
            assert!(next.iter().zip(&got).all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }
}
