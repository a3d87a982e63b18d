//! Test-only oracles, independent of the library's own numerics.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use pendctl::kernel::{mat_exp, Matrix};
use pendctl::{linearize, LinearSystem, OperatingPoint, PendulumParams, StateVector};
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn paper_poles() -> Vec<Complex64> {
    vec![c(-2.0, 0.0), c(-3.0, 0.5), c(-3.0, -0.5), c(-4.0, 0.0)]
}

pub fn paper_system() -> LinearSystem {
    linearize(&PendulumParams::default(), OperatingPoint::AngleZero).unwrap()
}

pub fn x_u() -> StateVector {
    StateVector::new(7.0, 0.0, std::f64::consts::PI / 2.0, 0.0)
}

pub fn x_c() -> StateVector {
    StateVector::new(5.0, -1.0, std::f64::consts::PI / 5.0, 0.2)
}

pub fn x_s() -> StateVector {
    StateVector::new(0.5, 0.0, 0.3, 0.0)
}

// ---- polynomial helpers, ascending powers ----

fn padd(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, v) in b.iter().enumerate() {
        out[i] += v;
    }
    out
}

fn pmul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn pdet(m: &[Vec<Vec<f64>>]) -> Vec<f64> {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = vec![0.0];
    for j in 0..n {
        let minor: Vec<Vec<Vec<f64>>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let term = pmul(&m[0][j], &pdet(&minor));
        let signed: Vec<f64> = if j % 2 == 0 {
            term
        } else {
            term.iter().map(|v| -v).collect()
        };
        acc = padd(&acc, &signed);
    }
    acc
}

/// `|sI - A|` by Laplace expansion over polynomial entries; monic, highest power first.
pub fn cofactor_char_poly(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    let m: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        vec![-a[(i, j)], 1.0]
                    } else {
                        vec![-a[(i, j)]]
                    }
                })
                .collect()
        })
        .collect();
    let mut p = pdet(&m);
    p.resize(n + 1, 0.0);
    p.reverse();
    p
}

/// Expansion of `prod (s - r_i)` by repeated convolution; highest power first.
pub fn convolve_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut acc = vec![c(1.0, 0.0)];
    for r in roots {
        let mut next = vec![c(0.0, 0.0); acc.len() + 1];
        for (i, v) in acc.iter().enumerate() {
            next[i] += v;
            next[i + 1] -= v * r;
        }
        acc = next;
    }
    acc.iter().map(|z| z.re).collect()
}

/// Eigenvalues from nalgebra's Schur decomposition, sorted by (re, im).
pub fn eigenvalues(a: &Matrix) -> Vec<Complex64> {
    let m = DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice());
    let mut e: Vec<Complex64> = m
        .complex_eigenvalues()
        .iter()
        .map(|z| c(z.re, z.im))
        .collect();
    sort(&mut e);
    e
}

pub fn sort(z: &mut [Complex64]) {
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Matches each expected value to its nearest unused actual one; returns the largest gap.
pub fn multiset_distance(actual: &[Complex64], expected: &[Complex64]) -> f64 {
    assert_eq!(actual.len(), expected.len());
    let mut used = vec![false; actual.len()];
    let mut worst = 0.0f64;
    for e in expected {
        let (j, d) = actual
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, a)| (j, (a - e).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// `int_0^T e^(A (T - tau)) B dtau` by composite Simpson with `panels` panels.
pub fn simpson_input_matrix(a: &Matrix, b: &Matrix, t: f64, panels: usize) -> Matrix {
    assert!(panels.is_multiple_of(2));
    let h = t / panels as f64;
    // e^(A h) stepping avoids one full exponential per node
    let step = mat_exp(&a.scale(h)).unwrap();
    let mut node = b.clone(); // e^(A * 0) B, i.e. tau = T
    let mut sum = Matrix::zeros(b.rows(), b.cols());
    for k in 0..=panels {
        let w = if k == 0 || k == panels {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum = &sum + &node.scale(w);
        node = &step * &node;
    }
    sum.scale(h / 3.0)
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(lo..hi)).collect();
    Matrix::new(rows, cols, data).unwrap()
}

/// Random conjugate-closed stable pole set of size `n`.
pub fn random_stable_poles<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let mut poles = Vec::with_capacity(n);
    while poles.len() < n {
        if n - poles.len() >= 2 && rng.gen_bool(0.5) {
            let re = rng.gen_range(-4.0..-0.5);
            let im = rng.gen_range(0.2..2.0);
            poles.push(c(re, im));
            poles.push(c(re, -im));
        } else {
            poles.push(c(rng.gen_range(-4.0..-0.5), 0.0));
        }
    }
    poles
}
