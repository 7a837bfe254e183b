#![allow(dead_code)]

//! Shared test oracles, independent of the library's implementation paths.

use ndarray::Array2;
use qecell::model::CouplingChain;

/// Dense symmetric matrix of a coupling chain.
pub fn dense_matrix(chain: &CouplingChain<f64>) -> Array2<f64> {
    let n = chain.len();
    let mut m = Array2::<f64>::zeros((n, n));
    for (i, &d) in chain.diagonal().iter().enumerate() {
        m[(i, i)] = d;
    }
    for (i, &f) in chain.off_diagonal().iter().enumerate() {
        m[(i, i + 1)] = f;
        m[(i + 1, i)] = f;
    }
    m
}

/// Brute-force eigenvalues of a dense symmetric matrix by cyclic Jacobi
/// rotations, sorted ascending. Deliberately a different algorithm from the
/// library's tridiagonal QL solver.
pub fn jacobi_eigenvalues(matrix: &Array2<f64>) -> Vec<f64> {
    let n = matrix.nrows();
    let mut a = matrix.clone();
    let scale: f64 = matrix
        .iter()
        .fold(0.0_f64, |m, &v| m.max(v.abs()))
        .max(1e-300);
    for _sweep in 0..200 {
        let mut off = 0.0_f64;
        for i in 0..n {
            for j in i + 1..n {
                off = off.max(a[(i, j)].abs());
            }
        }
        if off <= 1e-16 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut evals: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    evals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    evals
}

/// Taylor-series J1, reliable to ~1e-13 for |x| <= 12; the independent
/// reference for the rational-approximation implementation.
pub fn j1_series(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = half; // m = 0: (x/2) / (0! 1!)
    let mut sum = term;
    for m in 1..60 {
        term *= -(half * half) / (m as f64 * (m as f64 + 1.0));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    sum
}
