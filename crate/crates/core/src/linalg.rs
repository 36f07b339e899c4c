//! Small dense matrix kernels (row-major `Vec<f64>`).
//!
//! Every system in the pipeline is tiny (n <= 6), so plain partial-pivot
//! elimination is both adequate and fully deterministic.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub fn mat_vec(a: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), rows * cols);
    debug_assert_eq!(x.len(), cols);
    (0..rows)
        .map(|i| (0..cols).map(|j| a[i * cols + j] * x[j]).sum())
        .collect()
}

pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn trace(a: &[f64], n: usize) -> f64 {
    (0..n).map(|i| a[i * n + i]).sum()
}

/// Maximum absolute row sum.
pub fn inf_norm(a: &[f64], rows: usize, cols: usize) -> f64 {
    (0..rows)
        .map(|i| (0..cols).map(|j| a[i * cols + j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

/// In-place LU factorization with partial pivoting.
///
/// Returns the pivot permutation and the determinant.
pub fn lu_factor(a: &mut [f64], n: usize, context: &'static str) -> Result<(Vec<usize>, f64)> {
    debug_assert_eq!(a.len(), n * n);
    let mut piv: Vec<usize> = (0..n).collect();
    let mut det = 1.0;
    for col in 0..n {
        let mut best = col;
        let mut best_val = a[col * n + col].abs();
        for row in (col + 1)..n {
            let v = a[row * n + col].abs();
            if v > best_val {
                best = row;
                best_val = v;
            }
        }
        if !(best_val > 0.0) || !best_val.is_finite() {
            return Err(Error::SingularMatrix { context });
        }
        if best != col {
            for j in 0..n {
                a.swap(col * n + j, best * n + j);
            }
            piv.swap(col, best);
            det = -det;
        }
        let pivot = a[col * n + col];
        det *= pivot;
        for row in (col + 1)..n {
            let factor = a[row * n + col] / pivot;
            a[row * n + col] = factor;
            for j in (col + 1)..n {
                a[row * n + j] -= factor * a[col * n + j];
            }
        }
    }
    Ok((piv, det))
}

pub fn lu_solve(lu: &[f64], n: usize, piv: &[usize], b: &[f64]) -> Vec<f64> {
    let mut x: Vec<f64> = piv.iter().map(|&p| b[p]).collect();
    for i in 1..n {
        for j in 0..i {
            x[i] -= lu[i * n + j] * x[j];
        }
    }
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            x[i] -= lu[i * n + j] * x[j];
        }
        x[i] /= lu[i * n + i];
    }
    x
}

pub fn solve(mut a: Vec<f64>, n: usize, b: &[f64], context: &'static str) -> Result<Vec<f64>> {
    let (piv, _) = lu_factor(&mut a, n, context)?;
    Ok(lu_solve(&a, n, &piv, b))
}

/// Solves the same matrix against several right-hand sides.
pub fn solve_columns(
    mut a: Vec<f64>,
    n: usize,
    rhs: &[Vec<f64>],
    context: &'static str,
) -> Result<Vec<Vec<f64>>> {
    let (piv, _) = lu_factor(&mut a, n, context)?;
    Ok(rhs.iter().map(|b| lu_solve(&a, n, &piv, b)).collect())
}

/// Determinant by LU; singular matrices give 0.
pub fn determinant(mut a: Vec<f64>, n: usize) -> f64 {
    match lu_factor(&mut a, n, "determinant") {
        Ok((_, det)) => det,
        Err(_) => 0.0,
    }
}

/// Numerical rank by row echelon reduction with an absolute pivot tolerance.
pub fn rank(mut a: Vec<f64>, rows: usize, cols: usize, pivot_tol: f64) -> usize {
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let mut best = row;
        let mut best_val = a[row * cols + col].abs();
        for r in (row + 1)..rows {
            let v = a[r * cols + col].abs();
            if v > best_val {
                best = r;
                best_val = v;
            }
        }
        if best_val <= pivot_tol {
            continue;
        }
        if best != row {
            for j in 0..cols {
                a.swap(row * cols + j, best * cols + j);
            }
        }
        let pivot = a[row * cols + col];
        for r in (row + 1)..rows {
            let factor = a[r * cols + col] / pivot;
            for j in col..cols {
                a[r * cols + j] -= factor * a[row * cols + j];
            }
        }
        rank += 1;
        row += 1;
    }
    rank
}

/// Coefficients `[1, c1, ..., cn]` of `det(lambda I - A)` by the
/// Faddeev-LeVerrier recursion.
pub fn char_poly(a: &[f64], n: usize) -> Vec<f64> {
    let mut coeffs = vec![1.0];
    let mut m: Vec<f64> = a.to_vec(); // M_1 = A
    for k in 1..=n {
        let c = -trace(&m, n) / k as f64;
        coeffs.push(c);
        if k < n {
            let mut shifted = m;
            for i in 0..n {
                shifted[i * n + i] += c;
            }
            m = mat_mul(a, &shifted, n);
        }
    }
    coeffs
}
