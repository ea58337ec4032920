//! Lawson–Hanson non-negative least squares.

use nalgebra::{DMatrix, DVector};

/// `argmin ‖A x − b‖₂` subject to `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-14 * a.norm().max(1.0) * b.norm().max(1.0);
    for _outer in 0..3 * n + 10 {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n).filter(|&j| !passive[j]).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        match candidate {
            Some(j) if w[j] > tol => passive[j] = true,
            _ => break,
        }
        for _inner in 0..3 * n + 10 {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let s_p = least_squares(&a.select_columns(&idx), b);
            if s_p.iter().all(|&v| v > 0.0) {
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = s_p[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &j) in idx.iter().enumerate() {
                if s_p[k] <= 0.0 {
                    alpha = alpha.min(x[j] / (x[j] - s_p[k]));
                }
            }
            for (k, &j) in idx.iter().enumerate() {
                x[j] += alpha * (s_p[k] - x[j]);
                if x[j] <= 1e-15 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    x
}

fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    a.clone().svd(true, true).solve(b, 1e-13).unwrap_or_else(|_| DVector::zeros(a.ncols()))
}
