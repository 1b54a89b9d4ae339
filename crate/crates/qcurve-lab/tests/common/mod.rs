#![allow(dead_code)]

use num_complex::Complex64;

/// Dense complex matrix product, row-major `n x n`.
pub fn mat_mul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

/// `exp(-i H t)` of a real symmetric matrix by scaled-and-squared Taylor
/// series; an oracle independent of any eigendecomposition.
pub fn exp_minus_i_ht(h: &[f64], n: usize, t: f64) -> Vec<Complex64> {
    let norm: f64 = h.iter().map(|x| x.abs()).fold(0.0, f64::max) * t.abs() * n as f64;
    let squarings = norm.max(1.0).log2().ceil().max(0.0) as u32 + 1;
    let scale = t / f64::powi(2.0, squarings as i32);

    let a: Vec<Complex64> = h.iter().map(|&x| Complex64::new(0.0, -x * scale)).collect();
    let mut result = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        result[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let mut term = result.clone();
    for order in 1..40 {
        term = mat_mul(&term, &a, n);
        for v in term.iter_mut() {
            *v /= order as f64;
        }
        for (r, &x) in result.iter_mut().zip(&term) {
            *r += x;
        }
    }
    for _ in 0..squarings {
        result = mat_mul(&result, &result, n);
    }
    result
}
