//! Differential entropy functionals over grid densities, the phase-space sum
//! `S = S_r + S_k`, and the closed form for evolving Gaussian packets.
//!
//! All entropies are in nats. The convention `0 ln 0 = 0` is applied with a
//! hard floor at 1e-300.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, SymMatrix};
use crate::numerics::{Density, Density2D, WaveFunction};

/// Position entropy, momentum entropy, and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyValue {
    pub s_r: f64,
    pub s_k: f64,
    pub total: f64,
}

impl EntropyValue {
    pub fn new(s_r: f64, s_k: f64) -> Self {
        EntropyValue {
            s_r,
            s_k,
            total: s_r + s_k,
        }
    }
}

const DENSITY_FLOOR: f64 = 1e-300;

fn entropy_of(values: &[f64], weight: f64) -> Result<f64> {
    let mut s = 0.0;
    for &v in values {
        if v.is_nan() {
            return Err(Error::NanDensity);
        }
        if v > DENSITY_FLOOR {
            s -= v * v.ln();
        }
    }
    Ok(s * weight)
}

/// `-sum_j rho_j ln(rho_j) w_j` under the axis quadrature weight.
pub fn differential_entropy(rho: &Density) -> Result<f64> {
    entropy_of(rho.values(), rho.weight())
}

/// Entropy of a joint two-particle density under the 2D quadrature weight.
pub fn joint_entropy_2d(rho2: &Density2D) -> Result<f64> {
    entropy_of(rho2.values(), rho2.weight())
}

/// `S = S_r + S_k` of a normalized single-particle state.
pub fn phase_space_entropy(w: &WaveFunction) -> Result<EntropyValue> {
    let s_r = differential_entropy(&w.position_density()?)?;
    let s_k = differential_entropy(&w.momentum_density()?)?;
    Ok(EntropyValue::new(s_r, s_k))
}

/// 1D closed form for an evolving minimum-uncertainty packet:
/// `(1 + ln pi) + 1/2 ln(1 + t^2 (H/sigma^2)^2)`.
pub fn gaussian_entropy_closed_form_1d(sigma2: f64, hess: f64, t: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    if !(hess > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let m = hess / sigma2;
    Ok(1.0 + PI.ln() + 0.5 * (t * t * m * m).ln_1p())
}

/// 3D closed form `3(1 + ln pi) + 1/2 ln det(I + t^2 (Sigma^-1 H)^2)`,
/// evaluated through the eigenvalues of `Sigma^-1/2 H Sigma^-1/2` (similar to
/// `Sigma^-1 H`) so large `t` cannot overflow the determinant.
pub fn gaussian_entropy_closed_form_3d(
    sigma2: &[[f64; 3]; 3],
    hess: &[[f64; 3]; 3],
    t: f64,
) -> Result<f64> {
    let flat = |m: &[[f64; 3]; 3]| -> Vec<f64> {
        m.iter().flat_map(|r| r.iter().copied()).collect()
    };
    let sig = SymMatrix::new(3, flat(sigma2))?;
    let hes = SymMatrix::new(3, flat(hess))?;

    let es = jacobi_eigen(&sig)?;
    if es.values.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    // S = Sigma^-1/2 H Sigma^-1/2 in the eigenbasis of Sigma
    let mut s = [[0.0; 3]; 3];
    #[allow(clippy::needless_range_loop)]
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    acc += es.vector(i)[a] * hes.get(a, b) * es.vector(j)[b];
                }
            }
            s[i][j] = acc / (es.values[i] * es.values[j]).sqrt();
        }
    }
    let sm = SymMatrix::new(3, s.iter().flat_map(|r| r.iter().copied()).collect())?;
    let eh = jacobi_eigen(&sm)?;
    if eh.values.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let mut logdet = 0.0;
    for &mu in &eh.values {
        logdet += (t * t * mu * mu).ln_1p();
    }
    Ok(3.0 * (1.0 + PI.ln()) + 0.5 * logdet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{density, make_grid, WaveFunction};
    use num_complex::Complex64;
    use std::sync::Arc;

    fn gaussian_density(grid_n: usize, length: f64, variance: f64) -> Density {
        let g = make_grid(grid_n, length).unwrap();
        let vals: Vec<f64> = g
            .positions()
            .iter()
            .map(|&x| (-x * x / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt())
            .collect();
        Density::new(vals, g.dx()).unwrap()
    }

    #[test]
    fn uniform_density_entropy_is_ln_l() {
        let g = make_grid(64, 10.0).unwrap();
        let vals = vec![0.1; 64];
        let rho = Density::new(vals, g.dx()).unwrap();
        let s = differential_entropy(&rho).unwrap();
        assert!((s - 10f64.ln()).abs() < 1e-6, "{s}");
    }

    #[test]
    fn gaussian_density_entropy_matches_closed_form() {
        // oracle: 1/2 ln(2 pi e v)
        for &v in &[0.5, 1.0, 2.3] {
            let rho = gaussian_density(512, 60.0, v);
            let s = differential_entropy(&rho).unwrap();
            let expect = 0.5 * (2.0 * PI * std::f64::consts::E * v).ln();
            assert!((s - expect).abs() < 1e-4, "v={v}: {s} vs {expect}");
        }
    }

    #[test]
    fn single_cell_density() {
        let g = make_grid(16, 4.0).unwrap();
        let mut vals = vec![0.0; 16];
        vals[5] = 1.0 / g.dx();
        let rho = Density::new(vals, g.dx()).unwrap();
        let s = differential_entropy(&rho).unwrap();
        assert!((s - g.dx().ln()).abs() < 1e-12);
        assert!(s <= 0.0);
    }

    #[test]
    fn minimum_uncertainty_packet_entropy() {
        let g = Arc::new(make_grid(512, 40.0).unwrap());
        for &sigma2 in &[0.5, 1.0, 2.0] {
            let amp: Vec<Complex64> = g
                .positions()
                .iter()
                .map(|&x| Complex64::new((-x * x / (2.0 * sigma2)).exp(), 0.0))
                .collect();
            let w = WaveFunction::from_position(g.clone(), amp).unwrap();
            let s = phase_space_entropy(&w).unwrap();
            assert!(
                (s.total - (1.0 + PI.ln())).abs() < 5e-3,
                "sigma2={sigma2}: {}",
                s.total
            );
            assert!((s.total - s.s_r - s.s_k).abs() <= f64::EPSILON * s.total.abs());
        }
    }

    #[test]
    fn closed_form_anchors() {
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let s0 = gaussian_entropy_closed_form_3d(&id, &id, 0.0).unwrap();
        assert!((s0 - 3.0 * (1.0 + PI.ln())).abs() < 1e-12);
        assert!((s0 - 6.434189).abs() < 1e-6);

        let s1 = gaussian_entropy_closed_form_1d(1.0, 1.0, 1.0).unwrap();
        assert!((s1 - (1.0 + PI.ln() + 0.5 * 2f64.ln())).abs() < 1e-12);
        assert!((s1 - 2.491303).abs() < 1e-6);
    }

    #[test]
    fn closed_form_monotone_in_time() {
        let mut prev = f64::NEG_INFINITY;
        for i in 0..50 {
            let t = i as f64 * 0.5;
            let s = gaussian_entropy_closed_form_1d(1.7, 0.4, t).unwrap();
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn closed_form_rejects_indefinite() {
        assert!(gaussian_entropy_closed_form_1d(-1.0, 1.0, 0.0).is_err());
        assert!(gaussian_entropy_closed_form_1d(1.0, 0.0, 0.0).is_err());
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let bad = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(
            gaussian_entropy_closed_form_3d(&bad, &id, 1.0),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn closed_form_3d_matches_direct_logdet() {
        // oracle: direct det(I + t^2 M^2) with M = Sigma^-1 H for a diagonal case
        let sig = [[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.5]];
        let hes = [[0.5, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]];
        let t = 3.0;
        let mus = [0.5 / 2.0, 1.0 / 1.0, 2.0 / 0.5];
        let det: f64 = mus.iter().map(|m| 1.0 + t * t * m * m).product();
        let expect = 3.0 * (1.0 + PI.ln()) + 0.5 * det.ln();
        let got = gaussian_entropy_closed_form_3d(&sig, &hes, t).unwrap();
        assert!((got - expect).abs() < 1e-10);
    }

    #[test]
    fn translation_invariance_cyclic_shift() {
        let rho = gaussian_density(128, 30.0, 1.0);
        let s0 = differential_entropy(&rho).unwrap();
        let mut shifted = rho.values().to_vec();
        shifted.rotate_right(37);
        let rho_s = Density::new(shifted, rho.weight()).unwrap();
        let s1 = differential_entropy(&rho_s).unwrap();
        assert!((s0 - s1).abs() < 1e-13);
    }

    #[test]
    fn phase_invariance() {
        let g = Arc::new(make_grid(128, 20.0).unwrap());
        let amp: Vec<Complex64> = g
            .positions()
            .iter()
            .map(|&x| Complex64::new((-x * x / 2.0).exp(), 0.0))
            .collect();
        let w = WaveFunction::from_position(g.clone(), amp.clone()).unwrap();
        let phase = Complex64::from_polar(1.0, 0.8317);
        let w2 =
            WaveFunction::from_position(g.clone(), amp.iter().map(|a| a * phase).collect())
                .unwrap();
        let s1 = phase_space_entropy(&w).unwrap();
        let s2 = phase_space_entropy(&w2).unwrap();
        assert!((s1.total - s2.total).abs() < 1e-12);
    }

    #[test]
    fn quadrature_converges_to_closed_form() {
        // Gaussian density, error vs closed form decreases monotonically as n doubles
        let expect = 0.5 * (2.0 * PI * std::f64::consts::E * 1.0).ln();
        let mut prev_err = f64::INFINITY;
        for &n in &[128usize, 256, 512, 1024] {
            let rho = gaussian_density(n, 20.0, 1.0);
            let err = (differential_entropy(&rho).unwrap() - expect).abs();
            // below ~1e-13 the error is roundoff noise, not quadrature error
            assert!(err <= prev_err.max(1e-13), "n={n}: {err} vs {prev_err}");
            prev_err = err;
        }
    }

    #[test]
    fn joint_entropy_additivity_for_product() {
        let g = make_grid(128, 20.0).unwrap();
        let a = gaussian_density(128, 20.0, 1.0);
        let b = gaussian_density(128, 20.0, 0.7);
        let n = 128;
        let mut joint = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                joint[i * n + j] = a.values()[i] * b.values()[j];
            }
        }
        let rho2 = Density2D::new(n, joint, g.dx() * g.dx()).unwrap();
        let s = joint_entropy_2d(&rho2).unwrap();
        let expect =
            differential_entropy(&a).unwrap() + differential_entropy(&b).unwrap();
        assert!((s - expect).abs() < 1e-6);
    }

    #[test]
    fn joint_entropy_uniform_square() {
        let n = 32;
        let l = 5.0;
        let dx = l / n as f64;
        let vals = vec![1.0 / (l * l); n * n];
        let rho2 = Density2D::new(n, vals, dx * dx).unwrap();
        let s = joint_entropy_2d(&rho2).unwrap();
        assert!((s - 2.0 * l.ln()).abs() < 1e-10);
    }

    #[test]
    fn nan_rejected() {
        let g = make_grid(16, 4.0).unwrap();
        let amp = vec![Complex64::new(0.5, 0.0); 16];
        let mut rho = density(&amp, g.dx()).unwrap();
        // densities are validated at construction; feed NaN straight in
        let _ = &mut rho;
        assert!(matches!(
            entropy_of(&[0.5, f64::NAN], 1.0),
            Err(Error::NanDensity)
        ));
    }
}
