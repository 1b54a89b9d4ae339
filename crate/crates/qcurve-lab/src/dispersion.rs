//! Positive-branch relativistic free-particle dispersion `w(k) =
//! c sqrt(k^2 + (mc/hbar)^2)`, its derivatives, coherent-state construction,
//! and the two spectral propagators (exact phase and second-order Taylor
//! phase around the packet's momentum center).

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{to_position, Grid, WaveFunction};

/// Physical constants of the free-particle model, natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionModel {
    pub c: f64,
    pub hbar_over_m: f64,
}

impl Default for DispersionModel {
    fn default() -> Self {
        DispersionModel {
            c: 1.0,
            hbar_over_m: 1.0,
        }
    }
}

impl DispersionModel {
    pub fn new(c: f64, hbar_over_m: f64) -> Result<Self> {
        if !(c > 0.0) || !(hbar_over_m > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(DispersionModel { c, hbar_over_m })
    }
}

/// `w(k) = c sqrt(k^2 + (c / (hbar/m))^2)`, positive energy branch.
pub fn omega(k: f64, model: &DispersionModel) -> f64 {
    let mc_over_hbar = model.c / model.hbar_over_m;
    model.c * (k * k + mc_over_hbar * mc_over_hbar).sqrt()
}

/// `v_g(k) = dw/dk = (hbar/m) k / sqrt(1 + (hbar k / (m c))^2)`; |v_g| < c.
pub fn group_velocity(k: f64, model: &DispersionModel) -> f64 {
    let u = model.hbar_over_m * k / model.c;
    model.hbar_over_m * k / (1.0 + u * u).sqrt()
}

/// `H(k) = d^2 w/dk^2 = (hbar/m) (1 + (hbar k / (m c))^2)^(-3/2)`, always > 0.
pub fn hessian(k: f64, model: &DispersionModel) -> f64 {
    let u = model.hbar_over_m * k / model.c;
    model.hbar_over_m * (1.0 + u * u).powf(-1.5)
}

/// The two distinct 3D Hessian eigenvalues at |k| = `knorm`:
/// the longitudinal `lambda1` and the doubly degenerate transverse
/// `lambda23`, with `lambda1 <= lambda23`.
pub fn hessian_eigenvalues_3d(knorm: f64, model: &DispersionModel) -> (f64, f64) {
    let u = model.hbar_over_m * knorm / model.c;
    let base = 1.0 + u * u;
    let lambda1 = model.hbar_over_m * base.powf(-1.5);
    let lambda23 = model.hbar_over_m * base.powf(-0.5);
    (lambda1, lambda23)
}

/// Parameters of a minimum-uncertainty Gaussian packet: amplitude
/// `exp(-(x - r0)^2 / (2 sigma2)) exp(i k0 x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentStateParams {
    pub r0: f64,
    pub k0: f64,
    pub sigma2: f64,
}

impl CoherentStateParams {
    pub fn new(r0: f64, k0: f64, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(Error::InvalidSigma(sigma2));
        }
        Ok(CoherentStateParams { r0, k0, sigma2 })
    }

    /// Anti-aliasing guard: the momentum support `|k0| + 4/sigma` must fit
    /// under the grid Nyquist momentum.
    pub fn check_aliasing(&self, grid: &Grid) -> Result<()> {
        let required = self.k0.abs() + 4.0 / self.sigma2.sqrt();
        let nyquist = grid.nyquist();
        if required >= nyquist {
            return Err(Error::AliasingGuard { required, nyquist });
        }
        Ok(())
    }
}

/// Sample the coherent packet on the grid; position density variance is
/// `sigma2/2` and momentum density variance `1/(2 sigma2)`.
pub fn coherent_state(params: &CoherentStateParams, grid: &Arc<Grid>) -> Result<WaveFunction> {
    params.check_aliasing(grid)?;
    let amp: Vec<Complex64> = grid
        .positions()
        .iter()
        .map(|&x| {
            let d = x - params.r0;
            let env = (-d * d / (2.0 * params.sigma2)).exp();
            env * Complex64::from_polar(1.0, params.k0 * x)
        })
        .collect();
    WaveFunction::from_position(grid.clone(), amp)
}

/// Single-particle position-density standard deviation of a coherent packet
/// after free evolution for time `t`: `sqrt((sigma2 + t^2 H(k0)^2 / sigma2) / 2)`.
pub fn packet_spread(params: &CoherentStateParams, model: &DispersionModel, t: f64) -> f64 {
    let h = hessian(params.k0, model);
    let sig_t2 = params.sigma2 + t * t * h * h / params.sigma2;
    (sig_t2 / 2.0).sqrt()
}

/// Runtime in-domain guard: packet center stays at least `5 sigma(t)` away
/// from the periodic boundary at every checked time.
pub fn check_in_domain(
    params: &CoherentStateParams,
    model: &DispersionModel,
    grid: &Grid,
    times: &[f64],
) -> Result<()> {
    let vg = group_velocity(params.k0, model);
    let half = grid.length() / 2.0;
    for &t in times {
        let center = params.r0 + vg * t;
        let required = center.abs() + 5.0 * packet_spread(params, model, t);
        if required > half {
            return Err(Error::OutOfDomain {
                time: t,
                required,
                available: half,
            });
        }
    }
    Ok(())
}

/// Exact spectral evolution: multiply each momentum amplitude by
/// `exp(-i w(k) t)`. The momentum density is unchanged pointwise.
pub fn propagate_exact(w: &WaveFunction, t: f64, model: &DispersionModel) -> WaveFunction {
    let grid = w.grid().clone();
    let amp_k: Vec<Complex64> = w
        .amp_k()
        .iter()
        .zip(grid.momenta())
        .map(|(phi, &k)| phi * Complex64::from_polar(1.0, -omega(k, model) * t))
        .collect();
    let amp_x = to_position(&amp_k, &grid).expect("grid-consistent amplitudes");
    // phase multiplication is unitary; skip renormalization to keep the
    // momentum density bit-identical
    WaveFunction::from_parts(grid, amp_x, amp_k)
}

/// Second-order (quantum dispersion transform) evolution with the quadratic
/// phase expanded around the packet's discrete momentum mean.
pub fn propagate_taylor(w: &WaveFunction, t: f64, model: &DispersionModel) -> WaveFunction {
    propagate_taylor_around(w, t, model, w.momentum_mean())
}

/// Same as [`propagate_taylor`] with an explicit expansion center.
pub fn propagate_taylor_around(
    w: &WaveFunction,
    t: f64,
    model: &DispersionModel,
    k0: f64,
) -> WaveFunction {
    let grid = w.grid().clone();
    // v_p(k0) . k0 = w(k0) on the positive branch (also the k0 -> 0 limit)
    let w0 = omega(k0, model);
    let vg = group_velocity(k0, model);
    let h = hessian(k0, model);
    let amp_k: Vec<Complex64> = w
        .amp_k()
        .iter()
        .zip(grid.momenta())
        .map(|(phi, &k)| {
            let dk = k - k0;
            let phase = w0 + vg * dk + 0.5 * h * dk * dk;
            phi * Complex64::from_polar(1.0, -phase * t)
        })
        .collect();
    let amp_x = to_position(&amp_k, &grid).expect("grid-consistent amplitudes");
    WaveFunction::from_parts(grid, amp_x, amp_k)
}

/// Pointwise complex conjugate in position space; the momentum density is
/// mirrored `k -> -k` and the entropy is unchanged.
pub fn conjugate(w: &WaveFunction) -> WaveFunction {
    let grid = w.grid().clone();
    let amp_x: Vec<Complex64> = w.amp_x().iter().map(|a| a.conj()).collect();
    WaveFunction::from_position(grid, amp_x).expect("conjugation preserves the norm")
}
