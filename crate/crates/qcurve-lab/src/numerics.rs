//! Uniform periodic grids, dual position/momentum representations through a
//! unitary discrete Fourier transform, and grid quadrature.
//!
//! The transform convention is symmetric: `phi(k) = dx/sqrt(2*pi) * sum_j
//! psi(x_j) exp(-i k x_j)` with `dx * dk * n = 2*pi`, so Parseval holds
//! without extra bookkeeping and the round trip is exact to machine
//! precision.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Uniform position lattice together with its conjugate momentum lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
    dx: f64,
    dk: f64,
    positions: Vec<f64>,
    momenta: Vec<f64>,
}

impl Grid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dk(&self) -> f64 {
        self.dk
    }

    /// `x_j = -L/2 + j*dx`, strictly ascending.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// `k = 2*pi*m/L` for integer `m` in `[-n/2, n/2)`, strictly ascending.
    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    /// Largest representable |k| (the one-sided Nyquist momentum).
    pub fn nyquist(&self) -> f64 {
        self.dk * (self.n as f64) / 2.0
    }
}

/// Build the periodic lattice. `n` must be a power of two, at least 8.
pub fn make_grid(n: usize, length: f64) -> Result<Grid> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::InvalidGridSize(n));
    }
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidLength(length));
    }
    let dx = length / n as f64;
    let dk = 2.0 * PI / length;
    let half = (n / 2) as i64;
    let positions = (0..n).map(|j| -length / 2.0 + j as f64 * dx).collect();
    let momenta = (0..n).map(|a| (a as i64 - half) as f64 * dk).collect();
    Ok(Grid {
        n,
        length,
        dx,
        dk,
        positions,
        momenta,
    })
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let fft = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        fft.process(buf);
    });
}

/// Unitary transform from position amplitudes to momentum amplitudes,
/// ordered to match `grid.momenta()` (ascending).
pub fn to_momentum(amp_x: &[Complex64], grid: &Grid) -> Result<Vec<Complex64>> {
    let n = grid.n;
    if amp_x.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: amp_x.len(),
        });
    }
    let mut buf = amp_x.to_vec();
    fft_in_place(&mut buf, false);
    let scale = grid.dx / (2.0 * PI).sqrt();
    let half = n / 2;
    let out = (0..n)
        .map(|a| {
            // FFT bin for lattice frequency m = a - n/2; the (-1)^m factor is
            // the exact phase exp(i k L/2) from the x = -L/2 origin.
            let bin = (a + half) % n;
            let sign = if (a + half).is_multiple_of(2) { 1.0 } else { -1.0 };
            buf[bin] * (scale * sign)
        })
        .collect();
    Ok(out)
}

/// Exact inverse of [`to_momentum`].
pub fn to_position(amp_k: &[Complex64], grid: &Grid) -> Result<Vec<Complex64>> {
    let n = grid.n;
    if amp_k.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: amp_k.len(),
        });
    }
    let half = n / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (a, &v) in amp_k.iter().enumerate() {
        let bin = (a + half) % n;
        let sign = if (a + half).is_multiple_of(2) { 1.0 } else { -1.0 };
        buf[bin] = v * sign;
    }
    fft_in_place(&mut buf, true);
    let scale = grid.dk / (2.0 * PI).sqrt();
    Ok(buf.into_iter().map(|v| v * scale).collect())
}

/// Normalized probability density on one grid axis with its quadrature weight.
#[derive(Debug, Clone)]
pub struct Density {
    values: Vec<f64>,
    weight: f64,
}

impl Density {
    /// Wrap raw density values; rejects NaN and negatives beyond -1e-12,
    /// clamps tiny negatives to zero, and renormalizes to unit mass to
    /// absorb floating-point drift.
    pub fn new(mut values: Vec<f64>, weight: f64) -> Result<Self> {
        let mut mass = 0.0;
        for v in values.iter_mut() {
            if v.is_nan() {
                return Err(Error::NanDensity);
            }
            if *v < -1e-12 {
                return Err(Error::NegativeDensity(*v));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
            mass += *v;
        }
        mass *= weight;
        if !(mass > 0.0) {
            return Err(Error::ZeroNorm);
        }
        for v in values.iter_mut() {
            *v /= mass;
        }
        Ok(Density { values, weight })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.weight
    }

    /// Mean of the density against the given axis samples.
    pub fn mean(&self, axis: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(axis)
            .map(|(v, x)| v * x)
            .sum::<f64>()
            * self.weight
    }
}

/// Pointwise squared modulus, renormalized under the axis quadrature weight.
pub fn density(amps: &[Complex64], weight: f64) -> Result<Density> {
    Density::new(amps.iter().map(|a| a.norm_sqr()).collect(), weight)
}

/// Normalized joint density over a square lattice (row-major `n*n` values,
/// `weight` = the 2D cell area).
#[derive(Debug, Clone)]
pub struct Density2D {
    n: usize,
    values: Vec<f64>,
    weight: f64,
}

impl Density2D {
    /// Same contract as [`Density::new`] over an `n*n` array.
    pub fn new(n: usize, mut values: Vec<f64>, weight: f64) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                got: values.len(),
            });
        }
        let mut mass = 0.0;
        for v in values.iter_mut() {
            if v.is_nan() {
                return Err(Error::NanDensity);
            }
            if *v < -1e-12 {
                return Err(Error::NegativeDensity(*v));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
            mass += *v;
        }
        mass *= weight;
        if !(mass > 0.0) {
            return Err(Error::ZeroNorm);
        }
        for v in values.iter_mut() {
            *v /= mass;
        }
        Ok(Density2D { n, values, weight })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.weight
    }
}

/// Normalized state with both representations kept consistent.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    grid: Arc<Grid>,
    amp_x: Vec<Complex64>,
    amp_k: Vec<Complex64>,
}

impl WaveFunction {
    /// Build from position amplitudes, L2-normalizing and deriving the
    /// momentum representation.
    pub fn from_position(grid: Arc<Grid>, mut amp_x: Vec<Complex64>) -> Result<Self> {
        if amp_x.len() != grid.n {
            return Err(Error::LengthMismatch {
                expected: grid.n,
                got: amp_x.len(),
            });
        }
        let norm2: f64 = amp_x.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dx;
        if !(norm2 > 1e-300) {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / norm2.sqrt();
        for a in amp_x.iter_mut() {
            *a *= inv;
        }
        let amp_k = to_momentum(&amp_x, &grid)?;
        Ok(WaveFunction { grid, amp_x, amp_k })
    }

    /// Build from momentum amplitudes (ascending `momenta()` order).
    pub fn from_momentum(grid: Arc<Grid>, mut amp_k: Vec<Complex64>) -> Result<Self> {
        if amp_k.len() != grid.n {
            return Err(Error::LengthMismatch {
                expected: grid.n,
                got: amp_k.len(),
            });
        }
        let norm2: f64 = amp_k.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dk;
        if !(norm2 > 1e-300) {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / norm2.sqrt();
        for a in amp_k.iter_mut() {
            *a *= inv;
        }
        let amp_x = to_position(&amp_k, &grid)?;
        Ok(WaveFunction { grid, amp_x, amp_k })
    }

    /// Assemble from already-consistent representations (unitary maps of an
    /// existing state); skips renormalization.
    pub(crate) fn from_parts(
        grid: Arc<Grid>,
        amp_x: Vec<Complex64>,
        amp_k: Vec<Complex64>,
    ) -> Self {
        debug_assert_eq!(amp_x.len(), grid.n);
        debug_assert_eq!(amp_k.len(), grid.n);
        WaveFunction { grid, amp_x, amp_k }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn amp_x(&self) -> &[Complex64] {
        &self.amp_x
    }

    pub fn amp_k(&self) -> &[Complex64] {
        &self.amp_k
    }

    pub fn position_density(&self) -> Result<Density> {
        density(&self.amp_x, self.grid.dx)
    }

    pub fn momentum_density(&self) -> Result<Density> {
        density(&self.amp_k, self.grid.dk)
    }

    /// Discrete mean of the momentum density.
    pub fn momentum_mean(&self) -> f64 {
        let rho = self
            .momentum_density()
            .expect("normalized state has a valid momentum density");
        rho.mean(self.grid.momenta())
    }
}

/// `sum_j conj(a_j) b_j dx` on a shared grid.
pub fn inner_product(a: &WaveFunction, b: &WaveFunction) -> Result<Complex64> {
    if a.grid.n != b.grid.n || a.grid.length != b.grid.length {
        return Err(Error::GridMismatch);
    }
    let s: Complex64 = a
        .amp_x
        .iter()
        .zip(&b.amp_x)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(s * a.grid.dx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_basics() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        assert!((g.dx() - PI / 4.0).abs() < 1e-15);
        assert!((g.dk() - 1.0).abs() < 1e-15);
        let expect: Vec<f64> = (-4..4).map(|m| m as f64).collect();
        for (k, e) in g.momenta().iter().zip(&expect) {
            assert!((k - e).abs() < 1e-14);
        }
        // conjugacy
        assert!((g.dx() * g.dk() * g.n() as f64 - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(matches!(make_grid(7, 1.0), Err(Error::InvalidGridSize(7))));
        assert!(matches!(make_grid(4, 1.0), Err(Error::InvalidGridSize(4))));
        assert!(matches!(
            make_grid(16, -1.0),
            Err(Error::InvalidLength(_))
        ));
        assert!(matches!(make_grid(16, 0.0), Err(Error::InvalidLength(_))));
    }

    #[test]
    fn constant_amplitude_concentrates_at_k0() {
        let g = Arc::new(make_grid(64, 10.0).unwrap());
        let amp = vec![c(1.0, 0.0); 64];
        let w = WaveFunction::from_position(g.clone(), amp).unwrap();
        let k0_index = 32; // k = 0
        // single occupied bin: |phi|^2 dk = 1, so |phi| = sqrt(L / 2 pi)
        let expect = (10.0 / (2.0 * std::f64::consts::PI)).sqrt();
        for (i, phi) in w.amp_k().iter().enumerate() {
            if i == k0_index {
                assert!((phi.norm() - expect).abs() < 1e-10);
            } else {
                assert!(phi.norm() < 1e-12, "leak at bin {i}: {}", phi.norm());
            }
        }
    }

    #[test]
    fn momentum_spike_gives_plane_wave() {
        let g = Arc::new(make_grid(32, 8.0).unwrap());
        let mut amp_k = vec![c(0.0, 0.0); 32];
        amp_k[20] = c(1.0, 0.0);
        let w = WaveFunction::from_momentum(g.clone(), amp_k).unwrap();
        let expect = 1.0 / 8f64.sqrt();
        for a in w.amp_x() {
            assert!((a.norm() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let g = make_grid(128, 17.0).unwrap();
        let amp: Vec<Complex64> = (0..128)
            .map(|j| c((j as f64 * 0.37).sin(), (j as f64 * 0.11).cos()))
            .collect();
        let phi = to_momentum(&amp, &g).unwrap();
        let back = to_position(&phi, &g).unwrap();
        let err = amp
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "round-trip error {err}");
    }

    #[test]
    fn forward_matches_direct_summation() {
        // independent oracle: O(n^2) direct evaluation of the unitary sum
        let g = make_grid(16, 5.0).unwrap();
        let amp: Vec<Complex64> = (0..16)
            .map(|j| c((j as f64 * 0.7).cos(), (j as f64 * 1.3).sin()))
            .collect();
        let phi = to_momentum(&amp, &g).unwrap();
        for (a, &k) in g.momenta().iter().enumerate() {
            let mut s = c(0.0, 0.0);
            for (j, &x) in g.positions().iter().enumerate() {
                s += amp[j] * Complex64::from_polar(1.0, -k * x);
            }
            s *= g.dx() / (2.0 * PI).sqrt();
            assert!((s - phi[a]).norm() < 1e-12, "bin {a}");
        }
    }

    #[test]
    fn shift_theorem_on_lattice() {
        let g = Arc::new(make_grid(16, 4.0).unwrap());
        let base: Vec<Complex64> = (0..16)
            .map(|j| c((-((j as f64 - 8.0) / 3.0).powi(2)).exp(), 0.0))
            .collect();
        let w = WaveFunction::from_position(g.clone(), base.clone()).unwrap();
        let k0 = 3.0 * g.dk();
        let shifted: Vec<Complex64> = base
            .iter()
            .zip(g.positions())
            .map(|(a, &x)| a * Complex64::from_polar(1.0, k0 * x))
            .collect();
        let ws = WaveFunction::from_position(g.clone(), shifted).unwrap();
        // |phi|^2 permutes by exactly 3 bins
        let n = g.n();
        for a in 0..n - 3 {
            let d = (ws.amp_k()[a + 3].norm_sqr() - w.amp_k()[a].norm_sqr()).abs();
            assert!(d < 1e-12, "bin {a}: {d}");
        }
    }

    #[test]
    fn inner_product_contract() {
        let g = Arc::new(make_grid(64, 12.0).unwrap());
        let amp: Vec<Complex64> = g
            .positions()
            .iter()
            .map(|&x| c((-x * x).exp(), 0.0))
            .collect();
        let w = WaveFunction::from_position(g.clone(), amp).unwrap();
        let ip = inner_product(&w, &w).unwrap();
        assert!((ip.re - 1.0).abs() < 1e-9);
        assert!(ip.im.abs() < 1e-12);

        // orthogonal momentum eigenvectors
        let mut a1 = vec![c(0.0, 0.0); 64];
        let mut a2 = vec![c(0.0, 0.0); 64];
        a1[10] = c(1.0, 0.0);
        a2[11] = c(1.0, 0.0);
        let w1 = WaveFunction::from_momentum(g.clone(), a1).unwrap();
        let w2 = WaveFunction::from_momentum(g.clone(), a2).unwrap();
        assert!(inner_product(&w1, &w2).unwrap().norm() < 1e-12);

        let g2 = Arc::new(make_grid(64, 13.0).unwrap());
        let w3 = WaveFunction::from_position(
            g2.clone(),
            g2.positions().iter().map(|&x| c((-x * x).exp(), 0.0)).collect(),
        )
        .unwrap();
        assert!(matches!(inner_product(&w, &w3), Err(Error::GridMismatch)));
    }

    #[test]
    fn gaussian_packet_overlap_matches_closed_form() {
        // |<g(c1), g(c2)>| = exp(-(c1-c2)^2 / (4 sigma^2))
        let g = Arc::new(make_grid(256, 40.0).unwrap());
        let packet = |center: f64| {
            let amp: Vec<Complex64> = g
                .positions()
                .iter()
                .map(|&x| c((-(x - center).powi(2) / 2.0).exp(), 0.0))
                .collect();
            WaveFunction::from_position(g.clone(), amp).unwrap()
        };
        let w1 = packet(-2.0);
        let w2 = packet(1.5);
        let got = inner_product(&w1, &w2).unwrap().norm();
        let expect = (-(3.5f64).powi(2) / 4.0).exp();
        assert!((got - expect).abs() < 1e-9);

        let far1 = packet(-12.0);
        let far2 = packet(12.0);
        assert!(inner_product(&far1, &far2).unwrap().norm() < 1e-8);
    }

    #[test]
    fn parseval_holds() {
        let g = Arc::new(make_grid(128, 9.0).unwrap());
        let amp: Vec<Complex64> = (0..128)
            .map(|j| c((j as f64 * 0.21).sin() + 0.3, (j as f64 * 0.13).cos()))
            .collect();
        let w = WaveFunction::from_position(g.clone(), amp).unwrap();
        let px: f64 = w.amp_x().iter().map(|a| a.norm_sqr()).sum::<f64>() * g.dx();
        let pk: f64 = w.amp_k().iter().map(|a| a.norm_sqr()).sum::<f64>() * g.dk();
        assert!((px - pk).abs() < 1e-10);
        assert!((pk - 1.0).abs() < 1e-9);
    }

    #[test]
    fn density_contract() {
        let g = make_grid(32, 5.0).unwrap();
        let amp = vec![c(0.2, 0.1); 32];
        let rho = density(&amp, g.dx()).unwrap();
        assert!((rho.mass() - 1.0).abs() < 1e-12);
        // plane wave -> uniform 1/L
        for v in rho.values() {
            assert!((v - 1.0 / 5.0).abs() < 1e-12);
        }
        assert!(matches!(
            Density::new(vec![1.0, f64::NAN], 1.0),
            Err(Error::NanDensity)
        ));
        assert!(matches!(
            Density::new(vec![1.0, -1.0], 1.0),
            Err(Error::NegativeDensity(_))
        ));
    }
}
