//! Exact finite-level transition dynamics: the two-state closed form, its
//! mixing-angle decomposition, the golden-rule approximation, the N-state
//! eigendecomposition formulas, and the oscillating position/momentum
//! densities of a driven two-state superposition.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, Eigen, SymMatrix};
use crate::numerics::{inner_product, Density, Grid, WaveFunction};

/// Two unperturbed eigenfrequencies plus the real symmetric interaction
/// matrix elements (`w21 = w12` by Hermiticity, stored once).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelSystem {
    pub omega1: f64,
    pub omega2: f64,
    pub w11: f64,
    pub w12: f64,
    pub w22: f64,
}

impl TwoLevelSystem {
    pub fn total1(&self) -> f64 {
        self.omega1 + self.w11
    }

    pub fn total2(&self) -> f64 {
        self.omega2 + self.w22
    }
}

/// Gap `eta`, eigenfrequencies `lambda+-`, and mixing angle `theta`.
///
/// `theta` lives in `[0, pi/2]`; for negative coupling `w12` the transition
/// amplitude picks up an overall sign with no effect on probabilities, so the
/// signed `sin 2 theta = 2 w12 / eta` is carried separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelSpectrum {
    pub eta: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub theta: f64,
    sin_2theta: f64,
    cos_2theta: f64,
}

impl TwoLevelSpectrum {
    /// Signed `sin 2 theta = 2 w12 / eta`.
    pub fn sin_2theta(&self) -> f64 {
        self.sin_2theta
    }

    pub fn cos_2theta(&self) -> f64 {
        self.cos_2theta
    }
}

/// Diagonalize the 2x2 total Hamiltonian. The fully degenerate case
/// `eta = 0` returns the diagonal spectrum with `theta = 0`.
pub fn two_level_spectrum(sys: &TwoLevelSystem) -> TwoLevelSpectrum {
    let d = sys.total1() - sys.total2();
    let eta = (d * d + 4.0 * sys.w12 * sys.w12).sqrt();
    let mean = (sys.total1() + sys.total2()) / 2.0;
    if eta == 0.0 {
        return TwoLevelSpectrum {
            eta,
            lambda_plus: mean,
            lambda_minus: mean,
            theta: 0.0,
            sin_2theta: 0.0,
            cos_2theta: 1.0,
        };
    }
    let sin_2theta = 2.0 * sys.w12 / eta;
    let cos_2theta = d / eta;
    let theta = 0.5 * f64::atan2(sin_2theta.abs(), cos_2theta);
    TwoLevelSpectrum {
        eta,
        lambda_plus: mean + eta / 2.0,
        lambda_minus: mean - eta / 2.0,
        theta,
        sin_2theta,
        cos_2theta,
    }
}

/// Exact coefficients of the evolved initial eigenstate:
/// `alpha1 = cos^2(theta) e^{-i l+ t} + sin^2(theta) e^{-i l- t}` and
/// `alpha2 = sin(2 theta) (e^{-i l+ t} - e^{-i l- t}) / 2`.
pub fn transition_coefficients(sys: &TwoLevelSystem, t: f64) -> (Complex64, Complex64) {
    let sp = two_level_spectrum(sys);
    let ep = Complex64::from_polar(1.0, -sp.lambda_plus * t);
    let em = Complex64::from_polar(1.0, -sp.lambda_minus * t);
    let c2 = (1.0 + sp.cos_2theta) / 2.0; // cos^2 theta
    let s2 = (1.0 - sp.cos_2theta) / 2.0; // sin^2 theta
    let alpha1 = ep * c2 + em * s2;
    let alpha2 = (ep - em) * (sp.sin_2theta / 2.0);
    (alpha1, alpha2)
}

/// `|alpha2(t)|^2 = (4 w12^2 / eta^2) sin^2(eta t / 2)`, peaking at
/// `t = pi/eta` and first returning to 0 at `t = 2 pi / eta`.
pub fn transition_probability(sys: &TwoLevelSystem, t: f64) -> f64 {
    let sp = two_level_spectrum(sys);
    if sp.eta == 0.0 {
        return 0.0;
    }
    let amp = sp.sin_2theta * sp.sin_2theta;
    let s = (sp.eta * t / 2.0).sin();
    amp * s * s
}

/// Golden-rule approximation
/// `4 w12^2 / (w1 - w2)^2 * sin^2((w2 - w1) t / 2)`; singular on resonance.
pub fn fermi_approximation(sys: &TwoLevelSystem, t: f64) -> Result<f64> {
    let d = sys.omega1 - sys.omega2;
    if d == 0.0 {
        return Err(Error::Resonant);
    }
    let s = ((sys.omega2 - sys.omega1) * t / 2.0).sin();
    Ok(4.0 * sys.w12 * sys.w12 / (d * d) * s * s)
}

/// Entropy recurrence period `T = pi / eta` of the two-state densities.
pub fn oscillation_period(sys: &TwoLevelSystem) -> Result<f64> {
    let sp = two_level_spectrum(sys);
    if sp.eta == 0.0 {
        return Err(Error::DegenerateSpectrum);
    }
    Ok(PI / sp.eta)
}

/// Symmetric `N x N` total Hamiltonian (in inverse-time units) with its
/// eigendecomposition cached at construction.
#[derive(Debug, Clone)]
pub struct MultiLevelSystem {
    matrix: SymMatrix,
    eigen: Eigen,
}

impl MultiLevelSystem {
    /// `hmat` is row-major `dim x dim`; asymmetry is rejected.
    pub fn new(dim: usize, hmat: Vec<f64>) -> Result<Self> {
        let matrix = SymMatrix::new(dim, hmat)?;
        let eigen = jacobi_eigen(&matrix)?;
        Ok(MultiLevelSystem { matrix, eigen })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn eigenvector(&self, i: usize) -> &[f64] {
        self.eigen.vector(i)
    }
}

/// `alpha_j(t) = sum_i e^{-i lambda_i t} v_{ij} v_{i0}` for the evolution of
/// basis state 0; `j` is a zero-based state index.
pub fn multistate_coefficients(sys: &MultiLevelSystem, j: usize, t: f64) -> Result<Complex64> {
    let n = sys.dim();
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, dim: n });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let v = sys.eigenvector(i);
        acc += Complex64::from_polar(v[j] * v[0], -sys.eigenvalues()[i] * t);
    }
    Ok(acc)
}

/// The double-sum cosine form of `|alpha_j(t)|^2`.
pub fn multistate_probability(sys: &MultiLevelSystem, j: usize, t: f64) -> Result<f64> {
    let n = sys.dim();
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, dim: n });
    }
    let mut acc = 0.0;
    for i in 0..n {
        let vi = sys.eigenvector(i);
        acc += vi[j] * vi[j] * vi[0] * vi[0];
        for k in (i + 1)..n {
            let vk = sys.eigenvector(k);
            acc += 2.0
                * vi[j]
                * vi[0]
                * vk[j]
                * vk[0]
                * ((sys.eigenvalues()[i] - sys.eigenvalues()[k]) * t).cos();
        }
    }
    Ok(acc)
}

/// Position and momentum densities of the evolved two-state superposition,
/// assembled from the time-independent coefficient fields
/// `rho(t) = A1 + A2 sin^2(eta t / 2) + A3 sin(eta t)` (and the `B_i`
/// analogues in momentum space).
pub fn transition_densities(
    sys: &TwoLevelSystem,
    psi1: &WaveFunction,
    psi2: &WaveFunction,
    t: f64,
) -> Result<(Density, Density)> {
    let overlap = inner_product(psi1, psi2)?.norm();
    if overlap > 1e-8 {
        return Err(Error::NonOrthogonalBasis(overlap));
    }
    let sp = two_level_spectrum(sys);
    let s2t = sp.sin_2theta;
    let c2t = sp.cos_2theta;
    let sin2 = {
        let s = (sp.eta * t / 2.0).sin();
        s * s
    };
    let sin1 = (sp.eta * t).sin();

    let assemble = |a1: &[Complex64], a2: &[Complex64], weight: f64| -> Result<Density> {
        let values: Vec<f64> = a1
            .iter()
            .zip(a2)
            .map(|(p1, p2)| {
                let cross = p1.conj() * p2;
                let coeff1 = p1.norm_sqr();
                let coeff2 =
                    s2t * s2t * (p2.norm_sqr() - p1.norm_sqr()) + 2.0 * s2t * c2t * cross.re;
                let coeff3 = s2t * cross.im;
                coeff1 + coeff2 * sin2 + coeff3 * sin1
            })
            .collect();
        Density::new(values, weight)
    };

    let grid: &Arc<Grid> = psi1.grid();
    let rho_r = assemble(psi1.amp_x(), psi2.amp_x(), grid.dx())?;
    let rho_k = assemble(psi1.amp_k(), psi2.amp_k(), grid.dk())?;
    Ok((rho_r, rho_k))
}

/// Harmonic-oscillator-shaped orthonormal basis on the grid: Gaussian times
/// Hermite-style polynomials, re-orthonormalized numerically.
pub fn oscillator_basis(
    grid: &Arc<Grid>,
    count: usize,
    sigma2: f64,
) -> Result<Vec<WaveFunction>> {
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidSigma(sigma2));
    }
    let sigma = sigma2.sqrt();
    let mut basis: Vec<WaveFunction> = Vec::with_capacity(count);
    for m in 0..count {
        let mut amp: Vec<Complex64> = grid
            .positions()
            .iter()
            .map(|&x| {
                let u = x / sigma;
                Complex64::new(u.powi(m as i32) * (-u * u / 2.0).exp(), 0.0)
            })
            .collect();
        // modified Gram-Schmidt against the accepted states
        for prev in &basis {
            let raw = WaveFunction::from_position(grid.clone(), amp.clone())?;
            let proj = inner_product(prev, &raw)?;
            // from_position normalized `raw`; rescale the projection back
            let norm: f64 = (amp.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dx()).sqrt();
            for (a, p) in amp.iter_mut().zip(prev.amp_x()) {
                *a -= proj * norm * p;
            }
        }
        basis.push(WaveFunction::from_position(grid.clone(), amp)?);
    }
    Ok(basis)
}
