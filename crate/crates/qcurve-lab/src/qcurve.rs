//! Entropy curves: sample S(t) for an evolving state over a time interval
//! and classify the resulting series as constant, increasing, decreasing,
//! or neither.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::dispersion::{
    check_in_domain, coherent_state, conjugate, propagate_exact, propagate_taylor,
    CoherentStateParams, DispersionModel,
};
use crate::entropy::{phase_space_entropy, EntropyValue};
use crate::error::{Error, Result};
use crate::numerics::{Grid, WaveFunction};
use crate::transitions::MultiLevelSystem;
use crate::twoparticle::{make_two_particle, two_particle_entropy, Statistics};

/// Which single-particle propagator drives a dispersive curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagator {
    Exact,
    Taylor,
}

impl Propagator {
    fn apply(self, w: &WaveFunction, t: f64, model: &DispersionModel) -> WaveFunction {
        match self {
            Propagator::Exact => propagate_exact(w, t, model),
            Propagator::Taylor => propagate_taylor(w, t, model),
        }
    }
}

/// The evolving state behind an entropy curve.
#[derive(Debug, Clone)]
pub enum QCurveState {
    /// A free single particle; the sample at time `t` evolves `initial`
    /// forward by `t`.
    Dispersive {
        initial: WaveFunction,
        model: DispersionModel,
        propagator: Propagator,
    },
    /// A superposition over a finite orthonormal basis evolving under a
    /// finite-dimensional coupling matrix.
    FiniteLevel {
        system: MultiLevelSystem,
        basis: Vec<WaveFunction>,
        initial: Vec<Complex64>,
    },
    /// Two free (anti)symmetrized particles.
    TwoParticleFree {
        psi1: WaveFunction,
        psi2: WaveFunction,
        stats: Statistics,
        model: DispersionModel,
    },
}

/// An entropy curve: a state sampled uniformly on `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct QCurve {
    state: QCurveState,
    t0: f64,
    t1: f64,
    n_samples: usize,
}

impl QCurve {
    pub fn new(state: QCurveState, t0: f64, t1: f64, n_samples: usize) -> Result<Self> {
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidInterval { t0, t1 });
        }
        if n_samples < 2 {
            return Err(Error::TooFewSteps {
                min: 2,
                got: n_samples,
            });
        }
        if let QCurveState::FiniteLevel {
            system,
            basis,
            initial,
        } = &state
        {
            if basis.len() != system.dim() || initial.len() != system.dim() {
                return Err(Error::LengthMismatch {
                    expected: system.dim(),
                    got: basis.len().min(initial.len()),
                });
            }
        }
        Ok(QCurve {
            state,
            t0,
            t1,
            n_samples,
        })
    }

    pub fn state(&self) -> &QCurveState {
        &self.state
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples)
            .map(|i| self.t0 + (self.t1 - self.t0) * i as f64 / (self.n_samples - 1) as f64)
            .collect()
    }
}

/// Uniformly sampled entropy series, with free-form metadata for reports.
#[derive(Debug, Clone)]
pub struct EntropySeries {
    times: Vec<f64>,
    s_r: Vec<f64>,
    s_k: Vec<f64>,
    pub meta: BTreeMap<String, String>,
}

impl EntropySeries {
    pub fn new(times: Vec<f64>, s_r: Vec<f64>, s_k: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::SeriesTooShort {
                min: 2,
                got: times.len(),
            });
        }
        if s_r.len() != times.len() || s_k.len() != times.len() {
            return Err(Error::LengthMismatch {
                expected: times.len(),
                got: s_r.len().min(s_k.len()),
            });
        }
        Ok(EntropySeries {
            times,
            s_r,
            s_k,
            meta: BTreeMap::new(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn s_r(&self) -> &[f64] {
        &self.s_r
    }

    pub fn s_k(&self) -> &[f64] {
        &self.s_k
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn total(&self) -> Vec<f64> {
        self.s_r
            .iter()
            .zip(&self.s_k)
            .map(|(r, k)| r + k)
            .collect()
    }
}

/// Curve shape label assigned by [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveClass {
    Constant,
    Increasing,
    Decreasing,
    Other,
}

impl CurveClass {
    pub fn letter(self) -> char {
        match self {
            CurveClass::Constant => 'C',
            CurveClass::Increasing => 'I',
            CurveClass::Decreasing => 'D',
            CurveClass::Other => 'O',
        }
    }
}

impl std::fmt::Display for CurveClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Label a sampled series by its first differences, with `eps` absorbing
/// numerical wiggle: constant if the whole range stays within `eps`,
/// increasing if no step drops below `-eps`, decreasing if no step rises
/// above `eps`, otherwise other.
pub fn classify(values: &[f64], eps: f64) -> Result<CurveClass> {
    if values.len() < 2 {
        return Err(Error::SeriesTooShort {
            min: 2,
            got: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NanDensity);
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if max - min <= eps {
        return Ok(CurveClass::Constant);
    }
    let mut non_decreasing = true;
    let mut non_increasing = true;
    for pair in values.windows(2) {
        let d = pair[1] - pair[0];
        if d < -eps {
            non_decreasing = false;
        }
        if d > eps {
            non_increasing = false;
        }
    }
    Ok(match (non_decreasing, non_increasing) {
        (true, false) => CurveClass::Increasing,
        (false, true) => CurveClass::Decreasing,
        _ => CurveClass::Other,
    })
}

/// Coefficients of the superposition at time `t`: project the initial
/// vector onto the eigenbasis, advance the phases, and project back.
fn evolved_coefficients(sys: &MultiLevelSystem, initial: &[Complex64], t: f64) -> Vec<Complex64> {
    let dim = sys.dim();
    let mut modes = Vec::with_capacity(dim);
    for i in 0..dim {
        let v = sys.eigenvector(i);
        let b: Complex64 = v.iter().zip(initial).map(|(vm, cm)| cm * *vm).sum();
        modes.push(b * Complex64::from_polar(1.0, -sys.eigenvalues()[i] * t));
    }
    (0..dim)
        .map(|j| {
            (0..dim)
                .map(|i| modes[i] * sys.eigenvector(i)[j])
                .sum::<Complex64>()
        })
        .collect()
}

fn entropy_at(state: &QCurveState, t: f64) -> Result<EntropyValue> {
    match state {
        QCurveState::Dispersive {
            initial,
            model,
            propagator,
        } => phase_space_entropy(&propagator.apply(initial, t, model)),
        QCurveState::FiniteLevel {
            system,
            basis,
            initial,
        } => {
            let coeffs = evolved_coefficients(system, initial, t);
            let grid = basis[0].grid().clone();
            let n = grid.n();
            let mut amp = vec![Complex64::new(0.0, 0.0); n];
            for (c, b) in coeffs.iter().zip(basis) {
                for (a, p) in amp.iter_mut().zip(b.amp_x()) {
                    *a += c * p;
                }
            }
            phase_space_entropy(&WaveFunction::from_position(grid, amp)?)
        }
        QCurveState::TwoParticleFree {
            psi1,
            psi2,
            stats,
            model,
        } => {
            let pair = make_two_particle(
                propagate_exact(psi1, t, model),
                propagate_exact(psi2, t, model),
                *stats,
            )?;
            two_particle_entropy(&pair)
        }
    }
}

/// Sample the entropy of the curve's state at each of its time points;
/// samples are independent and evaluated concurrently.
pub fn sample_entropy_series(curve: &QCurve) -> Result<EntropySeries> {
    let times = curve.times();
    let samples = crate::map_indexed(times.len(), |i| entropy_at(&curve.state, times[i]));
    let mut s_r = Vec::with_capacity(times.len());
    let mut s_k = Vec::with_capacity(times.len());
    for s in samples {
        let e = s?;
        s_r.push(e.s_r);
        s_k.push(e.s_k);
    }
    EntropySeries::new(times, s_r, s_k)
}

/// A free-particle curve whose entropy decreases over `[0, horizon]`: run a
/// coherent packet forward to the horizon, then conjugate it. The conjugate
/// retraces the spreading in reverse and refocuses into the original packet
/// at `t = horizon`.
pub fn make_decreasing_from_coherent(
    params: &CoherentStateParams,
    model: &DispersionModel,
    grid: &Arc<Grid>,
    horizon: f64,
    n_samples: usize,
) -> Result<QCurve> {
    let times: Vec<f64> = (0..n_samples)
        .map(|i| horizon * i as f64 / (n_samples.max(2) - 1) as f64)
        .collect();
    check_in_domain(params, model, grid, &times)?;
    let spread = conjugate(&propagate_exact(&coherent_state(params, grid)?, horizon, model));
    QCurve::new(
        QCurveState::Dispersive {
            initial: spread,
            model: *model,
            propagator: Propagator::Exact,
        },
        0.0,
        horizon,
        n_samples,
    )
}
