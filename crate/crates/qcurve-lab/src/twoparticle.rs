//! Symmetrized (boson) and antisymmetrized (fermion) two-particle states,
//! their joint densities with the exchange-interference term, the joint
//! phase-space entropy, and the collision of two counter-propagating
//! coherent packets.
//!
//! Joint densities are assembled straight from the four 1D factor arrays via
//! the three-term exchange formula; the full n^2 joint amplitude is never
//! materialized.

use std::sync::Arc;

use num_complex::Complex64;

use crate::dispersion::{
    check_in_domain, coherent_state, propagate_exact, CoherentStateParams, DispersionModel,
};
use crate::entropy::{joint_entropy_2d, EntropyValue};
use crate::error::{Error, Result};
use crate::numerics::{inner_product, Density2D, Grid, WaveFunction};
use crate::qcurve::EntropySeries;

/// Exchange statistics: fermions take the "-" sign in the two-particle
/// state, bosons the "+" sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    Fermion,
    Boson,
}

impl Statistics {
    /// Sign of the exchange term in the (anti)symmetrized state.
    fn exchange_sign(self) -> f64 {
        match self {
            Statistics::Fermion => -1.0,
            Statistics::Boson => 1.0,
        }
    }
}

/// (Anti)symmetrized pair of single-particle factors with the normalization
/// constant `C_t = 2 (1 -+ |<psi1|psi2>|^2)`.
#[derive(Debug, Clone)]
pub struct TwoParticleState {
    psi1: WaveFunction,
    psi2: WaveFunction,
    stats: Statistics,
    c_t: f64,
}

/// Build the pair state; fermions with (near-)identical factors are
/// rejected, since antisymmetrization annihilates them.
pub fn make_two_particle(
    psi1: WaveFunction,
    psi2: WaveFunction,
    stats: Statistics,
) -> Result<TwoParticleState> {
    let overlap = inner_product(&psi1, &psi2)?.norm();
    let c_t = match stats {
        Statistics::Fermion => {
            if overlap > 1.0 - 1e-10 {
                return Err(Error::PauliDegenerate(overlap));
            }
            2.0 * (1.0 - overlap * overlap)
        }
        Statistics::Boson => 2.0 * (1.0 + overlap * overlap),
    };
    Ok(TwoParticleState {
        psi1,
        psi2,
        stats,
        c_t,
    })
}

impl TwoParticleState {
    pub fn psi1(&self) -> &WaveFunction {
        &self.psi1
    }

    pub fn psi2(&self) -> &WaveFunction {
        &self.psi2
    }

    pub fn stats(&self) -> Statistics {
        self.stats
    }

    pub fn c_t(&self) -> f64 {
        self.c_t
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.psi1.grid()
    }
}

fn joint_density(
    a1: &[Complex64],
    a2: &[Complex64],
    weight_1d: f64,
    sign: f64,
    c_t: f64,
) -> Result<Density2D> {
    let n = a1.len();
    // cross[j] = psi1(x_j) conj(psi2(x_j)); the interference term at
    // (x_i, x_j) is sign * 2 Re(cross[i] conj(cross[j]))
    let cross: Vec<Complex64> = a1.iter().zip(a2).map(|(p, q)| p * q.conj()).collect();
    let rho1: Vec<f64> = a1.iter().map(|p| p.norm_sqr()).collect();
    let rho2: Vec<f64> = a2.iter().map(|p| p.norm_sqr()).collect();

    let rows = crate::map_indexed(n, |i| {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let product = rho1[i] * rho2[j] + rho1[j] * rho2[i];
            let interference = 2.0 * (cross[i] * cross[j].conj()).re;
            row.push((product + sign * interference) / c_t);
        }
        row
    });
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    Density2D::new(n, values, weight_1d * weight_1d)
}

/// Joint position density over `(x1, x2)`; exchange-symmetric, and zero on
/// the diagonal for fermions.
pub fn joint_density_position(s: &TwoParticleState) -> Result<Density2D> {
    joint_density(
        s.psi1.amp_x(),
        s.psi2.amp_x(),
        s.grid().dx(),
        s.stats.exchange_sign(),
        s.c_t,
    )
}

/// Joint momentum density over `(k1, k2)`.
pub fn joint_density_momentum(s: &TwoParticleState) -> Result<Density2D> {
    joint_density(
        s.psi1.amp_k(),
        s.psi2.amp_k(),
        s.grid().dk(),
        s.stats.exchange_sign(),
        s.c_t,
    )
}

/// Joint entropy `S_r + S_k` of the pair state.
pub fn two_particle_entropy(s: &TwoParticleState) -> Result<EntropyValue> {
    let s_r = joint_entropy_2d(&joint_density_position(s)?)?;
    let s_k = joint_entropy_2d(&joint_density_momentum(s)?)?;
    Ok(EntropyValue::new(s_r, s_k))
}

/// Collision of two coherent packets moving toward each other: packet 1 at
/// `c1` with momentum `+k1`, packet 2 at `c2 > c1` with momentum `-k1`.
#[derive(Debug, Clone)]
pub struct CollisionParams {
    pub k1: f64,
    pub c1: f64,
    pub c2: f64,
    pub sigma2: f64,
    pub model: DispersionModel,
    pub t_max: f64,
    pub n_steps: usize,
    pub stats: Statistics,
    /// Emit a position-density snapshot every this many time units.
    pub snapshot_stride: Option<f64>,
    /// Snapshot lattice subsampling: keep every `snapshot_subsample`-th point.
    pub snapshot_subsample: usize,
}

/// Subsampled joint position density at one sampled time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub axis: Vec<f64>,
    /// Row-major over (x1, x2) on the subsampled axis.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CollisionOutput {
    pub series: EntropySeries,
    pub snapshots: Vec<Snapshot>,
}

/// Run the collision: each sampled time evolves both packets from t = 0 with
/// the exact propagator, reassembles the pair state (so `C_t` is recomputed),
/// and records the joint entropy. Time samples are independent and evaluated
/// concurrently.
pub fn collision_scenario(p: &CollisionParams, grid: &Arc<Grid>) -> Result<CollisionOutput> {
    if p.n_steps < 8 {
        return Err(Error::TooFewSteps {
            min: 8,
            got: p.n_steps,
        });
    }
    if p.c1 >= p.c2 {
        return Err(Error::InvalidInterval { t0: p.c1, t1: p.c2 });
    }
    let params1 = CoherentStateParams::new(p.c1, p.k1, p.sigma2)?;
    let params2 = CoherentStateParams::new(p.c2, -p.k1, p.sigma2)?;
    let times: Vec<f64> = (0..p.n_steps)
        .map(|i| p.t_max * i as f64 / (p.n_steps - 1) as f64)
        .collect();
    check_in_domain(&params1, &p.model, grid, &times)?;
    check_in_domain(&params2, &p.model, grid, &times)?;

    let psi1_0 = coherent_state(&params1, grid)?;
    let psi2_0 = coherent_state(&params2, grid)?;

    let sub = p.snapshot_subsample.max(1);
    let wants_snapshot = |t: f64| -> bool {
        match p.snapshot_stride {
            Some(stride) if stride > 0.0 => {
                // closest sample to each stride multiple
                let phase = (t / stride).round() * stride;
                (t - phase).abs() <= 0.5 * p.t_max / (p.n_steps - 1) as f64
            }
            _ => false,
        }
    };

    let step = |i: usize| -> Result<(EntropyValue, Option<Snapshot>)> {
        let t = times[i];
        let psi1 = propagate_exact(&psi1_0, t, &p.model);
        let psi2 = propagate_exact(&psi2_0, t, &p.model);
        let pair = make_two_particle(psi1, psi2, p.stats)?;
        let entropy = two_particle_entropy(&pair)?;
        let snapshot = if wants_snapshot(t) {
            let rho = joint_density_position(&pair)?;
            let n = rho.n();
            let axis: Vec<f64> = grid.positions().iter().copied().step_by(sub).collect();
            let m = axis.len();
            let mut values = Vec::with_capacity(m * m);
            for i in (0..n).step_by(sub) {
                for j in (0..n).step_by(sub) {
                    values.push(rho.get(i, j));
                }
            }
            Some(Snapshot {
                time: t,
                axis,
                values,
            })
        } else {
            None
        };
        Ok((entropy, snapshot))
    };

    let results = crate::map_indexed(p.n_steps, step);
    let mut s_r = Vec::with_capacity(p.n_steps);
    let mut s_k = Vec::with_capacity(p.n_steps);
    let mut snapshots = Vec::new();
    for r in results {
        let (e, snap) = r?;
        s_r.push(e.s_r);
        s_k.push(e.s_k);
        if let Some(snap) = snap {
            snapshots.push(snap);
        }
    }
    Ok(CollisionOutput {
        series: EntropySeries::new(times, s_r, s_k)?,
        snapshots,
    })
}
