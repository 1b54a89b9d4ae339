//! A desk-scale laboratory for the phase-space entropy `S = S_r + S_k` of
//! quantum states: relativistic free-particle dispersion on a periodic grid,
//! finite-level transition dynamics, (anti)symmetrized two-particle collisions,
//! and classification of entropy time series into the blocks
//! constant / increasing / decreasing / oscillating.
//!
//! With the default `parallel` feature, independent time samples of an
//! entropy series are evaluated across threads with rayon; disabling the
//! feature falls back to an identical sequential path.

// `!(x > 0.0)` is used instead of `x <= 0.0` throughout the validation
// paths: the negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dispersion;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod numerics;
pub mod qcurve;
pub mod transitions;
pub mod twoparticle;

pub use error::{Error, Result};

/// Map `f` over `0..n`, in parallel when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
