//! Truncated Fock-space linear algebra.
//!
//! Every mode carries an inclusive photon-number cutoff; a multimode state is a
//! dense amplitude tensor stored row-major with mode 0 varying slowest.
//! Moments are always evaluated by applying annihilators to both the bra and
//! the ket, so normally ordered expectation values are exact within the
//! truncated subspace regardless of how close the powers come to the cutoff.

mod density;
mod ensemble;
mod ket;
pub(crate) mod moments;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use density::DensityOperator;
pub use ensemble::Ensemble;
pub use ket::{inner, tensor, LadderKind, Ket, PureState};
pub use moments::{
    central_expect, expect, quadrature_uv_variance, quadrature_uv_variance_pair, MomentSource,
    Monomial,
};

pub use num_complex::Complex64 as C64;

/// Norm deviation allowed for a normalized state.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Hermiticity tolerance for density operators (max-abs entry of rho - rho^dagger).
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;
/// Most negative eigenvalue accepted in a density operator.
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Weight that a creation operator may push above the cutoff before it is an error.
pub const OVERFLOW_TOLERANCE: f64 = 1e-10;
/// Poisson tail mass discarded when choosing a coherent-state cutoff.
pub const COHERENT_TAIL: f64 = 1e-12;

/// Per-mode inclusive photon-number cutoffs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Truncation {
    cutoffs: Vec<usize>,
}

impl Truncation {
    pub fn new(cutoffs: Vec<usize>) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::ShapeMismatch("a truncation needs at least one mode".into()));
        }
        Ok(Self { cutoffs })
    }

    pub fn uniform(modes: usize, cutoff: usize) -> Result<Self> {
        Self::new(vec![cutoff; modes])
    }

    pub fn modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn cutoff(&self, mode: usize) -> usize {
        self.cutoffs[mode]
    }

    /// Tensor dimension, the product of `cutoff + 1` over modes.
    pub fn dim(&self) -> usize {
        self.cutoffs.iter().map(|c| c + 1).product()
    }

    /// Flat-index stride of each mode.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.modes()];
        for k in (0..self.modes().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * (self.cutoffs[k + 1] + 1);
        }
        strides
    }

    pub fn index(&self, occupation: &[usize]) -> usize {
        debug_assert_eq!(occupation.len(), self.modes());
        occupation
            .iter()
            .zip(&self.cutoffs)
            .fold(0, |acc, (&n, &c)| {
                debug_assert!(n <= c);
                acc * (c + 1) + n
            })
    }

    pub fn occupation(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.modes()];
        for k in (0..self.modes()).rev() {
            let d = self.cutoffs[k] + 1;
            occ[k] = index % d;
            index /= d;
        }
        occ
    }

    pub fn contains(&self, occupation: &[usize]) -> bool {
        occupation.len() == self.modes()
            && occupation.iter().zip(&self.cutoffs).all(|(n, c)| n <= c)
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.modes() {
            Ok(())
        } else {
            Err(Error::InvalidMode { mode, modes: self.modes() })
        }
    }

    pub fn check_pair(&self, modes: (usize, usize)) -> Result<()> {
        self.check_mode(modes.0)?;
        self.check_mode(modes.1)?;
        if modes.0 == modes.1 {
            return Err(Error::InvalidParameter(format!(
                "two-mode device needs distinct modes, got ({}, {})",
                modes.0, modes.1
            )));
        }
        Ok(())
    }

    pub fn concat(&self, other: &Truncation) -> Truncation {
        let mut cutoffs = self.cutoffs.clone();
        cutoffs.extend_from_slice(&other.cutoffs);
        Truncation { cutoffs }
    }

    /// Same truncation with one mode's cutoff replaced.
    pub fn with_cutoff(&self, mode: usize, cutoff: usize) -> Truncation {
        let mut cutoffs = self.cutoffs.clone();
        cutoffs[mode] = cutoff;
        Truncation { cutoffs }
    }

    /// Element-wise maximum of two truncations with equal mode count.
    pub fn union(&self, other: &Truncation) -> Result<Truncation> {
        if self.modes() != other.modes() {
            return Err(Error::ShapeMismatch(format!(
                "{} modes vs {} modes",
                self.modes(),
                other.modes()
            )));
        }
        Ok(Truncation {
            cutoffs: self
                .cutoffs
                .iter()
                .zip(&other.cutoffs)
                .map(|(a, b)| *a.max(b))
                .collect(),
        })
    }

    /// Every occupation tuple in flat-index order.
    pub fn occupations(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.dim()).map(move |i| self.occupation(i))
    }
}

/// Moment order the default cutoffs are sized for: the discarded tail is
/// weighted by `(n + 1)^MOMENT_ORDER` so that normally ordered moments up to
/// this order per mode stay accurate, not only the norm.
pub const MOMENT_ORDER: i32 = 4;

/// Smallest cutoff for a coherent amplitude `alpha`, by [`weighted_tail_cutoff`]
/// on the Poisson distribution of mean `|alpha|^2`.
pub fn coherent_cutoff(alpha: C64) -> usize {
    let mean = alpha.norm_sqr();
    if mean == 0.0 {
        return 0;
    }
    let nmax = (mean + 25.0 * mean.sqrt() + 80.0).ceil() as usize;
    let mut probs = Vec::with_capacity(nmax + 1);
    let mut log_p = -mean;
    for n in 0..=nmax {
        if n > 0 {
            log_p += mean.ln() - (n as f64).ln();
        }
        probs.push(log_p.exp());
    }
    weighted_tail_cutoff(&probs, COHERENT_TAIL)
}

/// Smallest `N` with `sum_{n > N} p_n (n + 1)^MOMENT_ORDER < tail`.
pub fn weighted_tail_cutoff(probs: &[f64], tail: f64) -> usize {
    let mut above = 0.0;
    let mut cutoff = probs.len().saturating_sub(1);
    for n in (0..probs.len()).rev() {
        if above >= tail {
            break;
        }
        cutoff = n;
        above += probs[n] * ((n + 1) as f64).powi(MOMENT_ORDER);
    }
    cutoff
}

/// Smallest `N` with `sum_{n > N} e^{-mean} mean^n / n! < tail`.
pub fn poisson_cutoff(mean: f64, tail: f64) -> usize {
    if mean == 0.0 {
        return 0;
    }
    let nmax = (mean + 20.0 * mean.sqrt() + 60.0).ceil() as usize;
    let mut probs = Vec::with_capacity(nmax + 1);
    let mut log_p = -mean;
    for n in 0..=nmax {
        if n > 0 {
            log_p += mean.ln() - (n as f64).ln();
        }
        probs.push(log_p.exp());
    }
    // suffix sums: tail_above[n] = sum over k > n
    let mut above = 0.0;
    let mut cutoff = nmax;
    for n in (0..=nmax).rev() {
        if above >= tail {
            break;
        }
        cutoff = n;
        above += probs[n];
    }
    cutoff
}

/// `sqrt((n + p)! / n!)`, the ladder factor for `p` steps starting at `n`.
pub(crate) fn ladder_factor(n: usize, p: usize) -> f64 {
    let mut f = 1.0;
    for k in 1..=p {
        f *= ((n + k) as f64).sqrt();
    }
    f
}
