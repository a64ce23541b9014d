use std::ops::Deref;

use super::{ladder_factor, Truncation, C64, NORM_TOLERANCE, OVERFLOW_TOLERANCE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Creation,
    Annihilation,
}

/// A vector in the truncated tensor basis with no normalization contract.
///
/// Ladder actions and superpositions produce `Ket`s; [`Ket::normalize`] turns
/// one back into a [`PureState`].
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    trunc: Truncation,
    amps: Vec<C64>,
}

impl Ket {
    pub fn zeros(trunc: Truncation) -> Self {
        let amps = vec![C64::new(0.0, 0.0); trunc.dim()];
        Self { trunc, amps }
    }

    pub fn basis(trunc: Truncation, occupation: &[usize]) -> Result<Self> {
        if !trunc.contains(occupation) {
            return Err(Error::ShapeMismatch(format!(
                "occupation {occupation:?} outside cutoffs {:?}",
                trunc.cutoffs()
            )));
        }
        let mut ket = Self::zeros(trunc);
        let i = ket.trunc.index(occupation);
        ket.amps[i] = C64::new(1.0, 0.0);
        Ok(ket)
    }

    pub fn from_amplitudes(trunc: Truncation, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != trunc.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} amplitudes for a tensor of dimension {}",
                amps.len(),
                trunc.dim()
            )));
        }
        Ok(Self { trunc, amps })
    }

    pub fn truncation(&self) -> &Truncation {
        &self.trunc
    }

    pub fn modes(&self) -> usize {
        self.trunc.modes()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn amplitude(&self, occupation: &[usize]) -> C64 {
        if self.trunc.contains(occupation) {
            self.amps[self.trunc.index(occupation)]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(self) -> Result<PureState> {
        let n2 = self.norm_sqr();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::NotNormalized(n2));
        }
        let scale = 1.0 / n2.sqrt();
        let amps = self.amps.into_iter().map(|a| a * scale).collect();
        Ok(PureState { ket: Ket { trunc: self.trunc, amps } })
    }

    pub fn scale(mut self, factor: C64) -> Self {
        self.amps.iter_mut().for_each(|a| *a *= factor);
        self
    }

    /// `self + other`, embedding both into the union of their truncations.
    pub fn add(&self, other: &Ket) -> Result<Ket> {
        let trunc = self.trunc.union(&other.trunc)?;
        let mut out = self.embed(&trunc)?;
        let rhs = other.embed(&trunc)?;
        out.amps.iter_mut().zip(&rhs.amps).for_each(|(a, b)| *a += b);
        Ok(out)
    }

    /// Zero-pads into a truncation with cutoffs at least as large as the current ones.
    pub fn embed(&self, target: &Truncation) -> Result<Ket> {
        if target.modes() != self.modes()
            || target.cutoffs().iter().zip(self.trunc.cutoffs()).any(|(t, s)| t < s)
        {
            return Err(Error::ShapeMismatch(format!(
                "cannot embed cutoffs {:?} into {:?}",
                self.trunc.cutoffs(),
                target.cutoffs()
            )));
        }
        if *target == self.trunc {
            return Ok(self.clone());
        }
        let mut out = Ket::zeros(target.clone());
        for (i, a) in self.amps.iter().enumerate() {
            if *a != C64::new(0.0, 0.0) {
                let occ = self.trunc.occupation(i);
                out.amps[target.index(&occ)] = *a;
            }
        }
        Ok(out)
    }

    /// Restricts to smaller cutoffs, returning the kept ket and the discarded weight.
    pub fn project(&self, target: &Truncation) -> Result<(Ket, f64)> {
        if target.modes() != self.modes() {
            return Err(Error::ShapeMismatch(format!(
                "{} modes vs {} modes",
                target.modes(),
                self.modes()
            )));
        }
        let mut out = Ket::zeros(target.clone());
        let mut dropped = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            let occ = self.trunc.occupation(i);
            if target.contains(&occ) {
                out.amps[target.index(&occ)] = *a;
            } else {
                dropped += a.norm_sqr();
            }
        }
        Ok((out, dropped))
    }

    /// Applies `a^power` or `(a^dagger)^power` on one mode.
    ///
    /// Creation never grows the truncation. Weight pushed above the cutoff is
    /// dropped when it stays below [`OVERFLOW_TOLERANCE`] and reported as
    /// [`Error::TruncationOverflow`] otherwise.
    pub fn apply_ladder(&self, mode: usize, kind: LadderKind, power: usize) -> Result<Ket> {
        self.trunc.check_mode(mode)?;
        if power == 0 {
            return Ok(self.clone());
        }
        let cutoff = self.trunc.cutoff(mode);
        let stride = self.trunc.strides()[mode];
        let block = (cutoff + 1) * stride;
        let mut out = Ket::zeros(self.trunc.clone());
        let mut overflow = 0.0;
        for outer in (0..self.amps.len()).step_by(block) {
            for n in 0..=cutoff {
                for inner in 0..stride {
                    let src = outer + n * stride + inner;
                    let a = self.amps[src];
                    match kind {
                        LadderKind::Annihilation => {
                            if n >= power {
                                let dst = outer + (n - power) * stride + inner;
                                out.amps[dst] = a * ladder_factor(n - power, power);
                            }
                        }
                        LadderKind::Creation => {
                            let v = a * ladder_factor(n, power);
                            if n + power <= cutoff {
                                out.amps[outer + (n + power) * stride + inner] = v;
                            } else {
                                overflow += v.norm_sqr();
                            }
                        }
                    }
                }
            }
        }
        if overflow > OVERFLOW_TOLERANCE {
            return Err(Error::TruncationOverflow { mode, weight: overflow });
        }
        Ok(out)
    }

    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.trunc != other.trunc {
            return Err(Error::ShapeMismatch(format!(
                "inner product of cutoffs {:?} and {:?}",
                self.trunc.cutoffs(),
                other.trunc.cutoffs()
            )));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn tensor(&self, other: &Ket) -> Ket {
        let trunc = self.trunc.concat(&other.trunc);
        let mut amps = Vec::with_capacity(trunc.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ket { trunc, amps }
    }

    /// Base indices of every one-dimensional fiber along `mode`; the fiber
    /// elements sit at `base + n * strides[mode]` for `n in 0..=cutoff`.
    pub(crate) fn fibers(trunc: &Truncation, mode: usize) -> Vec<usize> {
        let stride = trunc.strides()[mode];
        let block = (trunc.cutoff(mode) + 1) * stride;
        let mut bases = Vec::with_capacity(trunc.dim() / (trunc.cutoff(mode) + 1));
        for outer in (0..trunc.dim()).step_by(block) {
            for inner in 0..stride {
                bases.push(outer + inner);
            }
        }
        bases
    }
}

/// A ket with unit norm (within [`NORM_TOLERANCE`]).
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    ket: Ket,
}

impl PureState {
    pub fn from_ket(ket: Ket) -> Result<Self> {
        let n2 = ket.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { ket })
    }

    pub fn vacuum(trunc: Truncation) -> Self {
        let occ = vec![0; trunc.modes()];
        Self { ket: Ket::basis(trunc, &occ).expect("vacuum is always inside the truncation") }
    }

    pub fn basis(trunc: Truncation, occupation: &[usize]) -> Result<Self> {
        Ok(Self { ket: Ket::basis(trunc, occupation)? })
    }

    pub fn as_ket(&self) -> &Ket {
        &self.ket
    }

    pub fn into_ket(self) -> Ket {
        self.ket
    }

    pub fn embed(&self, target: &Truncation) -> Result<PureState> {
        Ok(Self { ket: self.ket.embed(target)? })
    }

    /// Ladder action on the underlying ket; the result is unnormalized.
    pub fn apply_ladder(&self, mode: usize, kind: LadderKind, power: usize) -> Result<Ket> {
        self.ket.apply_ladder(mode, kind, power)
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState { ket: self.ket.tensor(&other.ket) }
    }

    /// Squared overlap `|<self|other>|^2`, embedding both into a common truncation.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        let trunc = self.truncation().union(other.truncation())?;
        let a = self.ket.embed(&trunc)?;
        let b = other.ket.embed(&trunc)?;
        Ok(a.inner(&b)?.norm_sqr())
    }

    pub(crate) fn from_ket_unchecked(ket: Ket) -> Self {
        Self { ket }
    }
}

impl Deref for PureState {
    type Target = Ket;

    fn deref(&self) -> &Ket {
        &self.ket
    }
}

impl AsRef<Ket> for PureState {
    fn as_ref(&self) -> &Ket {
        &self.ket
    }
}

impl AsRef<Ket> for Ket {
    fn as_ref(&self) -> &Ket {
        self
    }
}

/// `<s1|s2>`, conjugate-linear in the first argument.
pub fn inner(s1: impl AsRef<Ket>, s2: impl AsRef<Ket>) -> Result<C64> {
    s1.as_ref().inner(s2.as_ref())
}

/// Tensor product in the order given; the modes of `states[0]` come first.
pub fn tensor(states: &[&PureState]) -> Result<PureState> {
    let (first, rest) = states
        .split_first()
        .ok_or_else(|| Error::ShapeMismatch("tensor of zero states".into()))?;
    Ok(rest.iter().fold((*first).clone(), |acc, s| acc.tensor(s)))
}
