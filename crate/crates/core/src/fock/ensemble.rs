use super::moments::{check_monomial, MomentSource, Monomial};
use super::{DensityOperator, PureState, Truncation, C64, NORM_TOLERANCE};
use crate::error::{Error, Result};

/// A mixed state kept as a weighted list of pure states.
///
/// Moments are weighted sums of member moments, so mixtures of large pure
/// states never need a dense density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::InvalidDensity("empty ensemble".into()))?;
        let modes = first.1.modes();
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        if members.iter().any(|(w, _)| *w < 0.0 || !w.is_finite()) || (total - 1.0).abs() > NORM_TOLERANCE
        {
            return Err(Error::InvalidDensity(format!("ensemble weights sum to {total}")));
        }
        if members.iter().any(|(_, s)| s.modes() != modes) {
            return Err(Error::ShapeMismatch("ensemble members differ in mode count".into()));
        }
        Ok(Self { members })
    }

    pub fn pure(state: PureState) -> Self {
        Self { members: vec![(1.0, state)] }
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn modes(&self) -> usize {
        self.members[0].1.modes()
    }

    pub fn is_pure(&self) -> bool {
        self.members.len() == 1
    }

    /// Applies `f` to every member, keeping the weights.
    pub fn try_map(&self, mut f: impl FnMut(&PureState) -> Result<PureState>) -> Result<Ensemble> {
        let members = self
            .members
            .iter()
            .map(|(w, s)| Ok((*w, f(s)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Ensemble { members })
    }

    /// Product with another ensemble; weights multiply.
    pub fn tensor(&self, other: &Ensemble) -> Ensemble {
        let mut members = Vec::with_capacity(self.members.len() * other.members.len());
        for (w1, s1) in &self.members {
            for (w2, s2) in &other.members {
                members.push((w1 * w2, s1.tensor(s2)));
            }
        }
        Ensemble { members }
    }

    /// Dense density operator over the union of member truncations.
    pub fn to_density(&self) -> Result<DensityOperator> {
        let trunc = self
            .members
            .iter()
            .skip(1)
            .try_fold(self.members[0].1.truncation().clone(), |acc: Truncation, (_, s)| {
                acc.union(s.truncation())
            })?;
        let embedded = self
            .members
            .iter()
            .map(|(w, s)| Ok((*w, s.embed(&trunc)?)))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<(f64, &PureState)> = embedded.iter().map(|(w, s)| (*w, s)).collect();
        DensityOperator::mixture(&refs)
    }
}

impl From<PureState> for Ensemble {
    fn from(s: PureState) -> Self {
        Ensemble::pure(s)
    }
}

impl MomentSource for Ensemble {
    fn mode_count(&self) -> usize {
        self.modes()
    }

    fn moment(&self, m: &Monomial) -> Result<C64> {
        check_monomial(self.modes(), m)?;
        self.members
            .iter()
            .try_fold(C64::new(0.0, 0.0), |acc, (w, s)| Ok(acc + s.moment(m)? * *w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::expect;

    #[test]
    fn ensemble_moments_match_density() {
        let t = Truncation::new(vec![3]).unwrap();
        let e = Ensemble::new(vec![
            (0.25, PureState::basis(t.clone(), &[1]).unwrap()),
            (0.75, PureState::basis(t.clone(), &[3]).unwrap()),
        ])
        .unwrap();
        let rho = e.to_density().unwrap();
        let n = Monomial::new(vec![(1, 1)]);
        assert!((expect(&e, &n).unwrap().re - 2.5).abs() < 1e-14);
        assert!((expect(&rho, &n).unwrap() - expect(&e, &n).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn weights_must_sum_to_one() {
        let t = Truncation::new(vec![1]).unwrap();
        assert!(Ensemble::new(vec![(0.5, PureState::vacuum(t))]).is_err());
    }
}
