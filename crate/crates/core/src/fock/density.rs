use nalgebra::DMatrix;

use super::moments::{check_monomial, for_each_index, MomentSource, Monomial, ShiftTables};
use super::{PureState, Truncation, C64, HERMITICITY_TOLERANCE, NORM_TOLERANCE, PSD_TOLERANCE};
use crate::error::{Error, Result};

/// Hermitian, unit-trace, positive semidefinite operator on a truncated tensor basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    trunc: Truncation,
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(trunc: Truncation, matrix: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_parts(trunc, matrix)?;
        let herm = rho.hermiticity_defect();
        if herm > HERMITICITY_TOLERANCE {
            return Err(Error::InvalidDensity(format!("not Hermitian (defect {herm:.3e})")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidDensity(format!("trace {tr:.12} != 1")));
        }
        let min = rho.min_eigenvalue();
        if min < -PSD_TOLERANCE {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(rho)
    }

    pub(crate) fn from_parts(trunc: Truncation, matrix: DMatrix<C64>) -> Result<Self> {
        let d = trunc.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix for a tensor of dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { trunc, matrix })
    }

    pub fn from_pure(state: &PureState) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        let matrix = &v * v.adjoint();
        Self { trunc: state.truncation().clone(), matrix }
    }

    /// Convex mixture `sum_j w_j |psi_j><psi_j|`; weights must be non-negative and sum to 1.
    pub fn mixture(members: &[(f64, &PureState)]) -> Result<Self> {
        let (first, _) = members
            .split_first()
            .ok_or_else(|| Error::InvalidDensity("empty mixture".into()))?;
        let trunc = first.1.truncation().clone();
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        if members.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidDensity(format!("mixture weights sum to {total}")));
        }
        let d = trunc.dim();
        let mut matrix = DMatrix::<C64>::zeros(d, d);
        for (w, s) in members {
            if s.truncation() != &trunc {
                return Err(Error::ShapeMismatch("mixture members differ in truncation".into()));
            }
            let v = nalgebra::DVector::from_column_slice(s.amplitudes());
            matrix += (&v * v.adjoint()) * C64::new(*w, 0.0);
        }
        Ok(Self { trunc, matrix })
    }

    pub fn truncation(&self) -> &Truncation {
        &self.trunc
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.matrix.nrows();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Population of each photon number of `mode`.
    pub fn marginal_populations(&self, mode: usize) -> Result<Vec<f64>> {
        self.trunc.check_mode(mode)?;
        let mut pops = vec![0.0; self.trunc.cutoff(mode) + 1];
        for i in 0..self.trunc.dim() {
            pops[self.trunc.occupation(i)[mode]] += self.matrix[(i, i)].re;
        }
        Ok(pops)
    }

    /// Traces out every mode not listed in `keep`; the kept modes retain their order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        let n = self.trunc.modes();
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != keep.len() || sorted.is_empty() {
            return Err(Error::InvalidParameter(format!("bad mode set {keep:?}")));
        }
        for &m in keep {
            self.trunc.check_mode(m)?;
        }
        let traced: Vec<usize> = (0..n).filter(|m| !keep.contains(m)).collect();
        let kept_trunc =
            Truncation::new(keep.iter().map(|&m| self.trunc.cutoff(m)).collect())?;
        if traced.is_empty() && keep == sorted.as_slice() {
            return Ok(self.clone());
        }
        let traced_limits: Vec<usize> = traced.iter().map(|&m| self.trunc.cutoff(m)).collect();
        let kd = kept_trunc.dim();
        let mut out = DMatrix::<C64>::zeros(kd, kd);
        let mut occ_r = vec![0usize; n];
        let mut occ_c = vec![0usize; n];
        for r in 0..kd {
            let kr = kept_trunc.occupation(r);
            for c in 0..kd {
                let kc = kept_trunc.occupation(c);
                for (slot, &m) in keep.iter().enumerate() {
                    occ_r[m] = kr[slot];
                    occ_c[m] = kc[slot];
                }
                let mut acc = C64::new(0.0, 0.0);
                if traced.is_empty() {
                    acc = self.matrix[(self.trunc.index(&occ_r), self.trunc.index(&occ_c))];
                } else {
                    for_each_index(&traced_limits, |t| {
                        for (slot, &m) in traced.iter().enumerate() {
                            occ_r[m] = t[slot];
                            occ_c[m] = t[slot];
                        }
                        acc += self.matrix[(self.trunc.index(&occ_r), self.trunc.index(&occ_c))];
                    });
                }
                out[(r, c)] = acc;
            }
        }
        Ok(DensityOperator { trunc: kept_trunc, matrix: out })
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            trunc: self.trunc.concat(&other.trunc),
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// Zero-pads into larger cutoffs.
    pub fn embed(&self, target: &Truncation) -> Result<DensityOperator> {
        if target.modes() != self.trunc.modes()
            || target.cutoffs().iter().zip(self.trunc.cutoffs()).any(|(t, s)| t < s)
        {
            return Err(Error::ShapeMismatch(format!(
                "cannot embed cutoffs {:?} into {:?}",
                self.trunc.cutoffs(),
                target.cutoffs()
            )));
        }
        let map: Vec<usize> =
            (0..self.trunc.dim()).map(|i| target.index(&self.trunc.occupation(i))).collect();
        let d = target.dim();
        let mut out = DMatrix::<C64>::zeros(d, d);
        for (i, &ti) in map.iter().enumerate() {
            for (j, &tj) in map.iter().enumerate() {
                out[(ti, tj)] = self.matrix[(i, j)];
            }
        }
        Ok(DensityOperator { trunc: target.clone(), matrix: out })
    }
}

impl From<&PureState> for DensityOperator {
    fn from(s: &PureState) -> Self {
        DensityOperator::from_pure(s)
    }
}

impl PureState {
    pub fn to_density(&self) -> DensityOperator {
        DensityOperator::from_pure(self)
    }

    /// Reduced density operator on `keep`, without forming the full projector.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        if keep.len() == self.modes() {
            return self.to_density().partial_trace(keep);
        }
        let n = self.modes();
        for &m in keep {
            self.truncation().check_mode(m)?;
        }
        let traced: Vec<usize> = (0..n).filter(|m| !keep.contains(m)).collect();
        let kept_trunc =
            Truncation::new(keep.iter().map(|&m| self.truncation().cutoff(m)).collect())?;
        let traced_trunc =
            Truncation::new(traced.iter().map(|&m| self.truncation().cutoff(m)).collect())?;
        // reshape amplitudes into (kept, traced) and form psi psi^dagger over kept
        let kd = kept_trunc.dim();
        let td = traced_trunc.dim();
        let mut block = DMatrix::<C64>::zeros(kd, td);
        for (i, a) in self.amplitudes().iter().enumerate() {
            let occ = self.truncation().occupation(i);
            let ko: Vec<usize> = keep.iter().map(|&m| occ[m]).collect();
            let to: Vec<usize> = traced.iter().map(|&m| occ[m]).collect();
            block[(kept_trunc.index(&ko), traced_trunc.index(&to))] = *a;
        }
        let matrix = &block * block.adjoint();
        Ok(DensityOperator { trunc: kept_trunc, matrix })
    }
}

impl MomentSource for DensityOperator {
    fn mode_count(&self) -> usize {
        self.trunc.modes()
    }

    /// `tr(rho a^dag^p a^q) = sum_k f_p(k) f_q(k) rho[k + q, k + p]`.
    fn moment(&self, m: &Monomial) -> Result<C64> {
        check_monomial(self.trunc.modes(), m)?;
        let Some(tables) = ShiftTables::new(&self.trunc, m) else {
            return Ok(C64::new(0.0, 0.0));
        };
        let strides = self.trunc.strides();
        let shift_row: usize = m.powers().iter().zip(&strides).map(|(&(_, q), s)| q * s).sum();
        let shift_col: usize = m.powers().iter().zip(&strides).map(|(&(p, _), s)| p * s).sum();
        let mut acc = C64::new(0.0, 0.0);
        for_each_index(&tables.limits, |k| {
            let base: usize = k.iter().zip(&strides).map(|(a, s)| a * s).sum();
            let mut w = 1.0;
            for (i, &ki) in k.iter().enumerate() {
                w *= tables.creation[i][ki] * tables.annihilation[i][ki];
            }
            acc += self.matrix[(base + shift_row, base + shift_col)] * w;
        });
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::expect;

    #[test]
    fn partial_trace_of_product_basis_state() {
        let t = Truncation::new(vec![1, 1, 1]).unwrap();
        let rho = PureState::basis(t, &[0, 0, 1]).unwrap().to_density();
        let red = rho.partial_trace(&[0, 1]).unwrap();
        assert_eq!(red.truncation().cutoffs(), &[1, 1]);
        assert!((red.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!((red.trace() - 1.0).abs() < 1e-15);
        assert!(red.matrix().iter().skip(1).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn reduced_matches_partial_trace() {
        let t = Truncation::new(vec![1, 2, 1]).unwrap();
        let amps: Vec<C64> =
            (0..t.dim()).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let s = crate::fock::Ket::from_amplitudes(t, amps).unwrap().normalize().unwrap();
        for keep in [vec![0, 1], vec![1, 2], vec![0, 2], vec![1]] {
            let a = s.reduced(&keep).unwrap();
            let b = s.to_density().partial_trace(&keep).unwrap();
            assert!((a.matrix() - b.matrix()).norm() < 1e-13, "keep {keep:?}");
        }
    }

    #[test]
    fn density_moments_match_pure() {
        let t = Truncation::new(vec![2, 3]).unwrap();
        let amps: Vec<C64> =
            (0..t.dim()).map(|i| C64::new(1.0 / (1.0 + i as f64), (i as f64).sin())).collect();
        let s = crate::fock::Ket::from_amplitudes(t, amps).unwrap().normalize().unwrap();
        let rho = s.to_density();
        for m in [
            Monomial::new(vec![(0, 1), (1, 0)]),
            Monomial::new(vec![(2, 1), (0, 3)]),
            Monomial::new(vec![(1, 1), (1, 1)]),
        ] {
            assert!((expect(&s, &m).unwrap() - expect(&rho, &m).unwrap()).norm() < 1e-13);
        }
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let t = Truncation::new(vec![1]).unwrap();
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 0)] = C64::new(0.5, 0.0);
        assert!(DensityOperator::new(t.clone(), m.clone()).is_err());
        m[(1, 1)] = C64::new(0.5, 0.0);
        m[(0, 1)] = C64::new(0.2, 0.0);
        assert!(DensityOperator::new(t.clone(), m.clone()).is_err());
        m[(1, 0)] = C64::new(0.2, 0.0);
        assert!(DensityOperator::new(t.clone(), m.clone()).is_ok());
        m[(0, 1)] = C64::new(0.9, 0.0);
        m[(1, 0)] = C64::new(0.9, 0.0);
        assert!(DensityOperator::new(t, m).is_err());
    }
}
