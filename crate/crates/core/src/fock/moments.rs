use super::{ladder_factor, Ket, PureState, Truncation, C64};
use crate::error::{Error, Result};

/// A normally ordered monomial `prod_i (a_i^dagger)^{p_i} a_i^{q_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    powers: Vec<(usize, usize)>,
}

impl Monomial {
    pub fn identity(modes: usize) -> Self {
        Self { powers: vec![(0, 0); modes] }
    }

    /// From `(creation, annihilation)` power pairs, one per mode.
    pub fn new(powers: Vec<(usize, usize)>) -> Self {
        Self { powers }
    }

    /// Multiplies in `(a_mode^dagger)^creation a_mode^annihilation`.
    pub fn with(mut self, mode: usize, creation: usize, annihilation: usize) -> Self {
        self.powers[mode].0 += creation;
        self.powers[mode].1 += annihilation;
        self
    }

    pub fn modes(&self) -> usize {
        self.powers.len()
    }

    pub fn powers(&self) -> &[(usize, usize)] {
        &self.powers
    }

    pub fn adjoint(&self) -> Self {
        Self { powers: self.powers.iter().map(|&(p, q)| (q, p)).collect() }
    }

    pub fn is_hermitian(&self) -> bool {
        self.powers.iter().all(|(p, q)| p == q)
    }
}

/// Anything that can report normally ordered moments.
pub trait MomentSource: Sync {
    fn mode_count(&self) -> usize;

    /// `<prod_i (a_i^dagger)^{p_i} a_i^{q_i}>`.
    fn moment(&self, m: &Monomial) -> Result<C64>;
}

pub(crate) fn check_monomial(modes: usize, m: &Monomial) -> Result<()> {
    if m.modes() != modes {
        return Err(Error::ShapeMismatch(format!(
            "monomial over {} modes evaluated on a {}-mode state",
            m.modes(),
            modes
        )));
    }
    Ok(())
}

/// Precomputed `sqrt((k + p)! / k!)` tables and the admissible index range per mode.
pub(crate) struct ShiftTables {
    pub(crate) limits: Vec<usize>,
    pub(crate) creation: Vec<Vec<f64>>,
    pub(crate) annihilation: Vec<Vec<f64>>,
}

impl ShiftTables {
    /// `None` when some power exceeds its cutoff, in which case the moment is zero.
    pub(crate) fn new(trunc: &Truncation, m: &Monomial) -> Option<Self> {
        let mut limits = Vec::with_capacity(trunc.modes());
        let mut creation = Vec::with_capacity(trunc.modes());
        let mut annihilation = Vec::with_capacity(trunc.modes());
        for (&(p, q), &c) in m.powers().iter().zip(trunc.cutoffs()) {
            let top = p.max(q);
            if top > c {
                return None;
            }
            let limit = c - top;
            limits.push(limit);
            creation.push((0..=limit).map(|k| ladder_factor(k, p)).collect());
            annihilation.push((0..=limit).map(|k| ladder_factor(k, q)).collect());
        }
        Some(Self { limits, creation, annihilation })
    }
}

/// Odometer over all multi-indices `k` with `k_i <= limits[i]`.
pub(crate) fn for_each_index(limits: &[usize], mut f: impl FnMut(&[usize])) {
    let mut k = vec![0usize; limits.len()];
    loop {
        f(&k);
        let mut i = limits.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if k[i] < limits[i] {
                k[i] += 1;
                break;
            }
            k[i] = 0;
        }
    }
}

pub(crate) fn ket_moment(ket: &Ket, m: &Monomial) -> Result<C64> {
    check_monomial(ket.modes(), m)?;
    let trunc = ket.truncation();
    let Some(tables) = ShiftTables::new(trunc, m) else {
        return Ok(C64::new(0.0, 0.0));
    };
    let strides = trunc.strides();
    let shift_bra: usize = m.powers().iter().zip(&strides).map(|(&(p, _), s)| p * s).sum();
    let shift_ket: usize = m.powers().iter().zip(&strides).map(|(&(_, q), s)| q * s).sum();
    let amps = ket.amplitudes();
    // odometer over the leading modes, contiguous sweep over the last one
    let last = tables.limits.len() - 1;
    debug_assert_eq!(strides[last], 1);
    let w_last: Vec<f64> = (0..=tables.limits[last])
        .map(|k| tables.creation[last][k] * tables.annihilation[last][k])
        .collect();
    let mut acc = C64::new(0.0, 0.0);
    for_each_index(&tables.limits[..last], |k| {
        let base: usize = k.iter().zip(&strides).map(|(a, s)| a * s).sum();
        let mut w = 1.0;
        for (i, &ki) in k.iter().enumerate() {
            w *= tables.creation[i][ki] * tables.annihilation[i][ki];
        }
        let n = w_last.len();
        let bra = &amps[base + shift_bra..base + shift_bra + n];
        let kt = &amps[base + shift_ket..base + shift_ket + n];
        let (mut re, mut im) = (0.0, 0.0);
        for ((x, y), &wl) in bra.iter().zip(kt).zip(&w_last) {
            re += (x.re * y.re + x.im * y.im) * wl;
            im += (x.re * y.im - x.im * y.re) * wl;
        }
        acc += C64::new(re, im) * w;
    });
    Ok(acc)
}

impl MomentSource for PureState {
    fn mode_count(&self) -> usize {
        self.modes()
    }

    fn moment(&self, m: &Monomial) -> Result<C64> {
        ket_moment(self.as_ket(), m)
    }
}

/// Expectation value of a normally ordered monomial.
pub fn expect<S: MomentSource + ?Sized>(state: &S, m: &Monomial) -> Result<C64> {
    state.moment(m)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Moment with every `a_i` replaced by `a_i - <a_i>` (and `a_i^dagger` by its
/// conjugate), expanded binomially into plain moments.
pub fn central_expect<S: MomentSource + ?Sized>(state: &S, m: &Monomial) -> Result<C64> {
    let modes = state.mode_count();
    check_monomial(modes, m)?;
    let mut means = Vec::with_capacity(modes);
    for (i, &(p, q)) in m.powers().iter().enumerate() {
        if p + q == 0 {
            means.push(C64::new(0.0, 0.0));
        } else {
            means.push(state.moment(&Monomial::identity(modes).with(i, 0, 1))?);
        }
    }
    // enumerate (k_i, l_i) with k_i <= p_i, l_i <= q_i
    let limits: Vec<usize> =
        m.powers().iter().flat_map(|&(p, q)| [p, q]).collect();
    let mut acc = C64::new(0.0, 0.0);
    let mut err = None;
    for_each_index(&limits, |kl| {
        if err.is_some() {
            return;
        }
        let mut coeff = C64::new(1.0, 0.0);
        let mut powers = Vec::with_capacity(modes);
        for i in 0..modes {
            let (p, q) = m.powers()[i];
            let (k, l) = (kl[2 * i], kl[2 * i + 1]);
            coeff *= binomial(p, k) * (-means[i].conj()).powu((p - k) as u32);
            coeff *= binomial(q, l) * (-means[i]).powu((q - l) as u32);
            powers.push((k, l));
        }
        if coeff == C64::new(0.0, 0.0) {
            return;
        }
        match state.moment(&Monomial::new(powers)) {
            Ok(v) => acc += coeff * v,
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

/// `((Delta u)^2, (Delta v)^2)` for `u = |xi| x_a + x_b / xi` and
/// `v = |xi| p_a - p_b / xi` on modes 0 and 1 of a two-mode state,
/// with `x = (a^dagger + a)/sqrt 2` and `p = i (a^dagger - a)/sqrt 2`.
pub fn quadrature_uv_variance<S: MomentSource + ?Sized>(state: &S, xi: f64) -> Result<(f64, f64)> {
    if state.mode_count() != 2 {
        return Err(Error::WrongModeCount { expected: 2, got: state.mode_count() });
    }
    quadrature_uv_variance_pair(state, (0, 1), xi)
}

/// Second-order quadrature statistics of a mode pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct QuadratureStats {
    pub var_xa: f64,
    pub var_pa: f64,
    pub var_xb: f64,
    pub var_pb: f64,
    pub cov_x: f64,
    pub cov_p: f64,
    /// `<Delta a^dagger Delta a>` and `<Delta b^dagger Delta b>`, clamped at zero.
    pub excess_a: f64,
    pub excess_b: f64,
}

impl QuadratureStats {
    pub(crate) fn of<S: MomentSource + ?Sized>(state: &S, modes: (usize, usize)) -> Result<Self> {
        let n = state.mode_count();
        for mode in [modes.0, modes.1] {
            if mode >= n {
                return Err(Error::InvalidMode { mode, modes: n });
            }
        }
        if modes.0 == modes.1 {
            return Err(Error::InvalidParameter("quadrature pair needs distinct modes".into()));
        }
        let id = || Monomial::identity(n);
        let (a, b) = modes;
        let mean_a = state.moment(&id().with(a, 0, 1))?;
        let mean_b = state.moment(&id().with(b, 0, 1))?;
        let a2 = state.moment(&id().with(a, 0, 2))?;
        let b2 = state.moment(&id().with(b, 0, 2))?;
        let na = state.moment(&id().with(a, 1, 1))?.re;
        let nb = state.moment(&id().with(b, 1, 1))?.re;
        let ab = state.moment(&id().with(a, 0, 1).with(b, 0, 1))?;
        let ab_dag = state.moment(&id().with(a, 0, 1).with(b, 1, 0))?;

        // central second moments
        let da2 = a2 - mean_a * mean_a;
        let db2 = b2 - mean_b * mean_b;
        let dna = na - mean_a.norm_sqr();
        let dnb = nb - mean_b.norm_sqr();
        let dab = ab - mean_a * mean_b;
        let dab_dag = ab_dag - mean_a * mean_b.conj();
        Ok(Self {
            var_xa: dna + 0.5 + da2.re,
            var_pa: dna + 0.5 - da2.re,
            var_xb: dnb + 0.5 + db2.re,
            var_pb: dnb + 0.5 - db2.re,
            cov_x: dab.re + dab_dag.re,
            cov_p: dab_dag.re - dab.re,
            excess_a: dna.max(0.0),
            excess_b: dnb.max(0.0),
        })
    }

    pub(crate) fn uv(&self, xi: f64) -> (f64, f64) {
        let sign = xi.signum();
        let x2 = xi * xi;
        let var_u = x2 * self.var_xa + self.var_xb / x2 + 2.0 * sign * self.cov_x;
        let var_v = x2 * self.var_pa + self.var_pb / x2 - 2.0 * sign * self.cov_p;
        (var_u, var_v)
    }

    /// `(Delta u)^2 + (Delta v)^2 - xi^2 - 1/xi^2` without cancelling the vacuum terms,
    /// so it stays accurate at large `|xi|`.
    pub(crate) fn excess(&self, xi: f64) -> f64 {
        let x2 = xi * xi;
        2.0 * (x2 * self.excess_a + self.excess_b / x2 + xi.signum() * (self.cov_x - self.cov_p))
    }
}

/// [`quadrature_uv_variance`] on an explicit mode pair `(a, b)` of a larger state.
pub fn quadrature_uv_variance_pair<S: MomentSource + ?Sized>(
    state: &S,
    modes: (usize, usize),
    xi: f64,
) -> Result<(f64, f64)> {
    if xi == 0.0 {
        return Err(Error::ZeroXi);
    }
    Ok(QuadratureStats::of(state, modes)?.uv(xi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::LadderKind;

    fn coherent(alpha: C64, cutoff: usize) -> PureState {
        let mut amps = Vec::new();
        let mut c = (-alpha.norm_sqr() / 2.0).exp();
        for n in 0..=cutoff {
            if n > 0 {
                c /= (n as f64).sqrt();
            }
            amps.push(alpha.powu(n as u32) * c);
        }
        Ket::from_amplitudes(Truncation::new(vec![cutoff]).unwrap(), amps)
            .unwrap()
            .normalize()
            .unwrap()
    }

    #[test]
    fn falling_factorial_on_number_state() {
        let s = PureState::basis(Truncation::new(vec![5]).unwrap(), &[3]).unwrap();
        let v = expect(&s, &Monomial::new(vec![(2, 2)])).unwrap();
        assert!((v.re - 6.0).abs() < 1e-14 && v.im == 0.0);
    }

    #[test]
    fn vacuum_annihilation_moments_vanish() {
        let vac = PureState::vacuum(Truncation::new(vec![3, 3]).unwrap());
        for q in 1..3 {
            let m = Monomial::new(vec![(1, q), (0, 0)]);
            assert_eq!(expect(&vac, &m).unwrap(), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn coherent_product_moments() {
        let s = coherent(C64::new(1.0, 0.0), 30).tensor(&coherent(C64::new(1.0, 0.0), 30));
        let ab_dag = expect(&s, &Monomial::new(vec![(0, 1), (1, 0)])).unwrap();
        let nn = expect(&s, &Monomial::new(vec![(1, 1), (1, 1)])).unwrap();
        assert!((ab_dag - 1.0).norm() < 1e-10);
        assert!((ab_dag.norm_sqr() - nn.re).abs() < 1e-10);
    }

    #[test]
    fn moment_matches_explicit_ladder_action() {
        // bra/ket annihilator route against applying the full operator string
        let alpha = C64::new(0.6, -0.3);
        let s = coherent(alpha, 25).tensor(&coherent(C64::new(-0.2, 0.5), 25));
        let m = Monomial::new(vec![(2, 1), (0, 2)]);
        let mut k = s.as_ket().clone();
        k = k.apply_ladder(1, LadderKind::Annihilation, 2).unwrap();
        k = k.apply_ladder(0, LadderKind::Annihilation, 1).unwrap();
        k = k.apply_ladder(0, LadderKind::Creation, 2).unwrap();
        let direct = s.as_ket().inner(&k).unwrap();
        let engine = expect(&s, &m).unwrap();
        assert!((direct - engine).norm() < 1e-12);
    }

    #[test]
    fn central_moment_of_coherent_vanishes() {
        let s = coherent(C64::new(1.3, 0.4), 35);
        let v = central_expect(&s, &Monomial::new(vec![(1, 1)])).unwrap();
        assert!(v.norm() < 1e-10);
    }

    #[test]
    fn vacuum_saturates_uv_bound() {
        let vac = PureState::vacuum(Truncation::new(vec![2, 2]).unwrap());
        let (u, v) = quadrature_uv_variance(&vac, 1.0).unwrap();
        assert!((u + v - 2.0).abs() < 1e-14);
        assert_eq!(quadrature_uv_variance(&vac, 0.0), Err(Error::ZeroXi));
    }

    #[test]
    fn shape_mismatch_on_wrong_monomial() {
        let vac = PureState::vacuum(Truncation::new(vec![2]).unwrap());
        assert!(expect(&vac, &Monomial::identity(2)).is_err());
    }
}
