//! Constructors for the state families used throughout the crate.
//!
//! Every constructor returns a normalized state at an automatically chosen
//! truncation. Superpositions are built unnormalized in the tensor basis and
//! renormalized numerically; analytic prefactors only serve as cross-checks.

use serde::{Deserialize, Serialize};

use crate::devices;
use crate::error::{Error, Result};
use crate::fock::{
    coherent_cutoff, Ensemble, Ket, LadderKind, PureState, Truncation, C64, COHERENT_TAIL,
    MOMENT_ORDER, weighted_tail_cutoff,
};

pub fn vacuum(modes: usize) -> Result<PureState> {
    Ok(PureState::vacuum(Truncation::uniform(modes, 0)?))
}

/// Coherent state at the smallest cutoff whose Poisson tail is below 1e-12.
pub fn coherent(alpha: C64) -> PureState {
    coherent_with_cutoff(alpha, coherent_cutoff(alpha))
}

/// Coherent amplitudes `e^{-|alpha|^2/2} alpha^n / sqrt(n!)` for `n <= cutoff`, renormalized.
pub fn coherent_with_cutoff(alpha: C64, cutoff: usize) -> PureState {
    coherent_ket(alpha, cutoff).normalize().expect("coherent amplitudes have positive norm")
}

fn coherent_ket(alpha: C64, cutoff: usize) -> Ket {
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..=cutoff {
        if n > 0 {
            c *= alpha / (n as f64).sqrt();
        }
        amps.push(c);
    }
    Ket::from_amplitudes(Truncation::new(vec![cutoff]).expect("one mode"), amps)
        .expect("dimension matches")
}

pub fn number(n: usize) -> PureState {
    PureState::basis(Truncation::new(vec![n]).expect("one mode"), &[n]).expect("inside cutoff")
}

pub fn number_with_cutoff(n: usize, cutoff: usize) -> Result<PureState> {
    PureState::basis(Truncation::new(vec![cutoff])?, &[n])
}

/// Normalized single-mode superposition `sum_k c_k |n_k>`.
pub fn fock_superposition(terms: &[(usize, C64)]) -> Result<PureState> {
    let cutoff = terms
        .iter()
        .map(|(n, _)| *n)
        .max()
        .ok_or_else(|| Error::InvalidParameter("empty superposition".into()))?;
    let mut ket = Ket::zeros(Truncation::new(vec![cutoff])?);
    for &(n, c) in terms {
        ket.amplitudes_mut()[n] += c;
    }
    ket.normalize()
}

/// `(a^dagger + b^dagger)|alpha>|beta>`, normalized.
pub fn photon_added_pair(alpha: C64, beta: C64) -> Result<PureState> {
    // one photon of headroom above the coherent tail rule
    let ca = coherent_cutoff(alpha) + 1;
    let cb = coherent_cutoff(beta) + 1;
    let base = coherent_ket(alpha, ca).tensor(&coherent_ket(beta, cb));
    let added = base
        .apply_ladder(0, LadderKind::Creation, 1)?
        .add(&base.apply_ladder(1, LadderKind::Creation, 1)?)?;
    added.normalize()
}

/// `|alpha>|beta> + |beta>|alpha>`, normalized.
pub fn cat_pair(alpha: C64, beta: C64) -> Result<PureState> {
    let c = coherent_cutoff(alpha).max(coherent_cutoff(beta));
    let a = coherent_ket(alpha, c);
    let b = coherent_ket(beta, c);
    a.tensor(&b).add(&b.tensor(&a))?.normalize()
}

/// `(|k1, k2> + |k2, k1>)/sqrt 2` with `k1 > k2`.
pub fn number_pair(k1: usize, k2: usize) -> Result<PureState> {
    number_pair_with_cutoff(k1, k2, k1)
}

pub fn number_pair_with_cutoff(k1: usize, k2: usize, cutoff: usize) -> Result<PureState> {
    if k1 <= k2 {
        return Err(Error::InvalidOrder { k1, k2 });
    }
    let t = Truncation::uniform(2, cutoff)?;
    Ket::basis(t.clone(), &[k1, k2])?.add(&Ket::basis(t, &[k2, k1])?)?.normalize()
}

/// `(|0,1> + |1,0>)/sqrt 2`.
pub fn single_photon_bell() -> PureState {
    number_pair(1, 0).expect("1 > 0")
}

/// Applies `D(alpha_i)` to every mode `i`.
pub fn displaced(state: &PureState, alphas: &[C64]) -> Result<PureState> {
    if alphas.len() != state.modes() {
        return Err(Error::ShapeMismatch(format!(
            "{} displacements for a {}-mode state",
            alphas.len(),
            state.modes()
        )));
    }
    alphas
        .iter()
        .enumerate()
        .try_fold(state.clone(), |s, (mode, &alpha)| devices::displacement(&s, mode, alpha))
}

/// `(|0,0,1> + |0,1,0> + |1,0,0>)/sqrt 3`.
pub fn w_single_photon() -> PureState {
    w_from(&number(1).into_ket(), 1)
}

/// `eta (|0,0,alpha> + |0,alpha,0> + |alpha,0,0>)`, normalized numerically.
pub fn w_coherent(alpha: C64) -> PureState {
    let c = coherent_cutoff(alpha).max(1);
    w_from(&coherent_ket(alpha, c), c)
}

fn w_from(excited: &Ket, cutoff: usize) -> PureState {
    let t1 = Truncation::new(vec![cutoff]).expect("one mode");
    let vac = Ket::basis(t1, &[0]).expect("vacuum");
    let excited = excited.embed(vac.truncation()).expect("same cutoff");
    let sum = vac
        .tensor(&vac)
        .tensor(&excited)
        .add(&vac.tensor(&excited).tensor(&vac))
        .and_then(|k| k.add(&excited.tensor(&vac).tensor(&vac)))
        .expect("equal truncations");
    sum.normalize().expect("nonzero superposition")
}

/// Analytic W-coherent normalization `[3(1 + 2 e^{-|alpha|^2})]^{-1/2}`.
pub fn w_coherent_eta(alpha: C64) -> f64 {
    1.0 / (3.0 * (1.0 + 2.0 * (-alpha.norm_sqr()).exp())).sqrt()
}

/// Single-mode squeezed vacuum with `<a^2> = -e^{i theta} sinh r cosh r`.
pub fn squeezed_vacuum(r: f64, theta: f64) -> Result<PureState> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("squeezing r must be >= 0, got {r}")));
    }
    if r == 0.0 {
        return Ok(number(0));
    }
    let t = r.tanh();
    let ratio = -C64::from_polar(t, theta);
    // c_{2n} = ratio^n sqrt((2n)!) / (2^n n!) / sqrt(cosh r)
    let mut coeffs = vec![C64::new(1.0 / r.cosh().sqrt(), 0.0)];
    loop {
        let n = coeffs.len();
        let prev = coeffs[n - 1];
        let next = prev * ratio * (((2 * n - 1) * (2 * n)) as f64).sqrt() / (2 * n) as f64;
        coeffs.push(next);
        // once the weighted terms decay geometrically, bound the rest
        let level = (2 * n + 1) as f64;
        let decay = t * t * ((level + 2.0) / level).powi(MOMENT_ORDER);
        if decay < 0.9 && next.norm_sqr() * level.powi(MOMENT_ORDER) / (1.0 - decay) < COHERENT_TAIL * 1e-3 {
            break;
        }
        if n > 20_000 {
            return Err(Error::InvalidParameter(format!("squeezing r = {r} is too large")));
        }
    }
    // weight of level 2k is (2k + 1)^MOMENT_ORDER, as in `weighted_tail_cutoff`
    let weights: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm_sqr() * ((2 * k + 1) as f64).powi(MOMENT_ORDER))
        .collect();
    let mut keep = weights.len();
    let mut above = 0.0;
    for k in (0..weights.len()).rev() {
        if above + weights[k] >= COHERENT_TAIL {
            keep = k + 1;
            break;
        }
        above += weights[k];
    }
    let cutoff = 2 * (keep - 1);
    let mut ket = Ket::zeros(Truncation::new(vec![cutoff])?);
    for (n, c) in coeffs.iter().take(keep).enumerate() {
        ket.amplitudes_mut()[2 * n] = *c;
    }
    ket.normalize()
}

/// Thermal state with mean photon number `mean`, as a number-state ensemble.
pub fn thermal(mean: f64) -> Result<Ensemble> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return Err(Error::InvalidParameter(format!("thermal mean must be >= 0, got {mean}")));
    }
    if mean == 0.0 {
        return Ok(Ensemble::pure(number(0)));
    }
    let q = mean / (mean + 1.0);
    let mut weights = Vec::new();
    let mut w = 1.0 / (mean + 1.0);
    loop {
        let n = weights.len();
        weights.push(w);
        let level = (n + 1) as f64;
        let decay = q * ((level + 1.0) / level).powi(MOMENT_ORDER);
        if decay < 0.9 && w * level.powi(MOMENT_ORDER) / (1.0 - decay) < COHERENT_TAIL * 1e-3 {
            break;
        }
        w *= q;
    }
    let cutoff = weighted_tail_cutoff(&weights, COHERENT_TAIL);
    weights.truncate(cutoff + 1);
    let total: f64 = weights.iter().sum();
    let members = weights
        .into_iter()
        .enumerate()
        .map(|(n, w)| Ok((w / total, number_with_cutoff(n, cutoff)?)))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(members)
}

/// Serde helpers accepting either a real number or a `[re, im]` pair.
pub mod cplx {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::fock::C64;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Real(f64),
        Pair([f64; 2]),
    }

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::Real(x) => C64::new(x, 0.0),
            Repr::Pair([re, im]) => C64::new(re, im),
        })
    }
}

/// One factor of a product state, as read from a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StateSpec {
    Vacuum {
        #[serde(default = "one")]
        modes: usize,
    },
    Coherent {
        #[serde(with = "cplx")]
        alpha: C64,
    },
    Number {
        n: usize,
    },
    Superposition {
        /// `[n, re, im]` triples.
        terms: Vec<(usize, f64, f64)>,
    },
    PhotonAddedPair {
        #[serde(with = "cplx")]
        alpha: C64,
        #[serde(with = "cplx")]
        beta: C64,
    },
    CatPair {
        #[serde(with = "cplx")]
        alpha: C64,
        #[serde(with = "cplx")]
        beta: C64,
    },
    NumberPair {
        k1: usize,
        k2: usize,
    },
    SinglePhotonBell,
    SqueezedVacuum {
        r: f64,
        #[serde(default)]
        theta: f64,
    },
    Thermal {
        mean: f64,
    },
    WSinglePhoton,
    WCoherent {
        #[serde(with = "cplx")]
        alpha: C64,
    },
}

fn one() -> usize {
    1
}

impl StateSpec {
    pub fn family(&self) -> &'static str {
        match self {
            StateSpec::Vacuum { .. } => "vacuum",
            StateSpec::Coherent { .. } => "coherent",
            StateSpec::Number { .. } => "number",
            StateSpec::Superposition { .. } => "superposition",
            StateSpec::PhotonAddedPair { .. } => "photon_added_pair",
            StateSpec::CatPair { .. } => "cat_pair",
            StateSpec::NumberPair { .. } => "number_pair",
            StateSpec::SinglePhotonBell => "single_photon_bell",
            StateSpec::SqueezedVacuum { .. } => "squeezed_vacuum",
            StateSpec::Thermal { .. } => "thermal",
            StateSpec::WSinglePhoton => "w_single_photon",
            StateSpec::WCoherent { .. } => "w_coherent",
        }
    }

    pub fn modes(&self) -> usize {
        match self {
            StateSpec::Vacuum { modes } => *modes,
            StateSpec::Coherent { .. }
            | StateSpec::Number { .. }
            | StateSpec::Superposition { .. }
            | StateSpec::SqueezedVacuum { .. }
            | StateSpec::Thermal { .. } => 1,
            StateSpec::PhotonAddedPair { .. }
            | StateSpec::CatPair { .. }
            | StateSpec::NumberPair { .. }
            | StateSpec::SinglePhotonBell => 2,
            StateSpec::WSinglePhoton | StateSpec::WCoherent { .. } => 3,
        }
    }

    pub fn build(&self) -> Result<Ensemble> {
        Ok(match self {
            StateSpec::Vacuum { modes } => vacuum(*modes)?.into(),
            StateSpec::Coherent { alpha } => coherent(*alpha).into(),
            StateSpec::Number { n } => number(*n).into(),
            StateSpec::Superposition { terms } => {
                let terms: Vec<(usize, C64)> =
                    terms.iter().map(|&(n, re, im)| (n, C64::new(re, im))).collect();
                fock_superposition(&terms)?.into()
            }
            StateSpec::PhotonAddedPair { alpha, beta } => photon_added_pair(*alpha, *beta)?.into(),
            StateSpec::CatPair { alpha, beta } => cat_pair(*alpha, *beta)?.into(),
            StateSpec::NumberPair { k1, k2 } => number_pair(*k1, *k2)?.into(),
            StateSpec::SinglePhotonBell => single_photon_bell().into(),
            StateSpec::SqueezedVacuum { r, theta } => squeezed_vacuum(*r, *theta)?.into(),
            StateSpec::Thermal { mean } => thermal(*mean)?,
            StateSpec::WSinglePhoton => w_single_photon().into(),
            StateSpec::WCoherent { alpha } => w_coherent(*alpha).into(),
        })
    }
}

/// Tensor product of the listed factors, in order.
pub fn build_product(specs: &[StateSpec]) -> Result<Ensemble> {
    let (first, rest) = specs
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("no state factors given".into()))?;
    rest.iter().try_fold(first.build()?, |acc, s| Ok(acc.tensor(&s.build()?)))
}
