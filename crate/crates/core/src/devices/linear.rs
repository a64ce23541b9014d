use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::fock::{coherent_cutoff, Ket, PureState, Truncation, C64, OVERFLOW_TOLERANCE};

/// Tolerance on `|t|^2 + |r|^2 = 1` and `c^2 - |s|^2 = 1`.
pub const PARAM_TOLERANCE: f64 = 1e-12;
/// Largest norm deficit the squeezer accepts before failing.
pub const LEAKAGE_LIMIT: f64 = 1e-8;
/// Largest output tensor the adaptive squeezer will allocate.
const MAX_SQUEEZER_DIM: usize = 1 << 24;

/// Beam splitter with Heisenberg map `a -> t a + r b`, `b -> -r* a + t* b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterParams {
    #[serde(with = "crate::states::cplx")]
    t: C64,
    #[serde(with = "crate::states::cplx")]
    r: C64,
}

impl BeamSplitterParams {
    pub fn new(t: C64, r: C64) -> Result<Self> {
        let total = t.norm_sqr() + r.norm_sqr();
        if (total - 1.0).abs() > PARAM_TOLERANCE {
            return Err(Error::InvalidParameter(format!("|t|^2 + |r|^2 = {total}, expected 1")));
        }
        Ok(Self { t, r })
    }

    /// `t = cos(theta) e^{i phi_t}`, `r = sin(theta) e^{i phi_r}`.
    pub fn from_angles(theta: f64, phi_t: f64, phi_r: f64) -> Self {
        Self { t: C64::from_polar(theta.cos(), phi_t), r: C64::from_polar(theta.sin(), phi_r) }
    }

    pub fn balanced() -> Self {
        Self::from_angles(std::f64::consts::FRAC_PI_4, 0.0, 0.0)
    }

    pub fn t(&self) -> C64 {
        self.t
    }

    pub fn r(&self) -> C64 {
        self.r
    }
}

/// Two-mode squeezer with Heisenberg map `a -> c a + s b^dagger`, `b -> c b + s a^dagger`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezerParams {
    c: f64,
    #[serde(with = "crate::states::cplx")]
    s: C64,
}

impl SqueezerParams {
    pub fn new(c: f64, s: C64) -> Result<Self> {
        let defect = c * c - s.norm_sqr() - 1.0;
        if c < 1.0 - PARAM_TOLERANCE || defect.abs() > PARAM_TOLERANCE * c.max(1.0).powi(2) {
            return Err(Error::InvalidParameter(format!(
                "c = {c}, |s| = {} violates c^2 - |s|^2 = 1",
                s.norm()
            )));
        }
        Ok(Self { c, s })
    }

    /// `c = cosh r`, `s = e^{i theta} sinh r`.
    pub fn from_gain(r: f64, theta: f64) -> Self {
        Self { c: r.cosh(), s: C64::from_polar(r.sinh(), theta) }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn s(&self) -> C64 {
        self.s
    }
}

/// Multiplies the amplitude at photon number `n` of `mode` by `e^{-i n phi}`,
/// so that `a -> e^{-i phi} a`.
pub fn phase_shift(state: &PureState, mode: usize, phi: f64) -> Result<PureState> {
    state.truncation().check_mode(mode)?;
    let mut ket = state.as_ket().clone();
    let trunc = ket.truncation().clone();
    let stride = trunc.strides()[mode];
    let cutoff = trunc.cutoff(mode);
    let phases: Vec<C64> = (0..=cutoff).map(|n| C64::from_polar(1.0, -(n as f64) * phi)).collect();
    for (i, amp) in ket.amplitudes_mut().iter_mut().enumerate() {
        *amp *= phases[(i / stride) % (cutoff + 1)];
    }
    Ok(PureState::from_ket_unchecked(ket))
}

/// Applies `D(alpha)` on `mode`, growing its cutoff by the coherent cutoff of `alpha`.
pub fn displacement(state: &PureState, mode: usize, alpha: C64) -> Result<PureState> {
    state.truncation().check_mode(mode)?;
    if alpha == C64::new(0.0, 0.0) {
        return Ok(state.clone());
    }
    let out = state.truncation().cutoff(mode) + coherent_cutoff(alpha);
    displacement_with_cutoff(state, mode, alpha, out)
}

/// [`displacement`] with an explicit output cutoff; weight that would land
/// above it is reported as [`Error::TruncationOverflow`].
pub fn displacement_with_cutoff(
    state: &PureState,
    mode: usize,
    alpha: C64,
    out_cutoff: usize,
) -> Result<PureState> {
    let trunc = state.truncation();
    trunc.check_mode(mode)?;
    let input = trunc.cutoff(mode);
    let out_cutoff = out_cutoff.max(input);
    // the truncated generator is inaccurate near its top rows, so work well above the output
    let work = 2 * out_cutoff + 24;
    let mut gen = DMatrix::<C64>::zeros(work + 1, work + 1);
    for n in 0..work {
        let f = ((n + 1) as f64).sqrt();
        gen[(n + 1, n)] = alpha * f;
        gen[(n, n + 1)] = -alpha.conj() * f;
    }
    let u = gen.exp();
    let block = u.view((0, 0), (work + 1, input + 1)).into_owned();
    let (ket, _) = apply_single_mode(state.as_ket(), mode, &block)?;
    let (kept, dropped) = ket.project(&trunc.with_cutoff(mode, out_cutoff))?;
    if dropped > OVERFLOW_TOLERANCE {
        return Err(Error::TruncationOverflow { mode, weight: dropped });
    }
    kept.normalize()
}

/// Applies a `(out + 1) x (cutoff + 1)` matrix to every fiber along `mode`.
fn apply_single_mode(ket: &Ket, mode: usize, u: &DMatrix<C64>) -> Result<(Ket, usize)> {
    let trunc = ket.truncation();
    let out_cutoff = u.nrows() - 1;
    let out_trunc = trunc.with_cutoff(mode, out_cutoff);
    let mut out = Ket::zeros(out_trunc.clone());
    let s_in = trunc.strides()[mode];
    let s_out = out_trunc.strides()[mode];
    let bases_in = Ket::fibers(trunc, mode);
    let bases_out = Ket::fibers(&out_trunc, mode);
    let mut x = DVector::<C64>::zeros(trunc.cutoff(mode) + 1);
    for (&bi, &bo) in bases_in.iter().zip(&bases_out) {
        for n in 0..x.len() {
            x[n] = ket.amplitudes()[bi + n * s_in];
        }
        if x.iter().all(|a| *a == C64::new(0.0, 0.0)) {
            continue;
        }
        let y = u * &x;
        let amps = out.amplitudes_mut();
        for (n, v) in y.iter().enumerate() {
            amps[bo + n * s_out] = *v;
        }
    }
    Ok((out, out_cutoff))
}

/// Offsets of every occupation of the modes other than `i` and `j`.
fn spectator_offsets(trunc: &Truncation, i: usize, j: usize) -> Vec<usize> {
    let rest = trunc.with_cutoff(i, 0).with_cutoff(j, 0);
    rest.occupations().map(|occ| trunc.index(&occ)).collect()
}

/// Eigendecomposition of the real symmetric tridiagonal matrix `E_N` with
/// off-diagonals `sqrt((k + 1)(N - k))`, in which the rotation
/// `exp(theta (a^dagger b - a b^dagger))` restricted to `N` total photons reads
/// `S V e^{-i theta Lambda} V^T S^{-1}` with `S = diag(i^k)` in the basis `|k, N - k>`.
///
/// `E_N` does not depend on the splitter, so decompositions are memoized per `N`.
fn block_eigen(n: usize) -> Arc<(Vec<f64>, DMatrix<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, DMatrix<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("eigen cache poisoned").get(&n) {
        return Arc::clone(hit);
    }
    let dim = n + 1;
    let mut e = DMatrix::<f64>::zeros(dim, dim);
    for k in 0..n {
        let v = (((k + 1) * (n - k)) as f64).sqrt();
        e[(k + 1, k)] = v;
        e[(k, k + 1)] = v;
    }
    let eig = SymmetricEigen::new(e);
    let entry = Arc::new((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors));
    cache.lock().expect("eigen cache poisoned").insert(n, Arc::clone(&entry));
    entry
}

fn i_pow(k: usize) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Applies the beam splitter to modes `(a, b)`.
///
/// The Schrodinger action is fixed by `U a^dagger U^dagger = t a^dagger - r* b^dagger`
/// and `U b^dagger U^dagger = r a^dagger + t* b^dagger`. Both output cutoffs
/// become the sum of the input cutoffs, so no amplitude is lost.
pub fn beam_splitter(
    state: &PureState,
    modes: (usize, usize),
    params: &BeamSplitterParams,
) -> Result<PureState> {
    let trunc = state.truncation();
    trunc.check_pair(modes)?;
    let (i, j) = modes;
    let (ci, cj) = (trunc.cutoff(i), trunc.cutoff(j));
    let total = ci + cj;
    let out_trunc = trunc.with_cutoff(i, total).with_cutoff(j, total);
    let (tau, rho) = (params.t.arg(), params.r.arg());
    let theta = params.r.norm().atan2(params.t.norm());
    let (si, sj) = (trunc.strides()[i], trunc.strides()[j]);
    let (oi, oj) = (out_trunc.strides()[i], out_trunc.strides()[j]);
    let mut out = Ket::zeros(out_trunc.clone());
    let rest_in = spectator_offsets(trunc, i, j);
    let rest_out = spectator_offsets(&out_trunc, i, j);
    let amps_in = state.amplitudes();
    let mut z = Vec::new();
    for n in 0..=total {
        let lo = n.saturating_sub(cj);
        let hi = n.min(ci);
        let eig = block_eigen(n);
        let (values, v) = (&eig.0, &eig.1);
        let phases: Vec<C64> = values.iter().map(|&l| C64::from_polar(1.0, -theta * l)).collect();
        for (&bi, &bo) in rest_in.iter().zip(&rest_out) {
            // phase e^{i (rho - tau) n_b} before the rotation, then S^{-1}
            let x: Vec<(usize, C64)> = (lo..=hi)
                .map(|k| {
                    let a = amps_in[bi + k * si + (n - k) * sj];
                    (k, a * C64::from_polar(1.0, (rho - tau) * (n - k) as f64) * i_pow(4 - k % 4))
                })
                .filter(|(_, a)| *a != C64::new(0.0, 0.0))
                .collect();
            if x.is_empty() {
                continue;
            }
            z.clear();
            z.extend((0..=n).map(|q| {
                let mut acc = C64::new(0.0, 0.0);
                for &(l, a) in &x {
                    acc += a * v[(l, q)];
                }
                acc * phases[q]
            }));
            let amps = out.amplitudes_mut();
            for k in 0..=n {
                let mut acc = C64::new(0.0, 0.0);
                for (q, zq) in z.iter().enumerate() {
                    acc += zq * v[(k, q)];
                }
                // S, then the phase e^{i (tau n_a - rho n_b)} after the rotation
                let phase = C64::from_polar(1.0, tau * k as f64 - rho * (n - k) as f64);
                amps[bo + k * oi + (n - k) * oj] = acc * i_pow(k) * phase;
            }
        }
    }
    Ok(PureState::from_ket_unchecked(out))
}

/// Squeezer output together with the norm that fell outside the output truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezerOutput {
    pub state: PureState,
    pub leaked: f64,
}

/// Applies the two-mode squeezer to modes `(a, b)`.
///
/// Starts from a headroom of `max(8, ceil(4 |s|^2))` photons per mode and
/// doubles it until the leaked norm is at most [`LEAKAGE_LIMIT`]. The returned
/// state is renormalized; the leak before renormalization is reported.
pub fn two_mode_squeezer(
    state: &PureState,
    modes: (usize, usize),
    params: &SqueezerParams,
) -> Result<SqueezerOutput> {
    state.truncation().check_pair(modes)?;
    let mut headroom = 8usize.max((4.0 * params.s.norm_sqr()).ceil() as usize);
    loop {
        let (ket, leaked) = squeeze_ket(state.as_ket(), modes, params, headroom);
        if leaked <= LEAKAGE_LIMIT {
            return Ok(SqueezerOutput { state: ket.normalize()?, leaked });
        }
        let next = headroom * 2;
        let t = state.truncation();
        let dim = t.dim() / ((t.cutoff(modes.0) + 1) * (t.cutoff(modes.1) + 1))
            * (t.cutoff(modes.0) + next + 1)
            * (t.cutoff(modes.1) + next + 1);
        if dim > MAX_SQUEEZER_DIM {
            return Err(Error::LeakageExceeded { leaked, limit: LEAKAGE_LIMIT });
        }
        headroom = next;
    }
}

/// [`two_mode_squeezer`] at a fixed headroom; fails instead of growing it.
pub fn two_mode_squeezer_with_headroom(
    state: &PureState,
    modes: (usize, usize),
    params: &SqueezerParams,
    headroom: usize,
) -> Result<SqueezerOutput> {
    state.truncation().check_pair(modes)?;
    let (ket, leaked) = squeeze_ket(state.as_ket(), modes, params, headroom);
    if leaked > LEAKAGE_LIMIT {
        return Err(Error::LeakageExceeded { leaked, limit: LEAKAGE_LIMIT });
    }
    Ok(SqueezerOutput { state: ket.normalize()?, leaked })
}

/// `U = exp(G a^dagger b^dagger) c^{-(n_a + n_b + 1)} exp(-G* a b)` with `G = s / c`.
///
/// The two outer factors change `n_a` and `n_b` together, so each output
/// amplitude is a finite sum over the input support and is exact; only the
/// weight above the output cutoffs is lost.
fn squeeze_ket(ket: &Ket, modes: (usize, usize), params: &SqueezerParams, headroom: usize) -> (Ket, f64) {
    let trunc = ket.truncation();
    let (i, j) = modes;
    let (ci, cj) = (trunc.cutoff(i), trunc.cutoff(j));
    let gamma = params.s / params.c;
    if gamma == C64::new(0.0, 0.0) {
        return (ket.clone(), 0.0);
    }
    let (pi, pj) = (ci + headroom, cj + headroom);
    let out_trunc = trunc.with_cutoff(i, pi).with_cutoff(j, pj);
    let (si, sj) = (trunc.strides()[i], trunc.strides()[j]);
    let (oi, oj) = (out_trunc.strides()[i], out_trunc.strides()[j]);
    let lnf: Vec<f64> = (0..=pi.max(pj) + 1).map(|n| ln_gamma(n as f64 + 1.0)).collect();
    let mut out = Ket::zeros(out_trunc.clone());
    let rest_in = spectator_offsets(trunc, i, j);
    let rest_out = spectator_offsets(&out_trunc, i, j);
    let mut mid = vec![C64::new(0.0, 0.0); (ci + 1) * (cj + 1)];
    for (&bi, &bo) in rest_in.iter().zip(&rest_out) {
        let amps = ket.amplitudes();
        if (0..=ci).all(|p| (0..=cj).all(|q| amps[bi + p * si + q * sj] == C64::new(0.0, 0.0))) {
            continue;
        }
        // exp(-G* a b) followed by c^{-(p + q + 1)}
        for p in 0..=ci {
            for q in 0..=cj {
                let mut acc = C64::new(0.0, 0.0);
                let mut coef = C64::new(1.0, 0.0);
                let mut k = 0;
                while p + k <= ci && q + k <= cj {
                    acc += coef * amps[bi + (p + k) * si + (q + k) * sj];
                    coef *= -gamma.conj() * (((p + k + 1) * (q + k + 1)) as f64).sqrt()
                        / (k + 1) as f64;
                    k += 1;
                }
                mid[p * (cj + 1) + q] = acc * params.c.powi(-((p + q + 1) as i32));
            }
        }
        // exp(G a^dagger b^dagger)
        let ln_g = gamma.norm().ln();
        let arg_g = gamma.arg();
        let out_amps = out.amplitudes_mut();
        for big_p in 0..=pi {
            for big_q in 0..=pj {
                let k0 = big_p.saturating_sub(ci).max(big_q.saturating_sub(cj));
                let k1 = big_p.min(big_q);
                if k0 > k1 {
                    continue;
                }
                let ln_c = k0 as f64 * ln_g
                    + 0.5
                        * (lnf[big_p] - lnf[big_p - k0] - lnf[k0] + lnf[big_q] - lnf[big_q - k0]
                            - lnf[k0]);
                let mut coef = C64::from_polar(ln_c.exp(), arg_g * k0 as f64);
                let mut acc = C64::new(0.0, 0.0);
                for k in k0..=k1 {
                    acc += coef * mid[(big_p - k) * (cj + 1) + (big_q - k)];
                    coef *= gamma * (((big_p - k) * (big_q - k)) as f64).sqrt() / (k + 1) as f64;
                }
                out_amps[bo + big_p * oi + big_q * oj] = acc;
            }
        }
    }
    let leaked = (ket.norm_sqr() - out.norm_sqr()).max(0.0);
    (out, leaked)
}
