use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::maps::MomentSet;
use crate::error::{Error, Result};
use crate::fock::{DensityOperator, MomentSource, Monomial, C64};

/// Largest accepted `|tr rho - 1|` after integration.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Largest accepted population of the top Fock level of either mode.
pub const TOP_POPULATION_LIMIT: f64 = 1e-8;

/// Gain (`A`) and loss (`C`) rates of the two-mode linear amplifier, and the evolution time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplifierParams {
    pub gain_a: f64,
    pub loss_a: f64,
    pub gain_b: f64,
    pub loss_b: f64,
    pub t: f64,
}

/// Per-mode intensity gain `G^2 = e^{(A - C) t}` and added noise `m = A (G^2 - 1)/(A - C)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeGain {
    pub g2: f64,
    pub noise: f64,
}

impl ModeGain {
    pub fn amplitude(&self) -> f64 {
        self.g2.sqrt()
    }
}

/// True when `A` and `C` are close enough that `A t` replaces `A (e^{(A - C) t} - 1)/(A - C)`.
pub fn is_degenerate(gain: f64, loss: f64) -> bool {
    (gain - loss).abs() < 1e-12 * gain.max(loss).max(1.0)
}

pub fn mode_gain(gain: f64, loss: f64, t: f64) -> ModeGain {
    let rate = gain - loss;
    let g2 = (rate * t).exp();
    let noise = if is_degenerate(gain, loss) { gain * t } else { gain * (rate * t).exp_m1() / rate };
    ModeGain { g2, noise }
}

impl AmplifierParams {
    pub fn new(gain_a: f64, loss_a: f64, gain_b: f64, loss_b: f64, t: f64) -> Result<Self> {
        let p = Self { gain_a, loss_a, gain_b, loss_b, t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gain_a", self.gain_a),
            ("loss_a", self.loss_a),
            ("gain_b", self.gain_b),
            ("loss_b", self.loss_b),
            ("t", self.t),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::NegativeRate(format!("{name} = {v}")));
            }
        }
        Ok(())
    }

    pub fn at_time(&self, t: f64) -> Self {
        Self { t, ..*self }
    }

    pub fn gain_a_mode(&self) -> ModeGain {
        mode_gain(self.gain_a, self.loss_a, self.t)
    }

    pub fn gain_b_mode(&self) -> ModeGain {
        mode_gain(self.gain_b, self.loss_b, self.t)
    }

    /// `G_ab^2 = e^{(A_a + A_b - C_a - C_b) t}`.
    pub fn joint_gain(&self) -> f64 {
        ((self.gain_a + self.gain_b - self.loss_a - self.loss_b) * self.t).exp()
    }

    fn max_rate(&self) -> f64 {
        [self.gain_a, self.loss_a, self.gain_b, self.loss_b].into_iter().fold(0.0, f64::max)
    }
}

/// Closed-form evolution of the tracked moments under the amplifier.
pub fn linear_amp_moments(m0: &MomentSet, params: &AmplifierParams) -> Result<MomentSet> {
    params.validate()?;
    let ga = params.gain_a_mode();
    let gb = params.gain_b_mode();
    Ok(MomentSet {
        ab_dag: m0.ab_dag * (ga.amplitude() * gb.amplitude()),
        na_nb: ga.g2 * gb.g2 * m0.na_nb
            + ga.noise * gb.g2 * m0.nb
            + gb.noise * ga.g2 * m0.na
            + ga.noise * gb.noise,
        na: ga.g2 * m0.na + ga.noise,
        nb: gb.g2 * m0.nb + gb.noise,
    })
}

/// Every normally ordered moment of the amplifier output, computed from the input moments.
///
/// Per mode, `<a^dagger^p a^q>_t = sum_k C(p,k) C(q,k) k! m^k G^{p+q-2k} <a^dagger^{p-k} a^{q-k}>_0`.
pub struct AmplifiedMoments<'a, S: MomentSource + ?Sized> {
    initial: &'a S,
    gains: [ModeGain; 2],
}

impl<'a, S: MomentSource + ?Sized> AmplifiedMoments<'a, S> {
    pub fn new(initial: &'a S, params: &AmplifierParams) -> Result<Self> {
        params.validate()?;
        if initial.mode_count() != 2 {
            return Err(Error::WrongModeCount { expected: 2, got: initial.mode_count() });
        }
        Ok(Self { initial, gains: [params.gain_a_mode(), params.gain_b_mode()] })
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn expansion(gain: &ModeGain, p: usize, q: usize) -> Vec<(f64, usize, usize)> {
    let g = gain.amplitude();
    let mut fact = 1.0;
    (0..=p.min(q))
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            let coef = binomial(p, k)
                * binomial(q, k)
                * fact
                * gain.noise.powi(k as i32)
                * g.powi((p + q - 2 * k) as i32);
            (coef, p - k, q - k)
        })
        .collect()
}

impl<S: MomentSource + ?Sized> MomentSource for AmplifiedMoments<'_, S> {
    fn mode_count(&self) -> usize {
        2
    }

    fn moment(&self, m: &Monomial) -> Result<C64> {
        if m.modes() != 2 {
            return Err(Error::ShapeMismatch(format!("{}-mode monomial on 2 modes", m.modes())));
        }
        let (pa, qa) = m.powers()[0];
        let (pb, qb) = m.powers()[1];
        let mut acc = C64::new(0.0, 0.0);
        for (ca, ra, sa) in expansion(&self.gains[0], pa, qa) {
            for (cb, rb, sb) in expansion(&self.gains[1], pb, qb) {
                let coef = ca * cb;
                if coef != 0.0 {
                    acc += self.initial.moment(&Monomial::new(vec![(ra, sa), (rb, sb)]))? * coef;
                }
            }
        }
        Ok(acc)
    }
}

/// Default step `min(0.01, 0.1 / max rate)`.
pub fn default_step(params: &AmplifierParams) -> f64 {
    let max = params.max_rate();
    if max > 0.0 {
        0.01f64.min(0.1 / max)
    } else {
        0.01
    }
}

/// Tridiagonal action of one mode's gain and loss on a coherence sector.
struct ModeOp {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl ModeOp {
    /// Elements `rho_{n, n - delta}` for `n` in `lo..=hi`. Gain out of the top
    /// level is kept, so population crossing the cutoff leaves the trace
    /// instead of piling up at the boundary.
    fn new(gain: f64, loss: f64, delta: isize, lo: usize, hi: usize) -> Self {
        let g = |n: usize| (n + 1) as f64;
        let len = hi - lo + 1;
        let mut lower = vec![0.0; len];
        let mut diag = vec![0.0; len];
        let mut upper = vec![0.0; len];
        for i in 0..len {
            let n = lo + i;
            let m = (n as isize - delta) as usize;
            lower[i] = gain * ((n * m) as f64).sqrt();
            diag[i] = -gain * (g(n) + g(m)) / 2.0 - loss * (n + m) as f64 / 2.0;
            upper[i] = loss * (((n + 1) * (m + 1)) as f64).sqrt();
        }
        Self { lower, diag, upper }
    }
}

struct Sector {
    da: isize,
    db: isize,
    op_a: ModeOp,
    op_b: ModeOp,
    len_b: usize,
}

impl Sector {
    fn derivative(&self, x: &[C64], out: &mut [C64]) {
        let la = self.op_a.diag.len();
        let lb = self.len_b;
        for i in 0..la {
            for j in 0..lb {
                let idx = i * lb + j;
                let mut d = x[idx] * (self.op_a.diag[i] + self.op_b.diag[j]);
                if i > 0 {
                    d += x[idx - lb] * self.op_a.lower[i];
                }
                if i + 1 < la {
                    d += x[idx + lb] * self.op_a.upper[i];
                }
                if j > 0 {
                    d += x[idx - 1] * self.op_b.lower[j];
                }
                if j + 1 < lb {
                    d += x[idx + 1] * self.op_b.upper[j];
                }
                out[idx] = d;
            }
        }
    }
}

fn sector_range(delta: isize, cutoff: usize) -> Option<(usize, usize)> {
    let lo = delta.max(0) as usize;
    let hi = (cutoff as isize).min(cutoff as isize + delta);
    (hi >= lo as isize).then_some((lo, hi as usize))
}

/// Integrates the two-mode gain/loss master equation from `0` to `params.t`
/// with fixed-step RK4.
///
/// The Liouvillian preserves the differences `n_a - m_a` and `n_b - m_b`
/// between row and column occupations, so each such coherence sector is
/// integrated on its own. Sectors with negative differences are filled by
/// Hermitian conjugation. Gain out of the top Fock level is kept, so weight
/// that would cross the cutoff leaves the trace; the top-level population is
/// checked against [`TOP_POPULATION_LIMIT`] and the trace against
/// [`TRACE_DRIFT_LIMIT`].
pub fn lindblad_evolve(rho: &DensityOperator, params: &AmplifierParams, dt: f64) -> Result<DensityOperator> {
    params.validate()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("step dt must be positive, got {dt}")));
    }
    let trunc = rho.truncation();
    if trunc.modes() != 2 {
        return Err(Error::WrongModeCount { expected: 2, got: trunc.modes() });
    }
    if params.t == 0.0 {
        return Ok(rho.clone());
    }
    let (ca, cb) = (trunc.cutoff(0), trunc.cutoff(1));
    let steps = (params.t / dt).ceil().max(1.0) as usize;
    let h = params.t / steps as f64;
    let src = rho.matrix();
    let mut out = DMatrix::<C64>::zeros(trunc.dim(), trunc.dim());
    let idx = |na: usize, nb: usize| na * (cb + 1) + nb;

    for da in 0..=(ca as isize) {
        for db in -(cb as isize)..=(cb as isize) {
            if da == 0 && db < 0 {
                continue;
            }
            let (Some((lo_a, hi_a)), Some((lo_b, hi_b))) = (sector_range(da, ca), sector_range(db, cb)) else {
                continue;
            };
            let sector = Sector {
                da,
                db,
                op_a: ModeOp::new(params.gain_a, params.loss_a, da, lo_a, hi_a),
                op_b: ModeOp::new(params.gain_b, params.loss_b, db, lo_b, hi_b),
                len_b: hi_b - lo_b + 1,
            };
            let la = hi_a - lo_a + 1;
            let lb = sector.len_b;
            let pos = |i: usize, j: usize| {
                let (na, nb) = (lo_a + i, lo_b + j);
                let (ma, mb) = ((na as isize - da) as usize, (nb as isize - db) as usize);
                (idx(na, nb), idx(ma, mb))
            };
            let mut x = vec![C64::new(0.0, 0.0); la * lb];
            for i in 0..la {
                for j in 0..lb {
                    let (r, c) = pos(i, j);
                    x[i * lb + j] = src[(r, c)];
                }
            }
            if x.iter().all(|v| *v == C64::new(0.0, 0.0)) {
                continue;
            }
            rk4(&sector, &mut x, h, steps);
            for i in 0..la {
                for j in 0..lb {
                    let (r, c) = pos(i, j);
                    let v = x[i * lb + j];
                    if sector.da == 0 && sector.db == 0 {
                        out[(r, c)] = C64::new(v.re, 0.0);
                    } else {
                        out[(r, c)] = v;
                        out[(c, r)] = v.conj();
                    }
                }
            }
        }
    }

    let trace: f64 = (0..trunc.dim()).map(|i| out[(i, i)].re).sum();
    let evolved = DensityOperator::from_parts(trunc.clone(), out)?;
    for mode in 0..2 {
        let pops = evolved.marginal_populations(mode)?;
        let top = *pops.last().expect("non-empty");
        if top > TOP_POPULATION_LIMIT {
            return Err(Error::TruncationOverflow { mode, weight: top });
        }
    }
    if (trace - 1.0).abs() > TRACE_DRIFT_LIMIT {
        return Err(Error::TraceDrift { trace });
    }
    Ok(evolved)
}

fn rk4(sector: &Sector, x: &mut [C64], h: f64, steps: usize) {
    let n = x.len();
    let mut k1 = vec![C64::new(0.0, 0.0); n];
    let mut k2 = vec![C64::new(0.0, 0.0); n];
    let mut k3 = vec![C64::new(0.0, 0.0); n];
    let mut k4 = vec![C64::new(0.0, 0.0); n];
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    for _ in 0..steps {
        sector.derivative(x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + k1[i] * (h / 2.0);
        }
        sector.derivative(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + k2[i] * (h / 2.0);
        }
        sector.derivative(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + k3[i] * h;
        }
        sector.derivative(&tmp, &mut k4);
        for i in 0..n {
            x[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}

/// Time after which a mode's output P-function is classical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "time", rename_all = "snake_case")]
pub enum Threshold {
    At(f64),
    Never,
}

impl Threshold {
    pub fn time(&self) -> Option<f64> {
        match self {
            Threshold::At(t) => Some(*t),
            Threshold::Never => None,
        }
    }
}

/// Smallest `t` with `e^{(A - C) t} >= A / C`, which is `ln(A/C)/(A - C)` when `A > C > 0`.
pub fn mode_threshold(gain: f64, loss: f64) -> Threshold {
    if gain > loss && loss > 0.0 && !is_degenerate(gain, loss) {
        Threshold::At((gain / loss).ln() / (gain - loss))
    } else {
        Threshold::Never
    }
}

/// Per-mode classicality thresholds `(t_a, t_b)`.
pub fn classicality_threshold(params: &AmplifierParams) -> (Threshold, Threshold) {
    (mode_threshold(params.gain_a, params.loss_a), mode_threshold(params.gain_b, params.loss_b))
}

/// Time after which the output is separable for every input, if both modes cross.
pub fn separable_after(params: &AmplifierParams) -> Option<f64> {
    let (ta, tb) = classicality_threshold(params);
    Some(ta.time()?.max(tb.time()?))
}
