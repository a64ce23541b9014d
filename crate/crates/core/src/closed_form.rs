//! Analytic expressions for the witnesses on specific states and devices.
//!
//! Each function evaluates a printed closed form literally, including the
//! known defects, so that the numerical pipeline can adjudicate them. Where a
//! printed form is wrong a corrected companion is provided under a separate
//! name.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::devices::{AmplifierParams, MomentSet, ModeMoments, SqueezerParams};
use crate::error::{Error, Result};
use crate::fock::C64;

/// Record of one formula evaluation, as emitted by the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaResult {
    pub id: String,
    pub inputs: Vec<(String, f64)>,
    pub values: Vec<(String, f64)>,
    pub flags: Vec<(String, bool)>,
}

/// `k!` as a float; exact products up to 20, log-gamma above.
pub fn factorial(k: usize) -> f64 {
    if k <= 20 {
        (1..=k).map(|i| i as f64).product()
    } else {
        ln_gamma(k as f64 + 1.0).exp()
    }
}

pub fn ln_factorial(k: usize) -> f64 {
    if k <= 20 {
        factorial(k).ln()
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// `<N_a N_b> - |<a b^dagger>|^2` for the photon-added pair, with the printed
/// single power of `|alpha + beta|^2 + 2` in the denominator.
pub fn photon_added_witness(alpha: C64, beta: C64) -> f64 {
    photon_added_bracket(alpha, beta) / ((alpha + beta).norm_sqr() + 2.0)
}

/// The same bracket over `(|alpha + beta|^2 + 2)^2`, which is what the state actually gives.
pub fn photon_added_witness_corrected(alpha: C64, beta: C64) -> f64 {
    photon_added_bracket(alpha, beta) / ((alpha + beta).norm_sqr() + 2.0).powi(2)
}

fn photon_added_bracket(alpha: C64, beta: C64) -> f64 {
    let (a2, b2) = (alpha.norm_sqr(), beta.norm_sqr());
    let cross = 2.0 * (alpha.conj() * beta).re;
    -4.0 * a2 * b2 - cross * (a2 + b2) - 2.0 * cross - 1.0
}

/// `|<alpha|beta>|^2 = e^{-|alpha - beta|^2}`.
pub fn coherent_overlap_sq(alpha: C64, beta: C64) -> f64 {
    (-(alpha - beta).norm_sqr()).exp()
}

/// `<N_a N_b> - |<a b^dagger>|^2` for the symmetric cat pair, general form.
///
/// The printed form has no operator between its first two terms; it is read as a sum.
pub fn cat_witness_general(alpha: C64, beta: C64) -> f64 {
    let x = coherent_overlap_sq(alpha, beta);
    let (a2, b2) = (alpha.norm_sqr(), beta.norm_sqr());
    let diff = alpha.conj() * beta - alpha * beta.conj();
    let sum = 2.0 * (alpha * beta.conj()).re;
    let brace = -(diff * diff).re + 2.0 * x * (4.0 * a2 * b2 - sum * (a2 + b2))
        - x * x * (a2 - b2).powi(2);
    brace / (4.0 * (1.0 + x).powi(2))
}

/// The printed specialization to real positive `alpha beta*`.
pub fn cat_witness_real_positive(alpha: C64, beta: C64) -> Result<f64> {
    let p = alpha * beta.conj();
    if !(p.re > 0.0) || p.im.abs() > 1e-12 * p.norm() {
        return Err(Error::DomainViolation(format!("alpha beta* = {p} is not real and positive")));
    }
    let x = coherent_overlap_sq(alpha, beta);
    let (a, b) = (alpha.norm(), beta.norm());
    Ok((-2.0 * x * a * b * (a - b).powi(2) - x * x * (a * a - b * b).powi(2)) / (4.0 * (1.0 + x).powi(2)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatWitness {
    pub general: f64,
    /// `None` outside the real-positive domain.
    pub real_positive: Option<f64>,
}

impl CatWitness {
    /// Difference between the two forms on their common domain.
    pub fn discrepancy(&self) -> Option<f64> {
        self.real_positive.map(|v| (v - self.general).abs())
    }
}

pub fn cat_witness(alpha: C64, beta: C64) -> CatWitness {
    CatWitness {
        general: cat_witness_general(alpha, beta),
        real_positive: cat_witness_real_positive(alpha, beta).ok(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumberPairValues {
    /// `|<a^m b^dagger^m>|^2 = (k1!)^2 / (4 (k2!)^2)`.
    pub lhs: f64,
    /// `<a^dagger^m a^m b^dagger^m b^m> = k1!/(2 k2 - k1)!`, or 0.
    pub rhs: f64,
    /// `2 k2 >= k1`.
    pub overlapping: bool,
    /// Detection predicate: `k1! (2 k2 - k1)! > 4 (k2!)^2` on the overlapping branch, always true otherwise.
    pub detected: bool,
}

/// Product-condition values for `(|k1,k2> + |k2,k1>)/sqrt 2` at `m = n = k1 - k2`.
pub fn number_pair_values(k1: usize, k2: usize) -> Result<NumberPairValues> {
    if k1 <= k2 {
        return Err(Error::InvalidOrder { k1, k2 });
    }
    let lhs = (2.0 * (ln_factorial(k1) - ln_factorial(k2))).exp() / 4.0;
    let overlapping = 2 * k2 >= k1;
    let (rhs, detected) = if overlapping {
        let rhs = (ln_factorial(k1) - ln_factorial(2 * k2 - k1)).exp();
        let detected = ln_factorial(k1) + ln_factorial(2 * k2 - k1) > 4f64.ln() + 2.0 * ln_factorial(k2);
        (rhs, detected)
    } else {
        (0.0, true)
    };
    Ok(NumberPairValues { lhs, rhs, overlapping, detected })
}

/// Output moments of the splitter for `|psi>_a |0>_b`.
pub fn bs_output_moments_vacuum(input: &ModeMoments, t: C64, r: C64) -> MomentSet {
    let n = input.n();
    MomentSet {
        ab_dag: -r * t * n,
        na_nb: (t * r).norm_sqr() * (input.n2() - n),
        na: t.norm_sqr() * n,
        nb: r.norm_sqr() * n,
    }
}

/// Second-order product condition on the splitter output for `|psi>_a |0>_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderValues {
    /// `<a^2 b^dagger^2>_out = (r t)^2 (<N^2> - <N>)`.
    pub a2_b2dag: C64,
    pub lhs: f64,
    /// `|t r|^4 (<N^2 (N-1)^2> - 4 <N (N-1)^2> + 2 <N (N-1)>)`.
    pub rhs: f64,
    /// `<N (N-1)>^2`.
    pub reduced_lhs: f64,
    /// `<N (N-1)(N-2)(N-3)>`.
    pub reduced_rhs: f64,
}

impl SecondOrderValues {
    pub fn detected(&self) -> bool {
        self.reduced_lhs > self.reduced_rhs
    }
}

pub fn bs_m2_moments(input: &ModeMoments, t: C64, r: C64) -> SecondOrderValues {
    // power moments from factorial moments
    let f = |k| input.factorial(k);
    let n1 = f(1);
    let n2 = f(2) + f(1);
    let n3 = f(3) + 3.0 * f(2) + f(1);
    let n4 = f(4) + 6.0 * f(3) + 7.0 * f(2) + f(1);
    let a2_b2dag = (r * t) * (r * t) * (n2 - n1);
    let printed = (n4 - 2.0 * n3 + n2) - 4.0 * (n3 - 2.0 * n2 + n1) + 2.0 * (n2 - n1);
    SecondOrderValues {
        a2_b2dag,
        lhs: a2_b2dag.norm_sqr(),
        rhs: (t * r).norm_sqr().powi(2) * printed,
        reduced_lhs: (n2 - n1).powi(2),
        reduced_rhs: f(4),
    }
}

/// `<N> > <N^2> - <N>^2`.
pub fn sub_poissonian(input: &ModeMoments) -> bool {
    input.n() > input.n2() - input.n() * input.n()
}

/// Leading `|beta|^2` terms of `|<a b^dagger>_out|^2 - <N_a N_b>_out` for
/// `|psi>_a |beta>_b`, general `t` and `r`.
pub fn bs_coherent_leading(beta: C64, t: C64, r: C64, input: &ModeMoments) -> f64 {
    let mean = input.mean();
    let x = mean * mean - input.a2();
    let b2 = beta.norm_sqr();
    let v = b2 * (r.norm_sqr().powi(2) + t.norm_sqr().powi(2)) * (mean.norm_sqr() - input.n())
        - (t * r.conj()).powi(2) * beta.conj().powi(2) * x
        - (t.conj() * r).powi(2) * beta.powi(2) * x.conj();
    v.re
}

/// The balanced-splitter form with `phi = 2 (theta_t - theta_r - theta_beta)`.
pub fn bs_coherent_leading_balanced(beta_abs: f64, phi: f64, input: &ModeMoments) -> f64 {
    let mean = input.mean();
    let x = mean * mean - input.a2();
    let e = C64::from_polar(1.0, phi);
    let v = beta_abs * beta_abs / 4.0
        * (2.0 * (mean.norm_sqr() - input.n()) - e * x - e.conj() * x.conj());
    v.re
}

/// The `phi` that maximizes the balanced leading term.
pub fn optimal_leading_phase(input: &ModeMoments) -> f64 {
    let mean = input.mean();
    let x = mean * mean - input.a2();
    std::f64::consts::PI - x.arg()
}

/// `|<a^2> - <a>^2| > <N> - |<a>|^2`.
pub fn squeezing_predicate(input: &ModeMoments) -> bool {
    let mean = input.mean();
    (input.a2() - mean * mean).norm() > input.n() - mean.norm_sqr()
}

/// Duan quadrature sum on the splitter output for `|psi>_a |0>_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuanChain {
    /// `(Delta u)^2 + (Delta v)^2` at the requested `xi`.
    pub expression: f64,
    /// `min over sign of +-[t r* (<a^2> - <a>^2) + c.c.] + 2 |r t| (<N> - |<a>|^2)`.
    pub minimized: f64,
    pub squeezed: bool,
}

impl DuanChain {
    pub fn detected(&self) -> bool {
        self.minimized < 0.0
    }
}

pub fn duan_bs_chain(input: &ModeMoments, t: C64, r: C64, xi: f64) -> Result<DuanChain> {
    if xi == 0.0 {
        return Err(Error::ZeroXi);
    }
    let mean = input.mean();
    let delta = input.a2() - mean * mean;
    let k = (t * r.conj() * delta + t.conj() * r * delta.conj()).re;
    let d = input.n() - mean.norm_sqr();
    let x2 = xi * xi;
    let expression = -2.0 * xi.signum() * k
        + (t.norm_sqr() * x2 + r.norm_sqr() / x2) * (2.0 * d + 1.0)
        + (r.norm_sqr() * x2 + t.norm_sqr() / x2);
    let minimized = -k.abs() + 2.0 * (r * t).norm() * d;
    Ok(DuanChain { expression, minimized, squeezed: squeezing_predicate(input) })
}

/// `eta = 2 (<N_a> - |<a>|^2) + 1`.
pub fn eta(input: &ModeMoments) -> f64 {
    2.0 * (input.n() - input.mean().norm_sqr()) + 1.0
}

/// `(2 |s| (eta c^2 + |s|^2 - 1)^{1/2}, c |s + s*| (eta + 1)^{1/2})`.
pub fn duan_parametric_sides(eta: f64, params: &SqueezerParams) -> Result<(f64, f64)> {
    if !(eta >= 1.0 - 1e-12) {
        return Err(Error::InvalidEta(eta));
    }
    let (c, s) = (params.c(), params.s());
    let lhs = 2.0 * s.norm() * (eta * c * c + s.norm_sqr() - 1.0).max(0.0).sqrt();
    let rhs = c * (s + s.conj()).norm() * (eta + 1.0).sqrt();
    Ok((lhs, rhs))
}

/// `2 (1 - |s|^2/c^2) <N_a> + (1 - |s|^4/c^4)`.
pub fn squeezer_m2_condition(n: f64, params: &SqueezerParams) -> f64 {
    let q = params.s().norm_sqr() / (params.c() * params.c());
    2.0 * (1.0 - q) * n + (1.0 - q * q)
}

/// `(eta^2 |alpha|^2 e^{-|alpha|^2})^2`, each pair margin of the coherent W state.
pub fn w_coherent_margin(alpha: C64) -> f64 {
    let a2 = alpha.norm_sqr();
    let eta2 = 1.0 / (3.0 * (1.0 + 2.0 * (-a2).exp()));
    (eta2 * a2 * (-a2).exp()).powi(2)
}

/// `e^{-(C_a + C_b) t} (|<a b^dagger>_0|^2 - <N_a N_b>_0)`; loss-only branch.
pub fn amp_loss_scaled(m0: &MomentSet, params: &AmplifierParams) -> Result<f64> {
    if params.gain_a != 0.0 || params.gain_b != 0.0 {
        return Err(Error::BranchViolation("loss-only form needs zero gain on both modes".into()));
    }
    Ok((-(params.loss_a + params.loss_b) * params.t).exp() * m0.product_witness())
}

/// The bracket multiplying `G_ab^2` in the high-gain limit, and its product with `G_ab^2`.
pub fn amp_high_gain(m0: &MomentSet, params: &AmplifierParams) -> Result<(f64, f64)> {
    let (ra, rb) = (params.gain_a - params.loss_a, params.gain_b - params.loss_b);
    if !(ra > 0.0 && rb > 0.0) {
        return Err(Error::BranchViolation("high-gain form needs A > C on both modes".into()));
    }
    let (fa, fb) = (params.gain_a / ra, params.gain_b / rb);
    let bracket = m0.product_witness() - fa * m0.nb - fb * m0.na - fa * fb;
    Ok((bracket, params.joint_gain() * bracket))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmpWitnessForms {
    pub loss_scaled: Option<f64>,
    /// `(bracket, G_ab^2 * bracket)`.
    pub high_gain: Option<(f64, f64)>,
}

/// Both amplifier witness forms; fails when neither branch applies.
pub fn amp_witness_forms(m0: &MomentSet, params: &AmplifierParams) -> Result<AmpWitnessForms> {
    let loss_scaled = amp_loss_scaled(m0, params).ok();
    let high_gain = amp_high_gain(m0, params).ok();
    if loss_scaled.is_none() && high_gain.is_none() {
        return Err(Error::BranchViolation(
            "amplifier is neither loss-only nor above unity gain on both modes".into(),
        ));
    }
    Ok(AmpWitnessForms { loss_scaled, high_gain })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(5), 120.0);
        let exact21 = 51_090_942_171_709_440_000.0;
        assert!((factorial(21) / exact21 - 1.0).abs() < 1e-12);
        assert!((ln_factorial(30) - (1..=30).map(|i| (i as f64).ln()).sum::<f64>()).abs() < 1e-10);
    }

    #[test]
    fn photon_added_printed_values() {
        let one = c(1.0, 0.0);
        assert!((photon_added_witness(one, one) + 13.0 / 6.0).abs() < 1e-15);
        assert!((photon_added_witness(c(0.0, 0.0), c(0.0, 0.0)) + 0.5).abs() < 1e-15);
        assert!((photon_added_witness_corrected(one, one) + 13.0 / 36.0).abs() < 1e-15);
        assert!((photon_added_witness_corrected(c(0.0, 0.0), c(0.0, 0.0)) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn cat_forms() {
        let a = c(1.3, 0.0);
        let w = cat_witness(a, a);
        assert!(w.general.abs() < 1e-15);
        assert!(w.real_positive.unwrap().abs() < 1e-15);
        assert!(matches!(
            cat_witness_real_positive(c(1.0, 0.0), c(0.0, 1.0)),
            Err(Error::DomainViolation(_))
        ));
        assert!(cat_witness(c(1.0, 0.0), c(0.0, 1.0)).real_positive.is_none());
        // the printed specialization carries 2x where the general form gives 4x
        let w = cat_witness(c(1.0, 0.0), c(0.5, 0.0));
        let x = (-0.25f64).exp();
        let printed = (-2.0 * x * 0.5 * 0.25 - x * x * 0.5625) / (4.0 * (1.0 + x).powi(2));
        let doubled = (-4.0 * x * 0.5 * 0.25 - x * x * 0.5625) / (4.0 * (1.0 + x).powi(2));
        assert!((w.real_positive.unwrap() - printed).abs() < 1e-15);
        assert!((w.general - doubled).abs() < 1e-15);
    }

    #[test]
    fn number_pair_branches() {
        let v = number_pair_values(3, 0).unwrap();
        assert_eq!((v.lhs, v.rhs, v.overlapping, v.detected), (9.0, 0.0, false, true));
        let v = number_pair_values(4, 2).unwrap();
        assert!((v.lhs - 36.0).abs() < 1e-12 && (v.rhs - 24.0).abs() < 1e-12);
        assert!(v.overlapping && v.detected);
        let v = number_pair_values(3, 2).unwrap();
        assert!((v.lhs - 2.25).abs() < 1e-12 && (v.rhs - 6.0).abs() < 1e-12);
        assert!(v.overlapping && !v.detected);
        assert!(matches!(number_pair_values(2, 3), Err(Error::InvalidOrder { .. })));
        let big = number_pair_values(30, 20).unwrap();
        assert!((big.lhs / (factorial(30) / factorial(20)).powi(2) * 4.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn duan_parametric_values() {
        let p = SqueezerParams::from_gain(0.7, 0.0);
        let (l, r) = duan_parametric_sides(1.0, &p).unwrap();
        // eta = 1, real s: both sides carry a common sqrt(2)
        let root2 = std::f64::consts::SQRT_2;
        assert!((l - 2.0 * root2 * p.s().norm_sqr()).abs() < 1e-12);
        assert!((r - 2.0 * root2 * p.c() * p.s().norm()).abs() < 1e-12);
        let imag = SqueezerParams::from_gain(0.7, std::f64::consts::FRAC_PI_2);
        assert!(duan_parametric_sides(3.0, &imag).unwrap().1 < 1e-12);
        assert_eq!(duan_parametric_sides(0.5, &p), Err(Error::InvalidEta(0.5)));
    }

    #[test]
    fn amp_branches() {
        let m0 = MomentSet { ab_dag: c(0.5, 0.0), na_nb: 0.0, na: 0.5, nb: 0.5 };
        let loss = AmplifierParams::new(0.0, 0.1, 0.0, 0.2, 2.0).unwrap();
        let v = amp_loss_scaled(&m0, &loss).unwrap();
        assert!((v - 0.25 * (-0.6f64).exp()).abs() < 1e-15);
        assert!(amp_high_gain(&m0, &loss).is_err());
        let gain = AmplifierParams::new(0.2, 0.1, 0.2, 0.1, 3.0).unwrap();
        assert!(amp_loss_scaled(&m0, &gain).is_err());
        let (bracket, _) = amp_high_gain(&m0, &gain).unwrap();
        assert!(bracket <= 0.0);
        let neither = AmplifierParams::new(0.1, 0.2, 0.0, 0.0, 1.0).unwrap();
        assert!(matches!(amp_witness_forms(&m0, &neither), Err(Error::BranchViolation(_))));
    }

    #[test]
    fn w_margin_shape() {
        assert!((w_coherent_margin(c(1.0, 0.0)) - (1.0 / (3.0 * (1.0 + 2.0 / std::f64::consts::E)) / std::f64::consts::E).powi(2)).abs() < 1e-15);
    }
}
