//! Moment-based entanglement conditions.
//!
//! Every condition returns a [`WitnessReport`] whose `margin` is positive
//! exactly when the inequality certifies entanglement. The tests are one-sided:
//! a non-positive margin makes no claim about separability.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::closed_form;
use crate::devices::{ModeMoments, SqueezerParams};
use crate::error::{Error, Result};
use crate::fock::moments::QuadratureStats;
use crate::fock::{central_expect, MomentSource, Monomial};

/// Margins within this distance of zero are inconclusive.
pub const MARGIN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    HzProduct,
    HzSum,
    HzCentral,
    DuanSimon,
    TripartiteAb,
    TripartiteBc,
}

impl Condition {
    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::HzProduct => "hz_product",
            Condition::HzSum => "hz_sum",
            Condition::HzCentral => "hz_central",
            Condition::DuanSimon => "duan_simon",
            Condition::TripartiteAb => "tripartite_ab",
            Condition::TripartiteBc => "tripartite_bc",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Detected,
    NotDetected,
    Inconclusive,
}

impl Verdict {
    pub fn from_margin(margin: f64, tolerance: f64) -> Self {
        if margin.abs() <= tolerance {
            Verdict::Inconclusive
        } else if margin > tolerance {
            Verdict::Detected
        } else {
            Verdict::NotDetected
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Detected => "detected",
            Verdict::NotDetected => "not_detected",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One evaluated condition, serialized as a flat record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub condition: Condition,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub xi: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

impl WitnessReport {
    fn new(condition: Condition, m: Option<usize>, n: Option<usize>, xi: Option<f64>, lhs: f64, rhs: f64, margin: f64) -> Self {
        Self {
            condition,
            m,
            n,
            xi,
            lhs,
            rhs,
            margin,
            verdict: Verdict::from_margin(margin, MARGIN_TOLERANCE),
        }
    }

    /// Re-evaluates the verdict against another tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.verdict = Verdict::from_margin(self.margin, tolerance);
        self
    }

    pub fn detected(&self) -> bool {
        self.verdict == Verdict::Detected
    }
}

fn require_modes<S: MomentSource + ?Sized>(state: &S, expected: usize) -> Result<()> {
    let got = state.mode_count();
    if got != expected {
        return Err(Error::WrongModeCount { expected, got });
    }
    Ok(())
}

fn check_pair<S: MomentSource + ?Sized>(state: &S, modes: (usize, usize)) -> Result<()> {
    let n = state.mode_count();
    for mode in [modes.0, modes.1] {
        if mode >= n {
            return Err(Error::InvalidMode { mode, modes: n });
        }
    }
    if modes.0 == modes.1 {
        return Err(Error::InvalidParameter("witness pair needs two distinct modes".into()));
    }
    Ok(())
}

fn check_orders(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!("orders must be >= 1, got m = {m}, n = {n}")));
    }
    Ok(())
}

/// `|<a^m b^dagger^n>|^2 > <a^dagger^m a^m b^dagger^n b^n>` on a two-mode state.
pub fn hz_product<S: MomentSource + ?Sized>(state: &S, m: usize, n: usize) -> Result<WitnessReport> {
    require_modes(state, 2)?;
    hz_product_pair(state, (0, 1), m, n)
}

/// [`hz_product`] on modes `(a, b)` of a larger state.
pub fn hz_product_pair<S: MomentSource + ?Sized>(
    state: &S,
    modes: (usize, usize),
    m: usize,
    n: usize,
) -> Result<WitnessReport> {
    check_pair(state, modes)?;
    check_orders(m, n)?;
    let id = Monomial::identity(state.mode_count());
    let (a, b) = modes;
    let lhs = state.moment(&id.clone().with(a, 0, m).with(b, n, 0))?.norm_sqr();
    let rhs = state.moment(&id.with(a, m, m).with(b, n, n))?.re;
    Ok(WitnessReport::new(Condition::HzProduct, Some(m), Some(n), None, lhs, rhs, lhs - rhs))
}

/// `|<a^m b^n>|^2 > <a^dagger^m a^m><b^dagger^n b^n>` on a two-mode state.
pub fn hz_sum<S: MomentSource + ?Sized>(state: &S, m: usize, n: usize) -> Result<WitnessReport> {
    require_modes(state, 2)?;
    hz_sum_pair(state, (0, 1), m, n)
}

pub fn hz_sum_pair<S: MomentSource + ?Sized>(
    state: &S,
    modes: (usize, usize),
    m: usize,
    n: usize,
) -> Result<WitnessReport> {
    check_pair(state, modes)?;
    check_orders(m, n)?;
    let id = Monomial::identity(state.mode_count());
    let (a, b) = modes;
    let lhs = state.moment(&id.clone().with(a, 0, m).with(b, 0, n))?.norm_sqr();
    let rhs = state.moment(&id.clone().with(a, m, m))?.re * state.moment(&id.with(b, n, n))?.re;
    Ok(WitnessReport::new(Condition::HzSum, Some(m), Some(n), None, lhs, rhs, lhs - rhs))
}

/// The first-order product condition on displaced operators `a - <a>`, `b - <b>`.
pub fn hz_central<S: MomentSource + ?Sized>(state: &S) -> Result<WitnessReport> {
    require_modes(state, 2)?;
    hz_central_pair(state, (0, 1))
}

pub fn hz_central_pair<S: MomentSource + ?Sized>(state: &S, modes: (usize, usize)) -> Result<WitnessReport> {
    check_pair(state, modes)?;
    let id = Monomial::identity(state.mode_count());
    let (a, b) = modes;
    let lhs = central_expect(state, &id.clone().with(a, 0, 1).with(b, 1, 0))?.norm_sqr();
    let rhs = central_expect(state, &id.with(a, 1, 1).with(b, 1, 1))?.re;
    Ok(WitnessReport::new(Condition::HzCentral, Some(1), Some(1), None, lhs, rhs, lhs - rhs))
}

/// Weight of the quadrature combinations `u = |xi| x_a + x_b / xi`, `v = |xi| p_a - p_b / xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Xi {
    Value(f64),
    /// Minimize `(Delta u)^2 + (Delta v)^2 - xi^2 - 1/xi^2` over both signs of `xi`.
    Auto,
}

/// `(Delta u)^2 + (Delta v)^2 < xi^2 + 1/xi^2`; `lhs` is the variance sum,
/// `rhs` the bound, and `margin = rhs - lhs`, evaluated in a form free of cancellation at large `xi`.
pub fn duan_simon<S: MomentSource + ?Sized>(state: &S, xi: Xi) -> Result<WitnessReport> {
    require_modes(state, 2)?;
    duan_simon_pair(state, (0, 1), xi)
}

pub fn duan_simon_pair<S: MomentSource + ?Sized>(
    state: &S,
    modes: (usize, usize),
    xi: Xi,
) -> Result<WitnessReport> {
    check_pair(state, modes)?;
    let stats = QuadratureStats::of(state, modes)?;
    let xi = match xi {
        Xi::Value(v) if v == 0.0 || !v.is_finite() => return Err(Error::ZeroXi),
        Xi::Value(v) => v,
        Xi::Auto => optimal_xi(&stats),
    };
    let (vu, vv) = stats.uv(xi);
    let lhs = vu + vv;
    let rhs = xi * xi + 1.0 / (xi * xi);
    Ok(WitnessReport::new(Condition::DuanSimon, None, None, Some(xi), lhs, rhs, -stats.excess(xi)))
}

/// Golden-section search over `ln |xi|` in `[-10, 10]` for each sign, then
/// three Newton steps on the winner.
fn optimal_xi(stats: &QuadratureStats) -> f64 {
    let objective = |xi: f64| stats.excess(xi);
    // f(y) = P e^{2y} + Q e^{-2y} + const in y = ln |xi|
    let p = 2.0 * stats.excess_a;
    let q = 2.0 * stats.excess_b;
    let mut best = (f64::INFINITY, 1.0);
    for sign in [1.0, -1.0] {
        let g = |y: f64| objective(sign * y.exp());
        let (mut lo, mut hi) = (-10.0f64, 10.0f64);
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - ratio * (hi - lo);
        let mut x2 = lo + ratio * (hi - lo);
        let (mut f1, mut f2) = (g(x1), g(x2));
        while hi - lo > 1e-10 {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - ratio * (hi - lo);
                f1 = g(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + ratio * (hi - lo);
                f2 = g(x2);
            }
        }
        let mut y = (lo + hi) / 2.0;
        for _ in 0..3 {
            let d1 = 2.0 * p * (2.0 * y).exp() - 2.0 * q * (-2.0 * y).exp();
            let d2 = 4.0 * p * (2.0 * y).exp() + 4.0 * q * (-2.0 * y).exp();
            if d2 > 0.0 {
                let next = (y - d1 / d2).clamp(-10.0, 10.0);
                if g(next) <= g(y) {
                    y = next;
                }
            }
        }
        let v = g(y);
        if v < best.0 {
            best = (v, sign * y.exp());
        }
    }
    best.1
}

/// Pairwise product conditions on `(a, b)` and `(b, c)` of a three-mode state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripartiteReport {
    pub ab: WitnessReport,
    pub bc: WitnessReport,
    /// Both pairs detected. `false` makes no claim.
    pub genuine: bool,
}

pub fn tripartite_genuine<S: MomentSource + ?Sized>(state: &S) -> Result<TripartiteReport> {
    tripartite_genuine_relabeled(state, [0, 1, 2])
}

/// [`tripartite_genuine`] with modes read in the order `order[0], order[1], order[2]`.
pub fn tripartite_genuine_relabeled<S: MomentSource + ?Sized>(
    state: &S,
    order: [usize; 3],
) -> Result<TripartiteReport> {
    require_modes(state, 3)?;
    let [a, b, c] = order;
    if a == b || b == c || a == c || a > 2 || b > 2 || c > 2 {
        return Err(Error::InvalidParameter(format!("{order:?} is not a permutation of 0, 1, 2")));
    }
    let mut ab = hz_product_pair(state, (a, b), 1, 1)?;
    let mut bc = hz_product_pair(state, (b, c), 1, 1)?;
    ab.condition = Condition::TripartiteAb;
    bc.condition = Condition::TripartiteBc;
    Ok(TripartiteReport { ab, bc, genuine: ab.detected() && bc.detected() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

impl Predicate {
    /// Strict inequality with the witness margin tolerance, so roundoff never makes a predicate hold.
    fn greater(lhs: f64, rhs: f64) -> Self {
        Self { holds: lhs - rhs > MARGIN_TOLERANCE, lhs, rhs }
    }
}

/// Single-mode input properties that make a device output detectable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputPredicates {
    /// `<N> > (Delta N)^2`.
    pub sub_poissonian: Predicate,
    /// `|<a^2> - <a>^2| > <N> - |<a>|^2`.
    pub squeezing: Predicate,
    /// `<N (N-1)>^2 > <N (N-1)(N-2)(N-3)>`.
    pub fourth_moment: Predicate,
    /// `|<a^2>| > <N>`.
    pub pair_moment: Predicate,
}

pub fn input_predicates<S: MomentSource + ?Sized>(state: &S) -> Result<InputPredicates> {
    require_modes(state, 1)?;
    input_predicates_mode(state, 0)
}

pub fn input_predicates_mode<S: MomentSource + ?Sized>(state: &S, mode: usize) -> Result<InputPredicates> {
    let mm = ModeMoments::of(state, mode)?;
    Ok(predicates_from(&mm))
}

pub fn predicates_from(mm: &ModeMoments) -> InputPredicates {
    let n = mm.n();
    let mean = mm.mean();
    InputPredicates {
        sub_poissonian: Predicate::greater(n, mm.n2() - n * n),
        squeezing: Predicate::greater((mm.a2() - mean * mean).norm(), n - mean.norm_sqr()),
        fourth_moment: Predicate::greater(mm.factorial(2).powi(2), mm.factorial(4)),
        pair_moment: Predicate::greater(mm.a2().norm(), n),
    }
}

/// The quadrature condition on the squeezer output for `|psi>_a |0>_b`, in terms of `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParametricDuan {
    pub eta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `2|s| (eta c^2 + |s|^2 - 1)^{1/2} < c |s + s*| (eta + 1)^{1/2}`.
pub fn duan_parametric_condition(eta: f64, params: &SqueezerParams) -> Result<ParametricDuan> {
    let (lhs, rhs) = closed_form::duan_parametric_sides(eta, params)?;
    Ok(ParametricDuan { eta, lhs, rhs, holds: lhs < rhs })
}

/// [`duan_parametric_condition`] with `eta = 2 (<N_a> - |<a>|^2) + 1` read from a single-mode state.
pub fn duan_parametric_from_state<S: MomentSource + ?Sized>(
    state: &S,
    params: &SqueezerParams,
) -> Result<ParametricDuan> {
    require_modes(state, 1)?;
    let mm = ModeMoments::of(state, 0)?;
    duan_parametric_condition(closed_form::eta(&mm), params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::{two_mode_squeezer, SqueezerParams};
    use crate::fock::C64;
    use crate::states::{coherent, fock_superposition, number, number_pair, single_photon_bell, squeezed_vacuum, w_single_photon};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn verdict_thresholds() {
        assert_eq!(Verdict::from_margin(2e-10, MARGIN_TOLERANCE), Verdict::Detected);
        assert_eq!(Verdict::from_margin(1e-10, MARGIN_TOLERANCE), Verdict::Inconclusive);
        assert_eq!(Verdict::from_margin(-1e-10, MARGIN_TOLERANCE), Verdict::Inconclusive);
        assert_eq!(Verdict::from_margin(-2e-10, MARGIN_TOLERANCE), Verdict::NotDetected);
    }

    #[test]
    fn coherent_product_saturates() {
        let s = coherent(c(1.0, 0.0)).tensor(&coherent(c(1.0, 0.0)));
        let r = hz_product(&s, 1, 1).unwrap();
        assert!(r.margin.abs() < 1e-10);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(hz_sum(&s, 1, 1).unwrap().margin.abs() < 1e-10);
    }

    #[test]
    fn number_pair_high_order() {
        let r = hz_product(&number_pair(3, 0).unwrap(), 3, 3).unwrap();
        assert!((r.lhs - 9.0).abs() < 1e-12);
        assert_eq!(r.rhs, 0.0);
        assert!(r.detected());
    }

    #[test]
    fn bell_central_equals_plain() {
        let s = single_photon_bell();
        let plain = hz_product(&s, 1, 1).unwrap();
        let central = hz_central(&s).unwrap();
        assert!((plain.margin - 0.25).abs() < 1e-14);
        assert!((plain.margin - central.margin).abs() < 1e-14);
    }

    #[test]
    fn vacuum_duan_is_inconclusive() {
        let vac = number(0).tensor(&number(0));
        let r = duan_simon(&vac, Xi::Auto).unwrap();
        assert!(r.margin.abs() < 1e-10);
        assert_eq!(duan_simon(&vac, Xi::Value(0.0)), Err(Error::ZeroXi));
        let fixed = duan_simon(&vac, Xi::Value(1.7)).unwrap();
        assert!(fixed.margin.abs() < 1e-12);
    }

    #[test]
    fn duan_sign_of_xi_follows_squeezer_phase() {
        let vac = number(0).tensor(&number(0));
        // s = +sinh 1 needs negative xi; s = -sinh 1 needs positive xi
        for (theta, sign) in [(0.0, -1.0), (std::f64::consts::PI, 1.0)] {
            let out = two_mode_squeezer(&vac, (0, 1), &SqueezerParams::from_gain(1.0, theta)).unwrap().state;
            let r = duan_simon(&out, Xi::Auto).unwrap();
            let xi = r.xi.unwrap();
            assert_eq!(xi.signum(), sign);
            assert!((xi.abs() - 1.0).abs() < 1e-6);
            // two-mode squeezed vacuum: variance sum 2 e^{-2}
            assert!((r.lhs - 2.0 * (-2.0f64).exp()).abs() < 1e-8);
            let fixed = duan_simon(&out, Xi::Value(sign)).unwrap();
            assert!((fixed.lhs - 2.0 * (-2.0f64).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn tripartite_w() {
        let r = tripartite_genuine(&w_single_photon()).unwrap();
        assert!((r.ab.margin - 1.0 / 9.0).abs() < 1e-12);
        assert!((r.bc.margin - 1.0 / 9.0).abs() < 1e-12);
        assert!(r.genuine);
        assert_eq!(r.ab.condition, Condition::TripartiteAb);
        assert!(matches!(tripartite_genuine(&single_photon_bell()), Err(Error::WrongModeCount { .. })));
        let relabeled = tripartite_genuine_relabeled(&w_single_photon(), [2, 0, 1]).unwrap();
        assert!(relabeled.genuine);
    }

    #[test]
    fn predicates() {
        let p = input_predicates(&number(3)).unwrap();
        assert!(p.sub_poissonian.holds && (p.sub_poissonian.lhs - 3.0).abs() < 1e-12);
        let s = fock_superposition(&[(0, c(1.0, 0.0)), (3, c(1.0, 0.0))]).unwrap();
        let p = input_predicates(&s).unwrap();
        assert!(!p.sub_poissonian.holds);
        assert!((p.sub_poissonian.rhs - 2.25).abs() < 1e-12);
        assert!(p.fourth_moment.holds && (p.fourth_moment.lhs - 9.0).abs() < 1e-12);
        let p = input_predicates(&squeezed_vacuum(1.0, 0.0).unwrap()).unwrap();
        assert!(p.squeezing.holds && p.pair_moment.holds);
        assert!((p.pair_moment.lhs - 1.8134).abs() < 1e-4);
        assert!((p.pair_moment.rhs - 1.3811).abs() < 1e-4);
    }

    #[test]
    fn parametric_duan() {
        let real = SqueezerParams::from_gain(0.8, 0.0);
        let imag = SqueezerParams::from_gain(0.8, std::f64::consts::FRAC_PI_2);
        assert!(duan_parametric_condition(1.0, &real).unwrap().holds);
        assert!(duan_parametric_condition(4.0, &real).unwrap().holds);
        assert!(!duan_parametric_condition(1.0, &imag).unwrap().holds);
        assert_eq!(duan_parametric_condition(0.9, &real), Err(Error::InvalidEta(0.9)));
        let from_state = duan_parametric_from_state(&number(2), &real).unwrap();
        assert!((from_state.eta - 5.0).abs() < 1e-12);
    }

    #[test]
    fn order_zero_rejected() {
        assert!(hz_product(&single_photon_bell(), 0, 1).is_err());
    }
}
