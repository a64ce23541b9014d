use serde::{Deserialize, Serialize};

use super::linear::{BeamSplitterParams, SqueezerParams};
use crate::closed_form;
use crate::error::{Error, Result};
use crate::fock::{MomentSource, Monomial, C64};

/// The four two-mode moments tracked through devices and the amplifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    #[serde(with = "crate::states::cplx")]
    pub ab_dag: C64,
    pub na_nb: f64,
    pub na: f64,
    pub nb: f64,
}

impl MomentSet {
    /// Reads `<a b^dagger>`, `<N_a N_b>`, `<N_a>`, `<N_b>` on the mode pair `(a, b)`.
    pub fn of<S: MomentSource + ?Sized>(state: &S, modes: (usize, usize)) -> Result<Self> {
        let n = state.mode_count();
        let id = || Monomial::identity(n);
        let (a, b) = modes;
        if a == b {
            return Err(Error::InvalidParameter("moment pair needs distinct modes".into()));
        }
        Ok(Self {
            ab_dag: state.moment(&id().with(a, 0, 1).with(b, 1, 0))?,
            na_nb: state.moment(&id().with(a, 1, 1).with(b, 1, 1))?.re,
            na: state.moment(&id().with(a, 1, 1))?.re,
            nb: state.moment(&id().with(b, 1, 1))?.re,
        })
    }

    /// `|<a b^dagger>|^2 - <N_a N_b>`, positive when the product condition detects.
    pub fn product_witness(&self) -> f64 {
        self.ab_dag.norm_sqr() - self.na_nb
    }

    /// Slack in `|<a b^dagger>|^2 <= <N_a N_b> + <N_a>`, which holds for every state.
    pub fn bound_slack(&self) -> f64 {
        self.na_nb + self.na - self.ab_dag.norm_sqr()
    }

    pub fn max_abs_diff(&self, other: &MomentSet) -> f64 {
        [
            (self.ab_dag - other.ab_dag).norm(),
            (self.na_nb - other.na_nb).abs(),
            (self.na - other.na).abs(),
            (self.nb - other.nb).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Normally ordered single-mode moments `<a^dagger^p a^q>` for `p, q <= 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMoments {
    table: [[C64; 5]; 5],
}

impl ModeMoments {
    pub const ORDER: usize = 4;

    pub fn of<S: MomentSource + ?Sized>(state: &S, mode: usize) -> Result<Self> {
        let n = state.mode_count();
        if mode >= n {
            return Err(Error::InvalidMode { mode, modes: n });
        }
        let mut table = [[C64::new(0.0, 0.0); 5]; 5];
        for (p, row) in table.iter_mut().enumerate() {
            for (q, v) in row.iter_mut().enumerate() {
                *v = state.moment(&Monomial::identity(n).with(mode, p, q))?;
            }
        }
        Ok(Self { table })
    }

    /// Moments of the coherent state `|alpha>`: `alpha*^p alpha^q`.
    pub fn coherent(alpha: C64) -> Self {
        let mut table = [[C64::new(0.0, 0.0); 5]; 5];
        for (p, row) in table.iter_mut().enumerate() {
            for (q, v) in row.iter_mut().enumerate() {
                *v = alpha.conj().powu(p as u32) * alpha.powu(q as u32);
            }
        }
        Self { table }
    }

    pub fn get(&self, p: usize, q: usize) -> C64 {
        self.table[p][q]
    }

    /// `<a>`.
    pub fn mean(&self) -> C64 {
        self.table[0][1]
    }

    /// `<a^2>`.
    pub fn a2(&self) -> C64 {
        self.table[0][2]
    }

    /// `<N>`.
    pub fn n(&self) -> f64 {
        self.table[1][1].re
    }

    /// `<N^2>`.
    pub fn n2(&self) -> f64 {
        self.table[2][2].re + self.table[1][1].re
    }

    /// Factorial moment `<N (N - 1) ... (N - k + 1)> = <a^dagger^k a^k>`.
    pub fn factorial(&self, k: usize) -> f64 {
        self.table[k][k].re
    }
}

/// The two input classes with closed-form beam-splitter output moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputClass {
    /// Mode `b` in the vacuum.
    VacuumB,
    /// Mode `b` in the coherent state `|beta>`.
    CoherentB(C64),
}

impl InputClass {
    /// Parses `"vacuum"` or `"coherent"`; the coherent class needs `beta`.
    pub fn from_name(name: &str, beta: Option<C64>) -> Result<Self> {
        match (name, beta) {
            ("vacuum", _) => Ok(InputClass::VacuumB),
            ("coherent", Some(beta)) => Ok(InputClass::CoherentB(beta)),
            ("coherent", None) => Err(Error::InvalidParameter("coherent input class needs beta".into())),
            (other, _) => Err(Error::UnknownInputClass(other.to_string())),
        }
    }
}

/// Beam-splitter output moments; `leading` is the dominant large-`beta`
/// term of the product witness for the coherent class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterMoments {
    pub exact: MomentSet,
    pub leading: Option<f64>,
}

/// Closed-form output moments for `|psi>_a` with mode `b` in vacuum or a coherent state.
pub fn beam_splitter_moment_map(
    input: &ModeMoments,
    class: InputClass,
    params: &BeamSplitterParams,
) -> BeamSplitterMoments {
    let (t, r) = (params.t(), params.r());
    match class {
        InputClass::VacuumB => BeamSplitterMoments {
            exact: closed_form::bs_output_moments_vacuum(input, t, r),
            leading: None,
        },
        InputClass::CoherentB(beta) => {
            let m = |p, q| input.get(p, q);
            let b2 = beta.norm_sqr();
            let ab_dag = -r * t * input.n() + t * t * beta.conj() * m(0, 1)
                - r * r * beta * m(1, 0)
                + r * t * b2;
            let na = t.norm_sqr() * input.n()
                + 2.0 * (t.conj() * r * beta * m(1, 0)).re
                + r.norm_sqr() * b2;
            let nb = r.norm_sqr() * input.n() - 2.0 * (r * t.conj() * beta * m(1, 0)).re
                + t.norm_sqr() * b2;
            // b_out a_out acting on |psi>|beta> is c2 a^2 + c1 a + c0
            let coeffs = [t.conj() * r * beta * beta, beta * (t.norm_sqr() - r.norm_sqr()), -r.conj() * t];
            let mut na_nb = C64::new(0.0, 0.0);
            for (i, ci) in coeffs.iter().enumerate() {
                for (j, cj) in coeffs.iter().enumerate() {
                    na_nb += ci.conj() * cj * m(i, j);
                }
            }
            BeamSplitterMoments {
                exact: MomentSet { ab_dag, na_nb: na_nb.re, na, nb },
                leading: Some(closed_form::bs_coherent_leading(beta, t, r, input)),
            }
        }
    }
}

/// Two-mode squeezer output moments for `|psi>_a |0>_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezerMoments {
    pub moments: MomentSet,
    /// `<a b>`.
    pub ab: C64,
    /// `<a^2 b^2>`.
    pub a2b2: C64,
    /// `<a^dagger^2 a^2>`.
    pub fa2: f64,
    /// `<b^dagger^2 b^2>`.
    pub fb2: f64,
}

impl SqueezerMoments {
    /// `|<a^m b^n>|^2 - <a^dagger^m a^m><b^dagger^n b^n>` for `m = n = 1` or `2`.
    pub fn sum_witness(&self, order: usize) -> Option<f64> {
        match order {
            1 => Some(self.ab.norm_sqr() - self.moments.na * self.moments.nb),
            2 => Some(self.a2b2.norm_sqr() - self.fa2 * self.fb2),
            _ => None,
        }
    }
}

pub fn squeezer_moment_map(input: &ModeMoments, params: &SqueezerParams) -> SqueezerMoments {
    let (c, s) = (params.c(), params.s());
    let s2 = s.norm_sqr();
    let n = input.n();
    let np1_sq = input.n2() + 2.0 * n + 1.0;
    let np1_np2 = input.factorial(2) + 4.0 * n + 2.0;
    SqueezerMoments {
        moments: MomentSet {
            ab_dag: c * s.conj() * input.a2(),
            na_nb: c * c * s2 * np1_sq + s2 * s2 * (n + 1.0),
            na: c * c * n + s2,
            nb: s2 * (n + 1.0),
        },
        ab: c * s * (n + 1.0),
        a2b2: c * c * s * s * np1_np2,
        fa2: c.powi(4) * input.factorial(2) + 4.0 * c * c * s2 * n + 2.0 * s2 * s2,
        fb2: s2 * s2 * np1_np2,
    }
}
