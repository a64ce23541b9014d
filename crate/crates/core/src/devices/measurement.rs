use std::f64::consts::FRAC_PI_2;

use super::linear::{beam_splitter, phase_shift, BeamSplitterParams};
use crate::error::{Error, Result};
use crate::fock::{expect, Monomial, PureState, C64};

/// Reconstructs `<a b^dagger>` of a two-mode state from photon-number differences.
pub fn measure_ab_dagger(state: &PureState) -> Result<C64> {
    if state.modes() != 2 {
        return Err(Error::WrongModeCount { expected: 2, got: state.modes() });
    }
    measure_ab_dagger_pair(state, (0, 1))
}

/// Mode `b` passes a phase shifter (`b -> e^{-i phi} b`), then both modes meet
/// on a 50:50 splitter. The mean of `N_a - N_b` at the output is
/// `2 Re(e^{i phi} <a b^dagger>)`; settings `phi = 0` and `phi = -pi/2` give the
/// real and imaginary parts.
pub fn measure_ab_dagger_pair(state: &PureState, modes: (usize, usize)) -> Result<C64> {
    state.truncation().check_pair(modes)?;
    let difference = |phi: f64| -> Result<f64> {
        let shifted = phase_shift(state, modes.1, phi)?;
        let out = beam_splitter(&shifted, modes, &BeamSplitterParams::balanced())?;
        let n = out.modes();
        let na = expect(&out, &Monomial::identity(n).with(modes.0, 1, 1))?.re;
        let nb = expect(&out, &Monomial::identity(n).with(modes.1, 1, 1))?.re;
        Ok(na - nb)
    };
    let d0 = difference(0.0)?;
    let d1 = difference(-FRAC_PI_2)?;
    Ok(C64::new(d0, d1) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{coherent, number, single_photon_bell};

    #[test]
    fn known_values() {
        let one = C64::new(1.0, 0.0);
        let cc = coherent(one).tensor(&coherent(one));
        assert!((measure_ab_dagger(&cc).unwrap() - one).norm() < 1e-10);
        let bell = measure_ab_dagger(&single_photon_bell()).unwrap();
        assert!((bell - C64::new(0.5, 0.0)).norm() < 1e-12);
        let vac = number(0).tensor(&number(0));
        assert!(measure_ab_dagger(&vac).unwrap().norm() < 1e-14);
    }

    #[test]
    fn complex_correlation_is_recovered() {
        let s = coherent(C64::new(0.4, 0.9)).tensor(&coherent(C64::new(-0.7, 0.2)));
        let direct = expect(&s, &Monomial::new(vec![(0, 1), (1, 0)])).unwrap();
        assert!((measure_ab_dagger(&s).unwrap() - direct).norm() < 1e-10);
    }

    #[test]
    fn wrong_mode_count() {
        assert!(matches!(measure_ab_dagger(&number(1)), Err(Error::WrongModeCount { .. })));
    }
}
