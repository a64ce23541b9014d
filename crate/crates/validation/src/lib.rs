//! Seeded random inputs and fixed state suites shared by the acceptance checks.

use fockwit::devices::{beam_splitter, two_mode_squeezer, BeamSplitterParams, SqueezerParams};
use fockwit::states::{
    cat_pair, coherent, displaced, fock_superposition, number, number_pair, photon_added_pair,
    single_photon_bell, squeezed_vacuum,
};
use fockwit::{PureState, C64};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    C64::from_polar(radius * rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU))
}

/// Random normalized superposition of `|0>..|max>`.
pub fn random_fock_superposition(rng: &mut ChaCha8Rng, max: usize) -> PureState {
    let terms: Vec<(usize, C64)> =
        (0..=max).map(|n| (n, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))).collect();
    fock_superposition(&terms).unwrap()
}

/// Single-mode inputs used across the device and predicate checks.
pub fn single_mode_suite() -> Vec<(&'static str, PureState)> {
    vec![
        ("vacuum", number(0)),
        ("number 1", number(1)),
        ("number 3", number(3)),
        ("coherent 1", coherent(c(1.0, 0.0))),
        ("coherent 0.6-0.8i", coherent(c(0.6, -0.8))),
        ("squeezed 0.5", squeezed_vacuum(0.5, 0.0).unwrap()),
        ("squeezed 1 at 0.7", squeezed_vacuum(1.0, 0.7).unwrap()),
        ("|0>+|3>", fock_superposition(&[(0, c(1.0, 0.0)), (3, c(1.0, 0.0))]).unwrap()),
        ("|1>+i|2>", fock_superposition(&[(1, c(1.0, 0.0)), (2, c(0.0, 1.0))]).unwrap()),
    ]
}

/// Two-mode states reached by every constructor and device in the library.
pub fn two_mode_suite() -> Vec<(&'static str, PureState)> {
    let balanced = BeamSplitterParams::balanced();
    let skew = BeamSplitterParams::from_angles(0.4, 0.3, -1.1);
    let sq = SqueezerParams::from_gain(0.4, 0.6);
    let bell = single_photon_bell();
    vec![
        ("vacuum pair", number(0).tensor(&number(0))),
        ("coherent product", coherent(c(1.0, 0.0)).tensor(&coherent(c(-0.4, 0.7)))),
        ("photon-added 1,1", photon_added_pair(c(1.0, 0.0), c(1.0, 0.0)).unwrap()),
        ("photon-added 0.5i,-0.3", photon_added_pair(c(0.0, 0.5), c(-0.3, 0.0)).unwrap()),
        ("cat 1,0.5", cat_pair(c(1.0, 0.0), c(0.5, 0.0)).unwrap()),
        ("cat 0.8i,-0.6", cat_pair(c(0.0, 0.8), c(-0.6, 0.0)).unwrap()),
        ("number pair 3,0", number_pair(3, 0).unwrap()),
        ("number pair 4,2", number_pair(4, 2).unwrap()),
        ("bell", bell.clone()),
        ("displaced bell", displaced(&bell, &[c(0.7, 0.2), c(-0.5, 0.4)]).unwrap()),
        ("split |3>|0>", beam_splitter(&number(3).tensor(&number(0)), (0, 1), &balanced).unwrap()),
        (
            "split squeezed with coherent",
            beam_splitter(&squeezed_vacuum(0.6, 0.0).unwrap().tensor(&coherent(c(0.5, 0.5))), (0, 1), &skew)
                .unwrap(),
        ),
        ("squeezed vacuum pair", two_mode_squeezer(&number(0).tensor(&number(0)), (0, 1), &sq).unwrap().state),
        ("squeezed |1>|0>", two_mode_squeezer(&number(1).tensor(&number(0)), (0, 1), &sq).unwrap().state),
    ]
}
