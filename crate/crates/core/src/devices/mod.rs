//! Linear-optical unitaries, the linear amplifier channel and the
//! interferometric `<a b^dagger>` measurement.

mod amplifier;
mod linear;
mod maps;
mod measurement;

pub use amplifier::{
    classicality_threshold, default_step, is_degenerate, lindblad_evolve, linear_amp_moments,
    mode_gain, mode_threshold, separable_after, AmplifiedMoments, AmplifierParams, ModeGain,
    Threshold, TOP_POPULATION_LIMIT, TRACE_DRIFT_LIMIT,
};
pub use linear::{
    beam_splitter, displacement, displacement_with_cutoff, phase_shift, two_mode_squeezer,
    two_mode_squeezer_with_headroom, BeamSplitterParams, SqueezerOutput, SqueezerParams,
    LEAKAGE_LIMIT, PARAM_TOLERANCE,
};
pub use maps::{
    beam_splitter_moment_map, squeezer_moment_map, BeamSplitterMoments, InputClass, MomentSet,
    ModeMoments, SqueezerMoments,
};
pub use measurement::{measure_ab_dagger, measure_ab_dagger_pair};
