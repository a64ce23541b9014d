//! Truncated Fock-space simulation of two- and three-mode bosonic states,
//! linear-optical devices and amplifier channels, and the moment-based
//! entanglement witnesses evaluated on them.
//!
//! * [`fock`]: truncations, kets, density operators and the normally ordered
//!   moment engine.
//! * [`states`]: constructors for the state families studied here.
//! * [`devices`]: phase shifters, displacements, beam splitters, two-mode
//!   squeezers, the linear amplifier channel and the interferometric
//!   `<a b^dagger>` measurement.
//! * [`witnesses`]: entanglement conditions returning [`witnesses::WitnessReport`]s.
//! * [`closed_form`]: analytic expressions used as oracles for the numerics.

pub mod closed_form;
pub mod devices;
pub mod error;
pub mod fock;
pub mod states;
pub mod witnesses;

pub use error::{Error, Result};
pub use fock::{
    central_expect, expect, inner, tensor, DensityOperator, Ensemble, Ket, MomentSource,
    Monomial, PureState, Truncation, C64,
};
