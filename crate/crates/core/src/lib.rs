//! Numerical toolkit for spin-motion entangled squeezed states of a
//! trapped-ion oscillator.
//!
//! The crate simulates state-dependent-force dynamics on a truncated Fock
//! space (with and without the Lamb-Dicke approximation), evaluates the
//! closed-form observables of displaced-squeezed cat states, inverts
//! population traces back to physical parameters, and models quasi-static
//! magnetic-field noise and motional heating with Monte-Carlo wavefunction
//! trajectories.
//!
//! All numerics are generic over the real scalar type through [`Float`];
//! concrete `f64` aliases for the main domain types live at the crate root.

pub mod error;
pub mod estimate;
pub mod float;
pub mod fock;
pub mod linalg;
pub mod noise;
pub mod signals;
pub(crate) mod special;
pub mod spinboson;

pub use error::{Error, Result};
pub use float::Float;

/// Complex scalar shorthands.
pub type C32 = num_complex::Complex<f32>;
pub type C64 = num_complex::Complex<f64>;

/// Double-precision aliases for the domain types.
pub type OscillatorState64 = fock::OscillatorState<f64>;
pub type SqueezeParam64 = fock::SqueezeParam<f64>;
pub type NumberDist64 = fock::NumberDist<f64>;
pub type PhaseGrid64 = fock::PhaseGrid<f64>;
pub type SpinMotionState64 = spinboson::SpinMotionState<f64>;
pub type SdfPulse64 = spinboson::SdfPulse<f64>;
pub type TrapParams64 = spinboson::TrapParams<f64>;
pub type Scenario64 = spinboson::Scenario<f64>;
pub type TimeSeries64 = spinboson::TimeSeries<f64>;
pub type PopulationTrace64 = estimate::PopulationTrace<f64>;
pub type FitResult64 = estimate::FitResult<f64>;
pub type NoiseModel64 = noise::NoiseModel<f64>;
pub type EnsembleTrace64 = noise::EnsembleTrace<f64>;

/// Single-precision aliases.
pub type OscillatorState32 = fock::OscillatorState<f32>;
pub type SqueezeParam32 = fock::SqueezeParam<f32>;
pub type NumberDist32 = fock::NumberDist<f32>;
pub type SpinMotionState32 = spinboson::SpinMotionState<f32>;
