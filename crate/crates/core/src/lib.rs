//! Weak tracking in the Rössler system under a parameter shift.
//!
//! The parameter `a` of the Rössler system is ramped from a value where the
//! system rests at a stable equilibrium to one where it is chaotic. For most
//! ramp rates the pullback trajectory ends up wandering over the whole chaotic
//! attractor. At isolated critical rates it instead converges onto the
//! period-one unstable orbit embedded in that attractor. This crate finds
//! those rates:
//!
//! 1. locate the period-one orbit as a fixed point of a Poincaré return map
//!    ([`upo`]);
//! 2. integrate the shifted system from the past equilibrium and measure how
//!    far its last section crossing lies from the orbit's stable manifold
//!    ([`tracking::gap`]);
//! 3. bracket and refine sign changes of that gap over a range of rates and
//!    confirm each root by shadowing ([`tracking::find_critical_rates`]).
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix `f64`.
//!
//! ```
//! use ratetip::{RosslerParams, UpoConfig};
//!
//! let orbit = ratetip::upo::find_period_one_orbit(&RosslerParams::default(), &UpoConfig::default())?;
//! assert!(orbit.lambda_u < -1.0);
//! # Ok::<(), ratetip::Error>(())
//! ```

// `!(a < b)` comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod frozen;
pub mod integrate;
pub mod linalg;
pub mod poincare;
pub mod scalar;
pub mod shift;
pub mod system;
pub mod tracking;
pub mod upo;

pub use error::{Error, Result};
pub use scalar::Real;
pub use tracking::{FateClass, GapMode, ScanStatus};

pub type ShiftProfile = shift::ShiftProfile<f64>;
pub type State = system::State<f64>;
pub type RosslerParams = system::RosslerParams<f64>;
pub type NonautonomousSpec = system::NonautonomousSpec<f64>;
pub type IntegratorConfig = integrate::IntegratorConfig<f64>;
pub type SectionPoint = poincare::SectionPoint<f64>;
pub type CrossingRecord = poincare::CrossingRecord<f64>;
pub type ReturnMap = poincare::ReturnMap<f64>;
pub type PeriodicOrbit = upo::PeriodicOrbit<f64>;
pub type UpoConfig = upo::UpoConfig<f64>;
pub type PullbackRunConfig = tracking::PullbackRunConfig<f64>;
pub type GapResult = tracking::GapResult<f64>;
pub type CriticalRate = tracking::CriticalRate<f64>;
pub type RefineConfig = tracking::RefineConfig<f64>;
pub type ConfirmConfig = tracking::ConfirmConfig<f64>;
pub type Fate = tracking::Fate<f64>;
