//! Tuning, simulation and verification of the twisting sliding-mode controller.
//!
//! The controller `u = -mu2 sgn(x1) - mu1 sgn(x2)` drives the perturbed double
//! integrator `x1' = x2, x2' = u + w`, `|w| <= N`, to the origin. Given a level set
//! `V(x) = mu2 |x1| + x2^2 / 2 <= R` of initial states and a deadline `Ts`, the
//! [`tuning`] module produces gains that guarantee settling before `Ts`, together
//! with the convergence-time estimate backing that guarantee. [`sim`] integrates
//! the discontinuous closed loop, and [`verify`] runs simulation campaigns over
//! the boundary and interior of the level set against a battery of admissible
//! disturbances.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*F64` and
//! `*F32` aliases below name the concrete instantiations.

pub mod dynamics;
mod error;
mod scalar;
pub mod sim;
pub mod tuning;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{sgn, Scalar};

pub use dynamics::{DisturbanceProfile, PendulumParams, Sign, State};
pub use sim::{Plant, PlantKind, Sample, SimConfig, Trajectory};
pub use tuning::{Gains, SettlingEstimate, TuningParameters};
pub use verify::{CampaignReport, CampaignSpec};

pub type TuningParametersF64 = TuningParameters<f64>;
pub type GainsF64 = Gains<f64>;
pub type SettlingEstimateF64 = SettlingEstimate<f64>;
pub type StateF64 = State<f64>;
pub type PendulumParamsF64 = PendulumParams<f64>;
pub type DisturbanceProfileF64 = DisturbanceProfile<f64>;
pub type SimConfigF64 = SimConfig<f64>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type CampaignSpecF64 = CampaignSpec<f64>;
pub type CampaignReportF64 = CampaignReport<f64>;

pub type TuningParametersF32 = TuningParameters<f32>;
pub type GainsF32 = Gains<f32>;
pub type SettlingEstimateF32 = SettlingEstimate<f32>;
pub type StateF32 = State<f32>;
pub type PendulumParamsF32 = PendulumParams<f32>;
pub type DisturbanceProfileF32 = DisturbanceProfile<f32>;
pub type SimConfigF32 = SimConfig<f32>;
pub type TrajectoryF32 = Trajectory<f32>;
pub type CampaignSpecF32 = CampaignSpec<f32>;
pub type CampaignReportF32 = CampaignReport<f32>;
