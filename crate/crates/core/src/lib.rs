//! Simulation and analysis of chaotic synchronization between optical cavity
//! modes coupled through mechanical resonators.
//!
//! The crate integrates the classical mean-field equations of four setups
//! (complete and phase synchronization, each with a shared resonator or with
//! mechanically coupled resonators), classifies orbits by their largest
//! Lyapunov exponent, and measures synchronization errors and Hilbert-phase
//! locking. Everything numerical is generic over [`Scalar`] (`f32` or `f64`);
//! the aliases at the crate root fix `f64`.
//!
//! Units: time in ns, rates in rad/ns, mechanical displacement in zero-point
//! units.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops over several same-length stage buffers read better than zips
#![allow(clippy::needless_range_loop)]

pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod io;
pub mod lyapunov;
pub mod model;
pub mod reference;
pub mod scalar;
pub mod scenarios;
pub mod signal;
pub mod sync;

pub use dynamics::{FnField, Model, VectorField};
pub use error::{Error, Result};
pub use integrator::{integrate, integrate_adaptive, step_rk4, Method};
pub use lyapunov::{lle_benettin, lle_wolf, LleEstimate, LleMethod, LleOptions};
pub use model::{derive_zpf, to_angular, validate_regime, RateInput, RegimeReport, Setup};
pub use scalar::Scalar;
pub use scenarios::{preset, run_scenario, sweep, Analysis, ScenarioReport, SweepReport, PRESET_NAMES};
pub use signal::{analytic_signal, hilbert_pv_direct, hilbert_transform, mean_abs, unwrap_phase};
pub use sync::{
    amplitude_error, cos_phase_error, detect_complete_sync, detect_phase_lock, phase_ratio, LockOptions,
    LockVerdict, SyncOptions, SyncVerdict,
};

pub type ModelParams = model::ModelParams<f64>;
pub type SystemState = dynamics::SystemState<f64>;
pub type Derivative = dynamics::Derivative<f64>;
pub type IntegrationPlan = integrator::IntegrationPlan<f64>;
pub type Trajectory = integrator::Trajectory<f64>;
pub type AnalyticSignal = signal::AnalyticSignal<f64>;
pub type ScenarioConfig = scenarios::ScenarioConfig<f64>;
pub type SyncErrors = sync::SyncErrors<f64>;
pub type RatioSeries = sync::RatioSeries<f64>;
