//! Spectral analysis of damped second-order systems `z̈ + Kz + Cż = 0` in
//! phase-space form, with Krein-space sign classification, overdamping and
//! Riesz-basis conditions, and semigroup probes.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod conditions;
mod error;
pub mod krein;
pub mod linalg;
pub mod model;
mod scalar;
pub mod semigroup;
pub mod spectrum;
mod tolerance;

pub use error::{Error, Result};
pub use scalar::Real;
pub use tolerance::ToleranceProfile;

pub type Matrix = linalg::DenseMatrix<f64>;
pub type Model = model::SystemModel<f64>;
pub type Beam = model::BeamSpec<f64>;
pub type State = model::PhaseVector<f64>;
pub type Mode = model::PhaseVector<num_complex::Complex<f64>>;
pub type Spectrum = spectrum::SpectrumReport<f64>;
pub type Signs = krein::SignClassification<f64>;
pub type Conditions = conditions::ConditionReport<f64>;
pub type Trajectory = semigroup::TrajectoryReport<f64>;
