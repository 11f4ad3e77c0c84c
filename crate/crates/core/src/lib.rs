//! Transmission estimation with quantum light: Gaussian probe states in
//! complex covariance form, quantum Fisher information of the system
//! transmission `T`, photon-number measurements that attain it, and a
//! truncated Fock-space oracle to check all of the above.
//!
//! Every numeric type is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix it to `f64`. The Monte Carlo harness is
//! `f64` only.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod measurement;
pub mod montecarlo;
pub mod qfi;
pub mod scalar;

pub use error::{Error, Result};
pub use gaussian::{bright_tmss_photons, StateKind};
pub use measurement::{MeasurementPlan as GenericMeasurementPlan, MomentModel};
pub use montecarlo::{mc_estimate, MCConfig, MCResult, Sampler};
pub use qfi::{Method, Regime};
pub use scalar::Scalar;

pub type ComplexAmplitude = gaussian::ComplexAmplitude<f64>;
pub type SqueezeSpec = gaussian::SqueezeSpec<f64>;
pub type StateSpec = gaussian::StateSpec<f64>;
pub type ChannelConfig = gaussian::ChannelConfig<f64>;
pub type GaussianState = gaussian::GaussianState<f64>;
pub type Moments = gaussian::Moments<f64>;
pub type EstimationReport = qfi::EstimationReport<f64>;
pub type ParamFamily = qfi::ParamFamily<f64>;
pub type QfiTerms = qfi::QfiTerms<f64>;
pub type MeasurementPlan = measurement::MeasurementPlan<f64>;
pub type TransmissionVariance = measurement::TransmissionVariance<f64>;
pub type FockVector = fock::FockVector<f64>;
pub type FockDensity = fock::FockDensity<f64>;
pub type CMatrix = linalg::CMatrix<f64>;
