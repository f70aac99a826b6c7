//! Adaptive detection of two-qubit entanglement through CHSH violation.
//!
//! The crate simulates the full measure-and-update loop: dichotomic local
//! measurements built from complex setting vectors ([`measurement`]), a
//! stochastic optimizer that climbs the noisy CHSH value using simultaneous
//! random perturbations ([`cspsa`]), finite-ensemble shot noise, and
//! ground-truth oracles (closed forms, the Horodecki bound and a see-saw
//! maximizer, [`oracle`]) to validate what the optimizer finds. The
//! [`harness`] module turns all of it into reproducible Monte Carlo
//! experiments with CSV output; `bell-hunter` is the CLI front end.
//!
//! Core math is generic over the floating-point scalar via [`Scalar`];
//! the aliases below fix the common `f64` instantiation.

pub mod cspsa;
pub mod error;
pub mod harness;
pub mod measurement;
pub mod oracle;
pub mod qmath;
pub mod rng;
pub mod scalar;
pub mod states;

pub use error::{Error, Result};
pub use rng::RandomStream;
pub use scalar::Scalar;

pub type C32 = num_complex::Complex<f32>;
pub type C64 = num_complex::Complex<f64>;
pub type ComplexMatrix64 = qmath::ComplexMatrix<f64>;
pub type EigenDecomposition64 = qmath::EigenDecomposition<f64>;
pub type DensityMatrix64 = states::DensityMatrix<f64>;
pub type PureState64 = states::PureState<f64>;
pub type Block64 = measurement::Block<f64>;
pub type SettingVector64 = measurement::SettingVector<f64>;
pub type Observable64 = measurement::Observable<f64>;
pub type GainSchedule64 = cspsa::GainSchedule<f64>;
pub type TrajectoryRecord64 = cspsa::TrajectoryRecord<f64>;
pub type SeesawResult64 = oracle::SeesawResult<f64>;
pub type ExperimentConfig64 = harness::ExperimentConfig<f64>;
