//! Quantum semi-Markov processes.
//!
//! Waiting-time distributions and their memory kernels, the dephasing and
//! non-unital projector families with closed-form maps and time-local
//! rates, and the non-Markovianity quantifiers built on them: the
//! deviation-from-semigroup measure (rate and Choi forms), the
//! trace-distance backflow measure, intermediate-map CP-divisibility scans
//! and Holevo-information curves.
//!
//! Every numerical type is generic over [`Real`] (`f32` or `f64`). The
//! aliases below fix the scalar to `f64`, which is what the command-line
//! front end and the acceptance tests use.

pub mod error;
pub mod measures;
pub mod numerics;
pub mod quantum;
pub mod scalar;
pub mod semimarkov;

pub use error::{Error, Result};
pub use scalar::Real;

pub use num_complex::Complex;

pub type Matrix = numerics::ComplexMatrix<f64>;
pub type Spectrum = numerics::Spectrum<f64>;
pub type DensityMatrix = quantum::DensityMatrix<f64>;
pub type KrausSet = quantum::KrausSet<f64>;
pub type ChoiMatrix = quantum::ChoiMatrix<f64>;
pub type SuperOperator = quantum::SuperOperator<f64>;
pub type QuantumMap = quantum::QuantumMap<f64>;
pub type GeneratorSnapshot = quantum::GeneratorSnapshot<f64>;
pub type WaitingTimeDist = semimarkov::WaitingTimeDist<f64>;
pub type DephasingSemiMarkov = semimarkov::DephasingSemiMarkov<f64>;
pub type NonUnitalSemiMarkov = semimarkov::NonUnitalSemiMarkov<f64>;
pub type SssConfig = measures::SssConfig<f64>;
pub type MeasureResult = measures::MeasureResult<f64>;
pub type HolevoEnsemble = measures::HolevoEnsemble<f64>;

pub type Matrix32 = numerics::ComplexMatrix<f32>;
pub type DensityMatrix32 = quantum::DensityMatrix<f32>;
