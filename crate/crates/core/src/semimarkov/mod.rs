//! Renewal waiting times, memory kernels and the two semi-Markov process
//! families (qubit dephasing and the non-unital projector family).

mod evolve;
mod montecarlo;
mod process;
mod wtd;

pub use evolve::{evolve_timelocal, TimeLocalTrajectory};
pub use montecarlo::{classical_jump_simulate, JumpSimulation};
pub use process::{eta, regime_classify, DephasingSemiMarkov, Eta, NonUnitalSemiMarkov, Regime, SemiMarkovFamily};
pub use wtd::{MemoryKernel, WaitingTimeDist};
