//! States, channels and generators.

mod channel;
mod generator;
mod state;

pub use channel::{
    apply_kraus, choi_of_map, intermediate_map, is_cptp, ChoiMatrix, CptpReport, KrausSet, QuantumMap, SuperOperator,
};
pub use generator::{
    choi_of_generator, family_constant, weyl_z, DephasingNormalization, GeneratorSnapshot, JumpStructure,
};
pub use state::DensityMatrix;
