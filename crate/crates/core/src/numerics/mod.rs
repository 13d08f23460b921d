//! Numerical kernel: small dense complex matrices, Hermitian spectra,
//! entropies, adaptive quadrature, a memory-kernel solver, golden-section
//! minimization and Brent root finding.

mod eigen;
mod entropy;
mod matrix;
mod optimize;
mod quadrature;
mod volterra;

pub use eigen::{hermitian_eig, trace_norm, Spectrum};
pub use entropy::{binary_entropy, von_neumann_entropy};
pub use matrix::ComplexMatrix;
pub use optimize::{find_root, minimize_scalar};
pub use quadrature::{
    adaptive_quad, adaptive_quad_excised, adaptive_quad_try, excision_pieces, ExcisedQuadrature, Intervals,
    QuadOptions, QuadratureResult,
};
pub use volterra::{solve_volterra, VolterraTrajectory};
