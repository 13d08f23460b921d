//! Entropies in bits.

use super::eigen::hermitian_eig;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `-x log2 x` with `0 log 0 = 0`.
fn entropy_term<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        -x * x.log2()
    }
}

/// `H2(x) = -x log2 x - (1-x) log2(1-x)`.
pub fn binary_entropy<T: Real>(x: T) -> Result<T> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::DomainError(format!("binary entropy argument {x} not in [0, 1]")));
    }
    Ok(entropy_term(x) + entropy_term(T::one() - x))
}

/// Von Neumann entropy `-Tr ρ log2 ρ` of a density matrix.
///
/// Rejects inputs whose trace deviates from one by more than `1e-8` or whose
/// smallest eigenvalue is below `-1e-10`; small negative eigenvalues above
/// that floor are treated as zero.
pub fn von_neumann_entropy<T: Real>(rho: &ComplexMatrix<T>) -> Result<T> {
    let trace = rho.trace();
    if (trace.re - T::one()).abs() > T::tol(1e-8) || trace.im.abs() > T::tol(1e-8) {
        return Err(Error::InvalidState(format!("trace {} differs from 1", trace.re)));
    }
    let spec = hermitian_eig(rho).map_err(|e| match e {
        Error::NonHermitianInput { defect } => {
            Error::InvalidState(format!("density matrix not Hermitian (defect {defect:e})"))
        }
        other => other,
    })?;
    let min = spec.min_eigenvalue();
    if min < -T::tol(1e-10) {
        return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
    }
    Ok(spec.eigenvalues.into_iter().map(entropy_term).sum())
}
