use num_complex::Complex;
use num_traits::One;

use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, trace_norm, von_neumann_entropy, ComplexMatrix};
use crate::scalar::Real;

/// A `d × d` Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace and positivity (all to `1e-10`).
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let tol = T::tol(1e-10);
        let defect = matrix.hermiticity_defect();
        if defect > tol {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:e})")));
        }
        let trace = matrix.trace();
        if (trace.re - T::one()).abs() > tol || trace.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {} differs from 1", trace.re)));
        }
        let matrix = matrix.hermitian_part();
        let min = hermitian_eig(&matrix)?.min_eigenvalue();
        if min < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
        }
        Ok(Self { matrix })
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn pure(ket: &[Complex<T>]) -> Result<Self> {
        let norm_sqr: T = ket.iter().map(|z| z.norm_sqr()).sum();
        if ket.is_empty() || !(norm_sqr > T::zero()) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        Self::new(ComplexMatrix::outer(ket, ket).scale_real(norm_sqr.recip()))
    }

    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidParameter(format!("basis index {k} >= dimension {dim}")));
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(k, k)] = Complex::one();
        Ok(Self { matrix: m })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = T::from_count(dim).recip();
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(w),
        }
    }

    /// `|+⟩⟨+|` for a qubit.
    pub fn plus() -> Self {
        let h = T::lit(0.5);
        let m = ComplexMatrix::from_fn(2, 2, |_, _| Complex::new(h, T::zero()));
        Self { matrix: m }
    }

    /// `|−⟩⟨−|` for a qubit.
    pub fn minus() -> Self {
        let h = T::lit(0.5);
        let m = ComplexMatrix::from_fn(2, 2, |i, j| Complex::new(if i == j { h } else { -h }, T::zero()));
        Self { matrix: m }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn entropy(&self) -> Result<T> {
        von_neumann_entropy(&self.matrix)
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(trace_norm(&(&self.matrix - &other.matrix))? * T::lit(0.5))
    }

    /// Convex combination `Σ w_k ρ_k`.
    pub fn mixture(weights: &[T], states: &[Self]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        if weights.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                actual: weights.len(),
            });
        }
        let mut acc = ComplexMatrix::zeros(first.dim(), first.dim());
        for (&w, s) in weights.iter().zip(states) {
            if s.dim() != first.dim() {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    actual: s.dim(),
                });
            }
            acc.axpy(Complex::new(w, T::zero()), &s.matrix);
        }
        Self::new(acc)
    }
}
