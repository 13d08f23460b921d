//! Time-local generators `ρ ↦ γ (𝒥[ρ] − ρ)` with a fixed jump structure.

use num_complex::Complex;
use num_traits::One;

use super::channel::{ChoiMatrix, SuperOperator};
use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::scalar::Real;

/// Clock matrix `Z_d = diag(1, ω, …, ω^{d−1})`, `ω = e^{2πi/d}`.
pub fn weyl_z<T: Real>(d: usize) -> Result<ComplexMatrix<T>> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("clock matrix needs d >= 2, got {d}")));
    }
    let diag: Vec<Complex<T>> = (0..d)
        .map(|k| {
            // Exact values at quarter turns so that Z_2 = diag(1, −1) exactly.
            if (4 * k) % d == 0 {
                match (4 * k / d) % 4 {
                    0 => Complex::new(T::one(), T::zero()),
                    1 => Complex::new(T::zero(), T::one()),
                    2 => Complex::new(-T::one(), T::zero()),
                    _ => Complex::new(T::zero(), -T::one()),
                }
            } else {
                let angle = T::TAU() * T::from_count(k) / T::from_count(d);
                Complex::new(angle.cos(), angle.sin())
            }
        })
        .collect();
    Ok(ComplexMatrix::from_diag(&diag))
}

/// How the dephasing rate enters the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DephasingNormalization {
    /// `(γ/d)(Z ρ Z† − ρ)`.
    PerDimension,
    /// `γ (Z ρ Z† − ρ)`, the qubit master-equation form.
    Unit,
}

/// Jump structure of a single-channel generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpStructure {
    /// Clock-matrix dephasing, `𝒥[ρ] = Z_d ρ Z_d†`.
    DephasingZ(DephasingNormalization),
    /// CPTP projector `𝒫[ρ] = |0⟩⟨0| Tr ρ`.
    Projector,
}

/// `ℒ = γ (𝒥 − 1)` at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSnapshot<T: Real> {
    dim: usize,
    rate: T,
    jump: JumpStructure,
}

impl<T: Real> GeneratorSnapshot<T> {
    pub fn new(dim: usize, rate: T, jump: JumpStructure) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("generator needs d >= 2, got {dim}")));
        }
        if !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite rate {rate}")));
        }
        Ok(Self { dim, rate, jump })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rate(&self) -> T {
        self.rate
    }

    pub fn jump(&self) -> JumpStructure {
        self.jump
    }

    /// Coefficient in front of `(𝒥 − 1)`.
    fn weight(&self) -> T {
        match self.jump {
            JumpStructure::DephasingZ(DephasingNormalization::PerDimension) => self.rate / T::from_count(self.dim),
            _ => self.rate,
        }
    }

    fn jump_action(&self, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        match self.jump {
            JumpStructure::DephasingZ(_) => {
                let z = weyl_z::<T>(self.dim)?;
                Ok(&(&z * rho) * &z.adjoint())
            }
            JumpStructure::Projector => {
                let mut out = ComplexMatrix::zeros(self.dim, self.dim);
                out[(0, 0)] = rho.trace();
                Ok(out)
            }
        }
    }

    pub fn apply(&self, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        if rho.rows() != self.dim || rho.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: rho.rows(),
            });
        }
        let jumped = self.jump_action(rho)?;
        Ok((&jumped - rho).scale_real(self.weight()))
    }

    /// Column-major superoperator of the generator.
    pub fn superoperator(&self) -> Result<SuperOperator<T>> {
        let d = self.dim;
        let mut m = ComplexMatrix::zeros(d * d, d * d);
        for col in 0..d * d {
            let mut basis = ComplexMatrix::zeros(d, d);
            basis[(col % d, col / d)] = Complex::one();
            let image = self.apply(&basis)?;
            for row in 0..d * d {
                m[(row, col)] = image[(row % d, row / d)];
            }
        }
        SuperOperator::new(d, m)
    }

    /// `(ℒ ⊗ 1)|Ψ⟩⟨Ψ|`.
    pub fn choi(&self) -> Result<ChoiMatrix<T>> {
        let d = self.dim;
        let mut m = ComplexMatrix::zeros(d * d, d * d);
        for k in 0..d {
            for l in 0..d {
                let mut basis = ComplexMatrix::zeros(d, d);
                basis[(k, l)] = Complex::one();
                let image = self.apply(&basis)?;
                for a in 0..d {
                    for b in 0..d {
                        m[(a * d + k, b * d + l)] = image[(a, b)];
                    }
                }
            }
        }
        Ok(ChoiMatrix::from_raw(d, m))
    }
}

/// Choi matrix of a generator snapshot.
pub fn choi_of_generator<T: Real>(g: &GeneratorSnapshot<T>) -> Result<ChoiMatrix<T>> {
    g.choi()
}

/// Family constant `‖χ_{ℒ(γ=1)}‖₁`; for these single-jump structures the
/// Choi difference of two rates is this constant times `|Δγ|`.
pub fn family_constant<T: Real>(dim: usize, jump: JumpStructure) -> Result<T> {
    GeneratorSnapshot::new(dim, T::one(), jump)?.choi()?.trace_norm()
}
