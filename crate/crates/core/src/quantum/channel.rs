//! Channel representations: Kraus sets, Choi matrices and superoperators.
//!
//! Conventions:
//! - Choi matrix `χ = (Φ ⊗ 1)|Ψ⟩⟨Ψ|` with unnormalized `|Ψ⟩ = Σ_j |j, j⟩`; the
//!   first tensor factor carries the map output, so `χ[(a·d + k), (b·d + l)] =
//!   Φ(|k⟩⟨l|)[a][b]` and trace preservation reads `Tr_out χ = 1`.
//! - Superoperators act on column-major vectorized operators,
//!   `vec(ρ)[i + j·d] = ρ[i][j]`.

use num_complex::Complex;
use num_traits::Zero;

use super::state::DensityMatrix;
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, trace_norm, ComplexMatrix};
use crate::scalar::Real;

const CPTP_TOL: f64 = 1e-8;
const MAX_CONDITION: f64 = 1e12;

fn check_dim<T: Real>(expected: usize, m: &ComplexMatrix<T>) -> Result<()> {
    if m.rows() != expected || m.cols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: if m.rows() != expected { m.rows() } else { m.cols() },
        });
    }
    Ok(())
}

/// Operator-sum representation `Φ(ρ) = Σ_j C_j ρ C_j†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet<T: Real> {
    dim: usize,
    operators: Vec<ComplexMatrix<T>>,
}

impl<T: Real> KrausSet<T> {
    /// Checks `Σ C_j† C_j = 1` within `1e-10`.
    pub fn new(operators: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let dim = operators
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus set".into()))?
            .rows();
        for op in &operators {
            check_dim(dim, op)?;
        }
        let mut completeness = ComplexMatrix::zeros(dim, dim);
        for op in &operators {
            completeness = &completeness + &(&op.adjoint() * op);
        }
        let defect = completeness.max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > T::tol(1e-10) {
            return Err(Error::InvalidParameter(format!(
                "Kraus operators are not trace preserving (defect {defect:e})"
            )));
        }
        Ok(Self { dim, operators })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            operators: vec![ComplexMatrix::identity(dim)],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[ComplexMatrix<T>] {
        &self.operators
    }

    pub fn apply_matrix(&self, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        check_dim(self.dim, rho)?;
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for op in &self.operators {
            out = &out + &(&(op * rho) * &op.adjoint());
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        DensityMatrix::new(self.apply_matrix(rho.matrix())?)
    }

    pub fn choi(&self) -> ChoiMatrix<T> {
        let d = self.dim;
        let mut m = ComplexMatrix::zeros(d * d, d * d);
        for op in &self.operators {
            // (C ⊗ 1)|Ψ⟩ has components C[a][k] at index a·d + k.
            let v: Vec<Complex<T>> = (0..d * d).map(|idx| op[(idx / d, idx % d)]).collect();
            m = &m + &ComplexMatrix::outer(&v, &v);
        }
        ChoiMatrix { dim: d, matrix: m }
    }

    pub fn superoperator(&self) -> SuperOperator<T> {
        let d = self.dim;
        let mut m = ComplexMatrix::zeros(d * d, d * d);
        for op in &self.operators {
            // vec(C ρ C†) = (conj(C) ⊗ C) vec(ρ) for column-major vec.
            m = &m + &op.map(|z| z.conj()).kron(op);
        }
        SuperOperator { dim: d, matrix: m }
    }
}

/// `Φ(ρ) = Σ_j C_j ρ C_j†` returned as a validated state.
pub fn apply_kraus<T: Real>(kraus: &KrausSet<T>, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
    if kraus.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: kraus.dim(),
            actual: rho.dim(),
        });
    }
    kraus.apply(rho)
}

/// Choi matrix of a Kraus map.
pub fn choi_of_map<T: Real>(kraus: &KrausSet<T>) -> ChoiMatrix<T> {
    kraus.choi()
}

/// Choi matrix `(Φ ⊗ 1)|Ψ⟩⟨Ψ|` of a Hermiticity-preserving map.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix<T: Real> {
    dim: usize,
    matrix: ComplexMatrix<T>,
}

/// Outcome of a CPTP check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpReport<T: Real> {
    pub is_cptp: bool,
    pub min_eigenvalue: T,
    /// `max |Tr_out χ − 1|` entrywise.
    pub trace_defect: T,
}

impl<T: Real> ChoiMatrix<T> {
    pub fn new(dim: usize, matrix: ComplexMatrix<T>) -> Result<Self> {
        check_dim(dim * dim, &matrix)?;
        if !matrix.is_hermitian(T::tol(1e-10)) {
            return Err(Error::NonHermitianInput {
                defect: matrix.hermiticity_defect().as_f64(),
            });
        }
        Ok(Self {
            dim,
            matrix: matrix.hermitian_part(),
        })
    }

    pub(crate) fn from_raw(dim: usize, matrix: ComplexMatrix<T>) -> Self {
        Self { dim, matrix }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    /// `Tr_out χ`, a `d × d` matrix equal to the identity for trace-preserving maps.
    pub fn partial_trace_output(&self) -> ComplexMatrix<T> {
        let d = self.dim;
        ComplexMatrix::from_fn(d, d, |k, l| {
            (0..d).fold(Complex::zero(), |acc, a| acc + self.matrix[(a * d + k, a * d + l)])
        })
    }

    /// `Φ(ρ)[a][b] = Σ_{kl} χ[(a,k),(b,l)] ρ[k][l]`.
    pub fn apply_matrix(&self, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let d = self.dim;
        check_dim(d, rho)?;
        Ok(ComplexMatrix::from_fn(d, d, |a, b| {
            let mut acc = Complex::zero();
            for k in 0..d {
                for l in 0..d {
                    acc = acc + self.matrix[(a * d + k, b * d + l)] * rho[(k, l)];
                }
            }
            acc
        }))
    }

    pub fn superoperator(&self) -> SuperOperator<T> {
        let d = self.dim;
        let matrix = ComplexMatrix::from_fn(d * d, d * d, |row, col| {
            let (a, b) = (row % d, row / d);
            let (k, l) = (col % d, col / d);
            self.matrix[(a * d + k, b * d + l)]
        });
        SuperOperator { dim: d, matrix }
    }

    /// Complete positivity (`χ ⪰ -tol`) and trace preservation, `tol = 1e-8`.
    pub fn cptp_report(&self) -> Result<CptpReport<T>> {
        let tol = T::tol(CPTP_TOL);
        let min_eigenvalue = hermitian_eig(&self.matrix)?.min_eigenvalue();
        let trace_defect = self
            .partial_trace_output()
            .max_abs_diff(&ComplexMatrix::identity(self.dim));
        Ok(CptpReport {
            is_cptp: min_eigenvalue >= -tol && trace_defect <= tol,
            min_eigenvalue,
            trace_defect,
        })
    }

    /// Kraus operators from the spectral decomposition `χ = Σ λ_m |v_m⟩⟨v_m|`,
    /// `C_m[a][k] = √λ_m v_m[a·d + k]`. Each operator's largest-magnitude
    /// entry is rotated to be real and positive; eigenvalues below
    /// `1e-14 · λ_max` are dropped.
    pub fn to_kraus(&self) -> Result<KrausSet<T>> {
        let d = self.dim;
        let spec = hermitian_eig(&self.matrix)?;
        let top = spec.eigenvalues.first().copied().unwrap_or(T::zero());
        if spec.min_eigenvalue() < -T::tol(CPTP_TOL) {
            return Err(Error::InvalidParameter(format!(
                "map is not completely positive (min Choi eigenvalue {})",
                spec.min_eigenvalue()
            )));
        }
        let mut ops = Vec::new();
        for (m, &lambda) in spec.eigenvalues.iter().enumerate() {
            if lambda <= top * T::tol(1e-14) {
                continue;
            }
            let v = spec.eigenvector(m);
            let pivot = v.iter().copied().fold(Complex::zero(), |best: Complex<T>, z| {
                if z.norm() > best.norm() + T::epsilon() {
                    z
                } else {
                    best
                }
            });
            let phase = if pivot.norm() > T::zero() {
                pivot.conj() / pivot.norm()
            } else {
                Complex::new(T::one(), T::zero())
            };
            let w = lambda.sqrt();
            ops.push(ComplexMatrix::from_fn(d, d, |a, k| v[a * d + k] * phase * w));
        }
        KrausSet::new(ops)
    }

    pub fn trace_norm(&self) -> Result<T> {
        trace_norm(&self.matrix)
    }
}

/// CPTP check of a Choi matrix with tolerance `1e-8`.
pub fn is_cptp<T: Real>(choi: &ChoiMatrix<T>) -> Result<CptpReport<T>> {
    choi.cptp_report()
}

/// Linear map on column-major vectorized `d × d` operators.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator<T: Real> {
    dim: usize,
    matrix: ComplexMatrix<T>,
}

impl<T: Real> SuperOperator<T> {
    pub fn new(dim: usize, matrix: ComplexMatrix<T>) -> Result<Self> {
        check_dim(dim * dim, &matrix)?;
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: ComplexMatrix::identity(dim * dim),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn apply_matrix(&self, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let d = self.dim;
        check_dim(d, rho)?;
        let v: Vec<Complex<T>> = (0..d * d).map(|idx| rho[(idx % d, idx / d)]).collect();
        let w = self.matrix.mat_vec(&v);
        Ok(ComplexMatrix::from_fn(d, d, |i, j| w[i + j * d]))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        Ok(Self {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn choi(&self) -> ChoiMatrix<T> {
        let d = self.dim;
        let matrix = ComplexMatrix::from_fn(d * d, d * d, |row, col| {
            let (a, k) = (row / d, row % d);
            let (b, l) = (col / d, col % d);
            self.matrix[(a + b * d, k + l * d)]
        });
        ChoiMatrix { dim: d, matrix }
    }
}

/// Propagator `V(t₂, t₁) = Φ(t₂) Φ(t₁)⁻¹`.
///
/// Fails with [`Error::SingularMap`] when `Φ(t₁)` has 1-norm condition number
/// above `1e12`.
pub fn intermediate_map<T: Real>(phi_t2: &SuperOperator<T>, phi_t1: &SuperOperator<T>) -> Result<SuperOperator<T>> {
    if phi_t2.dim != phi_t1.dim {
        return Err(Error::DimensionMismatch {
            expected: phi_t1.dim,
            actual: phi_t2.dim,
        });
    }
    let (inverse, condition) = phi_t1.matrix.inverse_with_condition()?;
    if condition > T::lit(MAX_CONDITION) {
        return Err(Error::SingularMap {
            condition: condition.as_f64(),
        });
    }
    Ok(SuperOperator {
        dim: phi_t1.dim,
        matrix: &phi_t2.matrix * &inverse,
    })
}

/// A channel snapshot with both Kraus and superoperator forms.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumMap<T: Real> {
    kraus: KrausSet<T>,
    superop: SuperOperator<T>,
}

impl<T: Real> QuantumMap<T> {
    pub fn from_kraus(kraus: KrausSet<T>) -> Self {
        let superop = kraus.superoperator();
        Self { kraus, superop }
    }

    pub fn from_choi(choi: &ChoiMatrix<T>) -> Result<Self> {
        Ok(Self {
            kraus: choi.to_kraus()?,
            superop: choi.superoperator(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_kraus(KrausSet::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.kraus.dim()
    }

    pub fn kraus(&self) -> &KrausSet<T> {
        &self.kraus
    }

    pub fn superoperator(&self) -> &SuperOperator<T> {
        &self.superop
    }

    pub fn choi(&self) -> ChoiMatrix<T> {
        self.kraus.choi()
    }

    pub fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        self.kraus.apply(rho)
    }
}
