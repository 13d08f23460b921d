//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! The matrices in this crate are tiny (at most `d² × d²` with `d ≤ 6`), so
//! Jacobi is both accurate to working precision and fast enough.

use num_complex::Complex;
use num_traits::Zero;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Spectrum<T: Real> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: ComplexMatrix<T>,
}

impl<T: Real> Spectrum<T> {
    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).fold(Complex::zero(), |acc, k| {
                acc + v[(i, k)] * v[(j, k)].conj() * self.eigenvalues[k]
            })
        })
    }

    pub fn min_eigenvalue(&self) -> T {
        *self.eigenvalues.last().expect("empty spectrum")
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex<T>> {
        self.eigenvectors.column(k)
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input must be Hermitian within `1e-12 · max|M_ij|`; the Hermitian part
/// is then diagonalized so that rounding noise in the input cannot leak into
/// complex eigenvalues.
pub fn hermitian_eig<T: Real>(m: &ComplexMatrix<T>) -> Result<Spectrum<T>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            actual: m.cols(),
        });
    }
    if !m.is_hermitian(T::tol(1e-12)) {
        return Err(Error::NonHermitianInput {
            defect: m.hermiticity_defect().as_f64(),
        });
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let total = a.frobenius_norm();

    let mut converged = total.is_zero() || n == 1;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { iterations: MAX_SWEEPS });
        }
        sweeps += 1;
        let negligible = T::epsilon() * total * T::lit(1e-3);
        for p in 0..n {
            for q in (p + 1)..n {
                if a[(p, q)].norm() > negligible {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
        converged = off_diagonal_norm(&a) <= T::epsilon() * total * T::from_count(n);
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    let n = a.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation annihilating `a[p][q]`. The unitary acting on the
/// `(p, q)` plane is a phase that makes `a[p][q]` real, followed by a real
/// Givens rotation.
fn rotate<T: Real>(a: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let magnitude = apq.norm();
    if magnitude <= T::min_positive_value() {
        return;
    }
    let phase = apq / magnitude;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (T::lit(2.0) * magnitude);
    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;

    // U restricted to the (p, q) plane.
    let conj_phase = phase.conj();
    let upp = Complex::new(c, T::zero());
    let upq = Complex::new(s, T::zero());
    let uqp = conj_phase * (-s);
    let uqq = conj_phase * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * upp + akq * uqp;
        a[(k, q)] = akp * upq + akq * uqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
        a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
    }
    a[(p, q)] = Complex::zero();
    a[(q, p)] = Complex::zero();
    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * upp + vkq * uqp;
        v[(k, q)] = vkp * upq + vkq * uqq;
    }
}

/// Sum of singular values. Hermitian input uses `Σ|λ|` directly; otherwise
/// the singular values are the square roots of the spectrum of `M†M`.
pub fn trace_norm<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            actual: m.cols(),
        });
    }
    if m.is_hermitian(T::tol(1e-12)) {
        let spec = hermitian_eig(m)?;
        return Ok(spec.eigenvalues.iter().map(|x| x.abs()).sum());
    }
    let gram = &m.adjoint() * m;
    let spec = hermitian_eig(&gram)?;
    Ok(spec.eigenvalues.iter().map(|&x| x.max(T::zero()).sqrt()).sum())
}
