use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{binary_entropy, von_neumann_entropy};
use crate::quantum::DensityMatrix;
use crate::scalar::Real;
use crate::semimarkov::SemiMarkovFamily;

/// States with prior probabilities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct HolevoEnsemble<T: Real> {
    states: Vec<DensityMatrix<T>>,
    probabilities: Vec<T>,
}

impl<T: Real> HolevoEnsemble<T> {
    pub fn new(states: Vec<DensityMatrix<T>>, probabilities: Vec<T>) -> Result<Self> {
        if states.is_empty() || states.len() != probabilities.len() {
            return Err(Error::InvalidParameter(format!(
                "{} states with {} probabilities",
                states.len(),
                probabilities.len()
            )));
        }
        if probabilities.iter().any(|&p| !(p >= T::zero())) {
            return Err(Error::InvalidParameter("probabilities must be non-negative".into()));
        }
        let total: T = probabilities.iter().copied().sum();
        if (total - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}")));
        }
        let dim = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: s.dim(),
            });
        }
        Ok(Self { states, probabilities })
    }

    /// `{|+⟩, |−⟩}` with equal weights.
    pub fn plus_minus() -> Self {
        Self {
            states: vec![DensityMatrix::plus(), DensityMatrix::minus()],
            probabilities: vec![T::lit(0.5), T::lit(0.5)],
        }
    }

    pub fn states(&self) -> &[DensityMatrix<T>] {
        &self.states
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    /// `S(Σ p_k ρ_k) − Σ p_k S(ρ_k)` in bits.
    pub fn chi(&self) -> Result<T> {
        let average = DensityMatrix::mixture(&self.probabilities, &self.states)?;
        let mut chi = average.entropy()?;
        for (p, s) in self.probabilities.iter().zip(&self.states) {
            chi = chi - *p * s.entropy()?;
        }
        Ok(chi)
    }
}

/// `χ(t)` of the ensemble pushed through `Φ(t)`, in bits.
pub fn holevo_curve<T: Real, P>(process: &P, ensemble: &HolevoEnsemble<T>, times: &[T]) -> Result<Vec<(T, T)>>
where
    P: SemiMarkovFamily<T> + ?Sized,
{
    times
        .par_iter()
        .map(|&t| {
            let sup = process.superoperator_at(t)?;
            let mut average = None;
            let mut weighted = T::zero();
            for (p, s) in ensemble.probabilities.iter().zip(&ensemble.states) {
                let out = sup.apply_matrix(s.matrix())?;
                weighted = weighted + *p * von_neumann_entropy(&out)?;
                let scaled = out.scale_real(*p);
                average = Some(match average {
                    None => scaled,
                    Some(acc) => &acc + &scaled,
                });
            }
            let average = average.expect("ensemble is non-empty");
            Ok((t, von_neumann_entropy(&average)? - weighted))
        })
        .collect()
}

/// `1 − H₂((1 + |q|)/2)`: the `|±⟩` ensemble under dephasing with coherence factor `q`.
pub fn holevo_dephasing_closed_form<T: Real>(q: T) -> Result<T> {
    Ok(T::one() - binary_entropy((T::one() + q.abs()) * T::lit(0.5))?)
}
