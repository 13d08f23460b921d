//! Fixed-step solver for the memory-kernel equation
//!
//! ```text
//! dΦ/dt = ∫₀ᵗ k(t − τ) L Φ(τ) dτ,   Φ(0) = 1,
//! ```
//!
//! where `L` is a constant superoperator (the jump structure) and `k` a
//! scalar memory kernel. The memory integral is a trapezoidal sum over the
//! uniform grid and time stepping is Heun's predictor-corrector, so the
//! global error is `O(dt²)`.

use num_complex::Complex;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Maps sampled on the uniform grid `t_n = n·dt`.
#[derive(Debug, Clone)]
pub struct VolterraTrajectory<T: Real> {
    pub dt: T,
    pub times: Vec<T>,
    pub maps: Vec<ComplexMatrix<T>>,
}

pub fn solve_volterra<T: Real, K>(kernel: K, jump: &ComplexMatrix<T>, t_max: T, dt: T) -> Result<VolterraTrajectory<T>>
where
    K: Fn(T) -> T,
{
    if !(dt > T::zero()) || !(t_max >= dt) {
        return Err(Error::GridError(format!(
            "need dt > 0 and t_max >= dt (dt = {dt}, t_max = {t_max})"
        )));
    }
    if !jump.is_square() {
        return Err(Error::DimensionMismatch {
            expected: jump.rows(),
            actual: jump.cols(),
        });
    }
    let steps = (t_max / dt + T::lit(1e-9))
        .floor()
        .to_usize()
        .ok_or_else(|| Error::GridError("too many steps".into()))?;
    let n = jump.rows();
    let half = T::lit(0.5);

    let k: Vec<T> = (0..=steps)
        .map(|m| {
            let v = kernel(T::from_count(m) * dt);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NumericalError {
                    at: (T::from_count(m) * dt).as_f64(),
                })
            }
        })
        .collect::<Result<_>>()?;

    let mut maps: Vec<ComplexMatrix<T>> = Vec::with_capacity(steps + 1);
    maps.push(ComplexMatrix::identity(n));
    // Right-hand side at the current step; zero at t = 0.
    let mut rhs = ComplexMatrix::zeros(n, n);
    let scale = |x: T| Complex::new(x, T::zero());

    for step in 0..steps {
        let current = &maps[step];
        let mut predicted = current.clone();
        predicted.axpy(scale(dt), &rhs);

        // Memory integral at t_{step+1} with the predicted endpoint.
        let next = step + 1;
        let mut history = ComplexMatrix::zeros(n, n);
        history.axpy(scale(half * k[next]), &maps[0]);
        for (j, phi) in maps.iter().enumerate().skip(1) {
            let w = k[next - j];
            if !w.is_zero() {
                history.axpy(scale(w), phi);
            }
        }
        let endpoint_weight = half * k[0];
        let mut with_endpoint = history.clone();
        with_endpoint.axpy(scale(endpoint_weight), &predicted);
        let predicted_rhs = (jump * &with_endpoint).scale_real(dt);

        let mut corrected = current.clone();
        corrected.axpy(scale(half * dt), &rhs);
        corrected.axpy(scale(half * dt), &predicted_rhs);

        history.axpy(scale(endpoint_weight), &corrected);
        rhs = (jump * &history).scale_real(dt);
        maps.push(corrected);
    }

    let times = (0..=steps).map(|m| T::from_count(m) * dt).collect();
    Ok(VolterraTrajectory { dt, times, maps })
}
