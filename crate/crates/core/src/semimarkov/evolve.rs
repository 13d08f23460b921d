use num_complex::Complex;

use super::process::SemiMarkovFamily;
use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::quantum::DensityMatrix;
use crate::scalar::Real;

/// States of a time-local integration at the requested grid times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeLocalTrajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<ComplexMatrix<T>>,
}

/// Fixed-step RK4 for `ρ̇ = γ(t)(𝒥[ρ] − ρ)` with step `min(1e-3, span/1000)`,
/// shrunk so every grid interval holds a whole number of steps.
///
/// The grid must be non-decreasing. Fails with [`Error::SingularityOnGrid`]
/// when a pole of the rate lies inside the span; split the grid there.
pub fn evolve_timelocal<T: Real, P: SemiMarkovFamily<T> + ?Sized>(
    process: &P,
    rho0: &DensityMatrix<T>,
    times: &[T],
) -> Result<TimeLocalTrajectory<T>> {
    let (&from, &to) = match (times.first(), times.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::GridError("empty time grid".into())),
    };
    if !(from >= T::zero()) || times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::GridError(
            "time grid must be non-negative and non-decreasing".into(),
        ));
    }
    if rho0.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: rho0.dim(),
        });
    }
    if let Some(&t) = process.singular_points(to).iter().find(|&&t| t >= from && t <= to) {
        return Err(Error::SingularityOnGrid {
            t: t.as_f64(),
            from: from.as_f64(),
            to: to.as_f64(),
        });
    }

    let span = to - from;
    let max_step = T::lit(1e-3).min(span / T::lit(1000.0));
    let mut rho = rho0.matrix().clone();
    let mut states = Vec::with_capacity(times.len());
    states.push(rho.clone());
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let c = |x: T| Complex::new(x, T::zero());

    for w in times.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b > a {
            let n = ((b - a) / max_step)
                .ceil()
                .to_usize()
                .ok_or_else(|| Error::GridError("too many integration steps".into()))?
                .max(1);
            let h = (b - a) / T::from_count(n);
            for k in 0..n {
                let t = a + T::from_count(k) * h;
                let k1 = process.timelocal_rhs(t, &rho)?;
                let mut y = rho.clone();
                y.axpy(c(half * h), &k1);
                let k2 = process.timelocal_rhs(t + half * h, &y)?;
                let mut y = rho.clone();
                y.axpy(c(half * h), &k2);
                let k3 = process.timelocal_rhs(t + half * h, &y)?;
                let mut y = rho.clone();
                y.axpy(c(h), &k3);
                let k4 = process.timelocal_rhs(t + h, &y)?;
                rho.axpy(c(h * sixth), &k1);
                rho.axpy(c(h * sixth * T::lit(2.0)), &k2);
                rho.axpy(c(h * sixth * T::lit(2.0)), &k3);
                rho.axpy(c(h * sixth), &k4);
            }
        }
        states.push(rho.clone());
    }
    Ok(TimeLocalTrajectory {
        times: times.to_vec(),
        states,
    })
}
