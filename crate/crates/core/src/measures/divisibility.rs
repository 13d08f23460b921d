use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, trace_norm};
use crate::quantum::{intermediate_map, DensityMatrix, SuperOperator};
use crate::scalar::Real;
use crate::semimarkov::{DephasingSemiMarkov, SemiMarkovFamily};

/// Increments of the trace distance below this are treated as round-off.
const BLP_NOISE: f64 = 1e-12;
/// Choi eigenvalues below `-VIOLATION_TOL` mark a non-CP propagator.
const VIOLATION_TOL: f64 = 1e-8;

fn check_grid<T: Real>(times: &[T]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::GridError("need at least two grid points".into()));
    }
    if !(times[0] >= T::zero()) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::GridError(
            "grid must be non-negative and strictly increasing".into(),
        ));
    }
    Ok(())
}

pub fn uniform_grid<T: Real>(t_max: T, steps: usize) -> Vec<T> {
    (0..=steps)
        .map(|k| t_max * T::from_count(k) / T::from_count(steps))
        .collect()
}

/// Trace-distance backflow for one state pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BlpResult<T: Real> {
    pub value: T,
    /// `½‖Φ(t)[ρ1 − ρ2]‖₁` on the grid.
    pub distances: Vec<T>,
    /// Maximal runs of grid steps on which the distance grows.
    pub revival_intervals: Vec<(T, T)>,
}

/// `Σ` of the increases of `D(t) = ½‖Φ(t)[ρ1 − ρ2]‖₁` over the grid.
pub fn blp_measure<T: Real, P>(
    process: &P,
    times: &[T],
    pair: (&DensityMatrix<T>, &DensityMatrix<T>),
) -> Result<BlpResult<T>>
where
    P: SemiMarkovFamily<T> + ?Sized,
{
    check_grid(times)?;
    let diff = pair.0.matrix() - pair.1.matrix();
    let distances = times
        .par_iter()
        .map(|&t| {
            let evolved = process.superoperator_at(t)?.apply_matrix(&diff)?;
            Ok(trace_norm(&evolved)? * T::lit(0.5))
        })
        .collect::<Result<Vec<T>>>()?;
    let noise = T::tol(BLP_NOISE);
    let mut value = T::zero();
    let mut revival_intervals: Vec<(T, T)> = Vec::new();
    let mut open: Option<T> = None;
    for k in 1..times.len() {
        let rise = distances[k] - distances[k - 1];
        if rise > noise {
            value = value + rise;
            open.get_or_insert(times[k - 1]);
        } else if let Some(start) = open.take() {
            revival_intervals.push((start, times[k - 1]));
        }
    }
    if let Some(start) = open {
        revival_intervals.push((start, times[times.len() - 1]));
    }
    Ok(BlpResult {
        value,
        distances,
        revival_intervals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepStatus<T: Real> {
    Divisible {
        min_eigenvalue: T,
    },
    Violation {
        min_eigenvalue: T,
    },
    /// `Φ(t1)` is too ill-conditioned to invert.
    SingularMap {
        condition: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport<T: Real> {
    pub t1: T,
    pub t2: T,
    pub status: StepStatus<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivisibilityReport<T: Real> {
    pub steps: Vec<StepReport<T>>,
}

impl<T: Real> DivisibilityReport<T> {
    pub fn violations(&self) -> Vec<(T, T)> {
        self.steps
            .iter()
            .filter(|s| matches!(s.status, StepStatus::Violation { .. }))
            .map(|s| (s.t1, s.t2))
            .collect()
    }

    pub fn singular_steps(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s.status, StepStatus::SingularMap { .. }))
            .count()
    }

    pub fn is_divisible(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn min_eigenvalue(&self) -> Option<T> {
        self.steps
            .iter()
            .filter_map(|s| match s.status {
                StepStatus::Divisible { min_eigenvalue } | StepStatus::Violation { min_eigenvalue } => {
                    Some(min_eigenvalue)
                }
                StepStatus::SingularMap { .. } => None,
            })
            .reduce(|a, b| a.min(b))
    }
}

fn step_status<T: Real>(phi2: &SuperOperator<T>, phi1: &SuperOperator<T>) -> Result<StepStatus<T>> {
    let propagator = match intermediate_map(phi2, phi1) {
        Ok(v) => v,
        Err(Error::SingularMap { condition }) => return Ok(StepStatus::SingularMap { condition }),
        Err(e) => return Err(e),
    };
    let choi = propagator.choi();
    let min_eigenvalue = hermitian_eig(&choi.matrix().hermitian_part())?.min_eigenvalue();
    Ok(if min_eigenvalue < -T::tol(VIOLATION_TOL) {
        StepStatus::Violation { min_eigenvalue }
    } else {
        StepStatus::Divisible { min_eigenvalue }
    })
}

/// Checks complete positivity of `Φ(t2)Φ(t1)⁻¹` for consecutive grid points.
/// Singular maps are flagged per step rather than aborting the scan.
pub fn cp_divisibility_scan<T: Real, P>(process: &P, times: &[T]) -> Result<DivisibilityReport<T>>
where
    P: SemiMarkovFamily<T> + ?Sized,
{
    check_grid(times)?;
    let maps = times
        .par_iter()
        .map(|&t| process.superoperator_at(t))
        .collect::<Result<Vec<_>>>()?;
    let steps = (1..times.len())
        .into_par_iter()
        .map(|k| {
            Ok(StepReport {
                t1: times[k - 1],
                t2: times[k],
                status: step_status(&maps[k], &maps[k - 1])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DivisibilityReport { steps })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEstimate<T: Real> {
    pub estimate: T,
    /// Largest `p` found divisible and smallest found indivisible.
    pub bracket: (T, T),
    pub iterations: usize,
}

/// Bisection over `p` at fixed `s` for the onset of CP-indivisibility, each
/// probe being an intermediate-map scan on `times`.
///
/// Near the boundary the first zero of `q` moves to late times where the map
/// is nearly singular, so the resolution depends on the scan horizon.
pub fn divisibility_boundary<T: Real>(s: T, p_bracket: (T, T), times: &[T], tol: T) -> Result<BoundaryEstimate<T>> {
    let (mut lo, mut hi) = p_bracket;
    if !(lo >= T::zero() && hi > lo) || !(tol > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "invalid bisection bracket [{lo}, {hi}]"
        )));
    }
    let divisible =
        |p: T| -> Result<bool> { Ok(cp_divisibility_scan(&DephasingSemiMarkov::new(s, p)?, times)?.is_divisible()) };
    if !divisible(lo)? {
        return Err(Error::NoSignChange {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    if divisible(hi)? {
        return Err(Error::NoSignChange {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = T::lit(0.5) * (lo + hi);
        if divisible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(BoundaryEstimate {
        estimate: T::lit(0.5) * (lo + hi),
        bracket: (lo, hi),
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm() -> (DensityMatrix<f64>, DensityMatrix<f64>) {
        (DensityMatrix::plus(), DensityMatrix::minus())
    }

    #[test]
    fn blp_zero_in_divisible_regime() {
        let proc = DephasingSemiMarkov::new(1.0, 0.1).unwrap();
        let (a, b) = pm();
        let r = blp_measure(&proc, &uniform_grid(10.0, 2000), (&a, &b)).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.revival_intervals.is_empty());
    }

    #[test]
    fn blp_positive_with_revivals_after_zeros() {
        let proc = DephasingSemiMarkov::new(1.0, 3.0).unwrap();
        let (a, b) = pm();
        let grid = uniform_grid(10.0, 2000);
        let r = blp_measure(&proc, &grid, (&a, &b)).unwrap();
        assert!(r.value > 0.01);
        let first_zero = proc.zeros_of_q(10.0)[0];
        assert!((r.revival_intervals[0].0 - first_zero).abs() <= 0.005 + 1e-12);
        for (d, t) in r.distances.iter().zip(&grid) {
            assert!((d - proc.q(*t).abs()).abs() < 1e-14);
        }
    }

    #[test]
    fn identical_pair_has_no_backflow() {
        let proc = DephasingSemiMarkov::new(1.0, 3.0).unwrap();
        let a = DensityMatrix::plus();
        assert_eq!(
            blp_measure(&proc, &uniform_grid(5.0, 100), (&a, &a)).unwrap().value,
            0.0
        );
    }

    #[test]
    fn scans() {
        let grid = uniform_grid(10.0, 1000);
        assert!(
            cp_divisibility_scan(&DephasingSemiMarkov::new(1.0, 0.0).unwrap(), &grid)
                .unwrap()
                .is_divisible()
        );
        assert!(
            cp_divisibility_scan(&DephasingSemiMarkov::new(1.0, 0.1).unwrap(), &grid)
                .unwrap()
                .is_divisible()
        );
        let proc = DephasingSemiMarkov::new(1.0, 3.0).unwrap();
        let report = cp_divisibility_scan(&proc, &grid).unwrap();
        let (t1, t2) = report.violations()[0];
        let first_zero = proc.zeros_of_q(10.0)[0];
        assert!(t1 <= first_zero + 1e-12 && first_zero <= t2 + 0.01);
        assert!(report.min_eigenvalue().unwrap() < 0.0);
    }

    #[test]
    fn singular_steps_are_flagged() {
        // Grid point exactly at the zero of q makes Φ(t1) singular.
        let proc = DephasingSemiMarkov::new(1.0, 3.0).unwrap();
        let t0 = proc.zeros_of_q(1.0)[0];
        let report = cp_divisibility_scan(&proc, &[0.5, t0, 1.0]).unwrap();
        assert!(matches!(report.steps[1].status, StepStatus::SingularMap { .. }));
        assert_eq!(report.singular_steps(), 1);
    }

    #[test]
    fn bad_grids() {
        let proc = DephasingSemiMarkov::new(1.0, 0.1).unwrap();
        assert!(cp_divisibility_scan(&proc, &[0.0]).is_err());
        assert!(cp_divisibility_scan(&proc, &[0.0, 0.0]).is_err());
    }
}
