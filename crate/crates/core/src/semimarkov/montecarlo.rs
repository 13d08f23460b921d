use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::wtd::WaitingTimeDist;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Empirical statistics of a two-site renewal jump process started on site 0.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSimulation<T: Real> {
    pub times: Vec<T>,
    pub n_paths: usize,
    /// Fraction of paths without a renewal by `t`.
    pub survival: Vec<T>,
    pub survival_stderr: Vec<T>,
    /// Fraction of paths on site 0 at `t`; site 1 holds the rest.
    pub occupation0: Vec<T>,
    pub occupation_stderr: Vec<T>,
}

impl<T: Real> JumpSimulation<T> {
    pub fn occupation1(&self) -> Vec<T> {
        self.occupation0.iter().map(|&x| T::one() - x).collect()
    }
}

fn stderr<T: Real>(fraction: T, n: usize) -> T {
    (fraction * (T::one() - fraction) / T::from_count(n)).sqrt()
}

/// Monte Carlo over renewal paths: waiting times are drawn from `wtd` and at
/// each renewal the site flips with probability `pi`.
///
/// Path `k` uses ChaCha8 seeded with `seed` on stream `k`, and the per-time
/// tallies are integers, so the result is bit-identical for a fixed seed
/// regardless of thread scheduling.
pub fn classical_jump_simulate<T: Real>(
    wtd: &WaitingTimeDist<T>,
    pi: T,
    times: &[T],
    n_paths: usize,
    seed: u64,
) -> Result<JumpSimulation<T>> {
    if n_paths == 0 {
        return Err(Error::InvalidParameter("n_paths must be at least 1".into()));
    }
    if !(pi >= T::zero() && pi <= T::one()) {
        return Err(Error::InvalidParameter(format!("jump probability {pi} outside [0, 1]")));
    }
    if times.iter().any(|&t| !(t >= T::zero())) || times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::GridError(
            "sample times must be non-negative and non-decreasing".into(),
        ));
    }
    let n_times = times.len();
    let t_max = times.last().copied().unwrap_or(T::zero());

    let (survived, on_site0) = (0..n_paths)
        .into_par_iter()
        .fold(
            || (vec![0u64; n_times], vec![0u64; n_times]),
            |(mut survived, mut on_site0), path| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(path as u64);
                let mut clock = T::zero();
                let mut site = 0u8;
                let mut first = true;
                let mut next = 0usize;
                while next < n_times {
                    let wait = wtd.sample(&mut rng);
                    let renewal = clock + wait;
                    while next < n_times && times[next] < renewal {
                        if first {
                            survived[next] += 1;
                        }
                        if site == 0 {
                            on_site0[next] += 1;
                        }
                        next += 1;
                    }
                    if renewal > t_max {
                        break;
                    }
                    let u = T::lit(rand::Rng::random::<f64>(&mut rng));
                    if u < pi {
                        site ^= 1;
                    }
                    clock = renewal;
                    first = false;
                }
                (survived, on_site0)
            },
        )
        .reduce(
            || (vec![0u64; n_times], vec![0u64; n_times]),
            |(mut a, mut b), (c, d)| {
                a.iter_mut().zip(c).for_each(|(x, y)| *x += y);
                b.iter_mut().zip(d).for_each(|(x, y)| *x += y);
                (a, b)
            },
        );

    let n = T::from_count(n_paths);
    let frac = |counts: &[u64]| -> Vec<T> { counts.iter().map(|&c| T::lit(c as f64) / n).collect() };
    let survival = frac(&survived);
    let occupation0 = frac(&on_site0);
    Ok(JumpSimulation {
        times: times.to_vec(),
        n_paths,
        survival_stderr: survival.iter().map(|&f| stderr(f, n_paths)).collect(),
        occupation_stderr: occupation0.iter().map(|&f| stderr(f, n_paths)).collect(),
        survival,
        occupation0,
    })
}
