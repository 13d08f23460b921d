use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Waiting-time distribution of a renewal process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaitingTimeDist<T: Real> {
    /// `λ e^{−λt}`.
    Exponential { rate: T },
    /// Convolution of two exponentials with rates `λ1`, `λ2`.
    ExpConvolution { rate1: T, rate2: T },
    /// `λ tanh(λt) sech(λt)`, survival `sech(λt)`.
    TanhSech { rate: T },
}

/// Memory kernel `k(t)` of the time-nonlocal master equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MemoryKernel<T: Real> {
    /// `k(t) = λ δ(t)`: memoryless, the dynamics is a semigroup.
    Delta { rate: T },
    /// `k(t) = p e^{−st}`.
    Exponential { p: T, s: T },
}

impl<T: Real> MemoryKernel<T> {
    /// Pointwise value; `None` for the delta kernel.
    pub fn value(&self, t: T) -> Option<T> {
        match *self {
            MemoryKernel::Delta { .. } => None,
            MemoryKernel::Exponential { p, s } => Some(p * (-s * t).exp()),
        }
    }
}

fn check_rate<T: Real>(name: &str, rate: T) -> Result<()> {
    if !(rate > T::zero()) || !rate.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {rate}"
        )));
    }
    Ok(())
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t >= T::zero()) {
        return Err(Error::DomainError(format!("time must be non-negative, got {t}")));
    }
    Ok(())
}

/// `(1 − e^{−δt})/δ`, continuous through `δ = 0`.
fn relaxation<T: Real>(delta: T, t: T) -> T {
    if delta.is_zero() {
        t
    } else {
        -(-delta * t).exp_m1() / delta
    }
}

/// `sech(x)` without overflow.
pub(crate) fn sech<T: Real>(x: T) -> T {
    let e = (-x.abs()).exp();
    T::lit(2.0) * e / (T::one() + e * e)
}

impl<T: Real> WaitingTimeDist<T> {
    pub fn exponential(rate: T) -> Result<Self> {
        check_rate("rate", rate)?;
        Ok(Self::Exponential { rate })
    }

    pub fn exp_convolution(rate1: T, rate2: T) -> Result<Self> {
        check_rate("rate1", rate1)?;
        check_rate("rate2", rate2)?;
        Ok(Self::ExpConvolution { rate1, rate2 })
    }

    pub fn tanh_sech(rate: T) -> Result<Self> {
        check_rate("rate", rate)?;
        Ok(Self::TanhSech { rate })
    }

    /// Rates ordered so that the first is the smaller one.
    fn ordered(a: T, b: T) -> (T, T) {
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn density(&self, t: T) -> Result<T> {
        check_time(t)?;
        Ok(match *self {
            Self::Exponential { rate } => rate * (-rate * t).exp(),
            Self::ExpConvolution { rate1, rate2 } => {
                let (lo, hi) = Self::ordered(rate1, rate2);
                lo * hi * (-lo * t).exp() * relaxation(hi - lo, t)
            }
            Self::TanhSech { rate } => {
                let x = rate * t;
                rate * x.tanh() * sech(x)
            }
        })
    }

    /// `g(t) = 1 − ∫₀ᵗ f`.
    pub fn survival(&self, t: T) -> Result<T> {
        check_time(t)?;
        Ok(match *self {
            Self::Exponential { rate } => (-rate * t).exp(),
            Self::ExpConvolution { rate1, rate2 } => {
                let (lo, hi) = Self::ordered(rate1, rate2);
                (-lo * t).exp() * (T::one() + lo * relaxation(hi - lo, t))
            }
            Self::TanhSech { rate } => sech(rate * t),
        })
    }

    /// Laplace transform `f̃(u)` for `u ≥ 0`.
    pub fn laplace(&self, u: T) -> Result<T> {
        check_time(u)?;
        match *self {
            Self::Exponential { rate } => Ok(rate / (u + rate)),
            Self::ExpConvolution { rate1, rate2 } => Ok(rate1 * rate2 / ((u + rate1) * (u + rate2))),
            Self::TanhSech { .. } => Err(Error::UnsupportedVariant("Laplace transform of tanh-sech")),
        }
    }

    /// Kernel with `k̃(u) = u f̃(u) / (1 − f̃(u))`.
    pub fn kernel_closed_form(&self) -> Result<MemoryKernel<T>> {
        match *self {
            Self::Exponential { rate } => Ok(MemoryKernel::Delta { rate }),
            Self::ExpConvolution { rate1, rate2 } => Ok(MemoryKernel::Exponential {
                p: rate1 * rate2,
                s: rate1 + rate2,
            }),
            Self::TanhSech { .. } => Err(Error::UnsupportedVariant("memory kernel of tanh-sech")),
        }
    }

    /// Inverse-CDF draw from two independent uniforms in `[0, 1)`. Only the
    /// convolution uses `u2`: its two exponential stages are sampled separately.
    pub fn sample_from_uniform(&self, u1: T, u2: T) -> T {
        let exp_draw = |u: T, rate: T| -(-u).ln_1p() / rate;
        match *self {
            Self::Exponential { rate } => exp_draw(u1, rate),
            Self::ExpConvolution { rate1, rate2 } => exp_draw(u1, rate1) + exp_draw(u2, rate2),
            Self::TanhSech { rate } => {
                // g(t) = sech(λt) = 1 − u  ⇒  t = asech(1 − u)/λ.
                let x = T::one() - u1;
                ((T::one() + (T::one() - x * x).sqrt()) / x).ln() / rate
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let u1 = T::lit(rng.random::<f64>());
        let u2 = match self {
            Self::ExpConvolution { .. } => T::lit(rng.random::<f64>()),
            _ => T::zero(),
        };
        self.sample_from_uniform(u1, u2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{adaptive_quad, QuadOptions};
    use approx::assert_relative_eq;

    #[test]
    fn density_values() {
        assert_eq!(WaitingTimeDist::exponential(1.0).unwrap().density(0.0).unwrap(), 1.0);
        assert_eq!(WaitingTimeDist::tanh_sech(1.0).unwrap().density(0.0).unwrap(), 0.0);
        let lam: f64 = 1.7;
        let erlang = WaitingTimeDist::exp_convolution(lam, lam).unwrap();
        for t in [0.0, 0.3, 1.0, 4.0] {
            assert_relative_eq!(
                erlang.density(t).unwrap(),
                lam * lam * t * (-lam * t).exp(),
                max_relative = 1e-14
            );
        }
        assert!(WaitingTimeDist::exponential(1.0).unwrap().density(-0.1).is_err());
    }

    #[test]
    fn convolution_density_matches_numerical_convolution() {
        let (a, b) = (0.8, 2.5);
        let w = WaitingTimeDist::exp_convolution(a, b).unwrap();
        let opts = QuadOptions::default();
        for t in [0.2, 1.0, 3.0] {
            let conv = adaptive_quad(|x: f64| a * (-a * x).exp() * b * (-b * (t - x)).exp(), 0.0, t, &opts)
                .unwrap()
                .value;
            assert_relative_eq!(w.density(t).unwrap(), conv, max_relative = 1e-10);
        }
    }

    #[test]
    fn survival_values() {
        assert_relative_eq!(
            WaitingTimeDist::tanh_sech(1.0).unwrap().survival(1.0).unwrap(),
            0.648054273663885,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            WaitingTimeDist::exponential(2.0).unwrap().survival(1.0).unwrap(),
            0.1353352832366127,
            max_relative = 1e-14
        );
        let lam: f64 = 0.9;
        let erlang = WaitingTimeDist::exp_convolution(lam, lam).unwrap();
        assert_relative_eq!(
            erlang.survival(2.0).unwrap(),
            (1.0 + 2.0 * lam) * (-2.0 * lam).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn survival_is_one_minus_integrated_density() {
        let opts = QuadOptions::default();
        for w in [
            WaitingTimeDist::exponential(1.3).unwrap(),
            WaitingTimeDist::exp_convolution(0.5, 3.0).unwrap(),
            WaitingTimeDist::exp_convolution(3.0, 0.5).unwrap(),
            WaitingTimeDist::tanh_sech(2.0).unwrap(),
        ] {
            assert_eq!(w.survival(0.0).unwrap(), 1.0);
            for t in [0.4, 1.5, 6.0] {
                let mass = adaptive_quad(|x| w.density(x).unwrap(), 0.0, t, &opts).unwrap().value;
                assert_relative_eq!(w.survival(t).unwrap(), 1.0 - mass, epsilon = 1e-10);
            }
            let total = adaptive_quad(|x| w.density(x).unwrap(), 0.0, 80.0, &opts)
                .unwrap()
                .value;
            assert!(total <= 1.0 + 1e-8);
        }
    }

    #[test]
    fn kernels() {
        assert_eq!(
            WaitingTimeDist::exponential(0.7).unwrap().kernel_closed_form().unwrap(),
            MemoryKernel::Delta { rate: 0.7 }
        );
        let k = WaitingTimeDist::exp_convolution(1.0, 1.0)
            .unwrap()
            .kernel_closed_form()
            .unwrap();
        assert_eq!(k, MemoryKernel::Exponential { p: 1.0, s: 2.0 });
        assert_eq!(k.value(0.0), Some(1.0));
        assert!(matches!(
            WaitingTimeDist::tanh_sech(1.0).unwrap().kernel_closed_form(),
            Err(Error::UnsupportedVariant(_))
        ));
    }

    #[test]
    fn kernel_satisfies_laplace_relation() {
        let w = WaitingTimeDist::exp_convolution(0.6, 1.9).unwrap();
        let MemoryKernel::Exponential { p, s } = w.kernel_closed_form().unwrap() else {
            panic!("expected exponential kernel");
        };
        for u in [0.1, 1.0, 5.0] {
            let f = w.laplace(u).unwrap();
            assert_relative_eq!(u * f / (1.0 - f), p / (u + s), max_relative = 1e-13);
        }
    }

    #[test]
    fn inverse_cdf_hits_survival() {
        let exp = WaitingTimeDist::exponential(2.0).unwrap();
        let t = exp.sample_from_uniform(0.3, 0.0);
        assert_relative_eq!(exp.survival(t).unwrap(), 0.7, max_relative = 1e-14);
        let ts = WaitingTimeDist::tanh_sech(1.5).unwrap();
        let t = ts.sample_from_uniform(0.6, 0.0);
        assert_relative_eq!(ts.survival(t).unwrap(), 0.4, max_relative = 1e-13);
        assert_eq!(ts.sample_from_uniform(0.0, 0.0), 0.0);
    }
}
