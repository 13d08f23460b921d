use crate::error::{Error, Result};
use crate::numerics::{solve_volterra, ComplexMatrix};
use crate::quantum::{
    ChoiMatrix, DephasingNormalization, GeneratorSnapshot, JumpStructure, KrausSet, QuantumMap, SuperOperator,
};
use crate::scalar::Real;

use super::wtd::{sech, MemoryKernel, WaitingTimeDist};

/// `η = √(1 − 8p/s²)` tagged by branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eta<T: Real> {
    Real(T),
    /// `η = i·m` with `m > 0`.
    Imaginary(T),
    /// `|1 − 8p/s²| < 1e-9`; the analytic limit is used.
    Zero,
}

pub fn eta<T: Real>(s: T, p: T) -> Eta<T> {
    let x = T::one() - T::lit(8.0) * p / (s * s);
    if x.abs() < T::tol(1e-9) {
        Eta::Zero
    } else if x > T::zero() {
        Eta::Real(x.sqrt())
    } else {
        Eta::Imaginary((-x).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    SemigroupLimit,
    CPDivisible,
    CPIndivisible,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::SemigroupLimit => "semigroup",
            Regime::CPDivisible => "cp-divisible",
            Regime::CPIndivisible => "cp-indivisible",
        }
    }
}

/// Exact comparison of `p` against `s²/8`.
pub fn regime_classify<T: Real>(s: T, p: T) -> Regime {
    if p.is_zero() {
        Regime::SemigroupLimit
    } else if p <= s * s / T::lit(8.0) {
        Regime::CPDivisible
    } else {
        Regime::CPIndivisible
    }
}

/// A one-parameter family of qubit maps driven by a single time-local rate.
pub trait SemiMarkovFamily<T: Real>: Sync {
    /// Instantaneous rate `γ(t)`.
    fn rate(&self, t: T) -> Result<T>;

    /// Zeros of the map's contraction factor in `(0, t_max]`, where `γ` diverges.
    fn singular_points(&self, t_max: T) -> Vec<T>;

    fn map_at(&self, t: T) -> Result<QuantumMap<T>>;

    fn superoperator_at(&self, t: T) -> Result<SuperOperator<T>> {
        Ok(self.map_at(t)?.superoperator().clone())
    }

    /// Jump structure used to compare generators in Choi form.
    fn generator_jump(&self) -> JumpStructure;

    /// Dimension used to build Choi-form generators.
    fn generator_dim(&self) -> usize {
        2
    }

    fn generator_at(&self, t: T) -> Result<GeneratorSnapshot<T>> {
        GeneratorSnapshot::new(self.generator_dim(), self.rate(t)?, self.generator_jump())
    }

    /// Right-hand side of the qubit time-local master equation.
    fn timelocal_rhs(&self, t: T, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>>;
}

/// Qubit dephasing driven by a flip process with a two-stage exponential
/// waiting time: `Φ_t(ρ) = ½(1+q)ρ + ½(1−q) ZρZ` with `s = λ1 + λ2`, `p = λ1λ2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DephasingSemiMarkov<T: Real> {
    s: T,
    p: T,
    eta: Eta<T>,
    generator_dim: usize,
    normalization: DephasingNormalization,
}

impl<T: Real> DephasingSemiMarkov<T> {
    /// Choi-form generators default to the `1/d`-normalized qubit form.
    pub fn new(s: T, p: T) -> Result<Self> {
        if !(s > T::zero()) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
        }
        if !(p >= T::zero()) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("p must be non-negative, got {p}")));
        }
        Ok(Self {
            s,
            p,
            eta: eta(s, p),
            generator_dim: 2,
            normalization: DephasingNormalization::PerDimension,
        })
    }

    pub fn from_rates(rate1: T, rate2: T) -> Result<Self> {
        WaitingTimeDist::exp_convolution(rate1, rate2)?;
        Self::new(rate1 + rate2, rate1 * rate2)
    }

    /// Both stages with rate `λ`: `s = 2λ`, `p = λ²`.
    pub fn same_rates(rate: T) -> Result<Self> {
        Self::from_rates(rate, rate)
    }

    /// Generator used by the Choi-form measure: clock dephasing in dimension `dim`.
    pub fn with_choi_generator(mut self, dim: usize, normalization: DephasingNormalization) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "generator dimension must be >= 2, got {dim}"
            )));
        }
        self.generator_dim = dim;
        self.normalization = normalization;
        Ok(self)
    }

    pub fn s(&self) -> T {
        self.s
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn eta(&self) -> Eta<T> {
        self.eta
    }

    pub fn regime(&self) -> Regime {
        regime_classify(self.s, self.p)
    }

    /// Memory kernel `p e^{−st}`.
    pub fn kernel(&self) -> MemoryKernel<T> {
        MemoryKernel::Exponential { p: self.p, s: self.s }
    }

    /// Returns `(C, S)` with `e^{−x}(C + S) = q`, `e^{−x} S = −q'·s/(4p)`,
    /// `x = st/2`, scaled by `e^{−x}` (or left unscaled when `damped` is false).
    fn parts(&self, t: T, damped: bool) -> (T, T) {
        let x = self.s * t * T::lit(0.5);
        let envelope = if damped { (-x).exp() } else { T::one() };
        match self.eta {
            Eta::Real(eta) => {
                let y = eta * x;
                if damped && y > T::lit(20.0) {
                    // e^{−x}cosh(ηx) and e^{−x}sinh(ηx) without overflow.
                    let slow = ((eta - T::one()) * x).exp() * T::lit(0.5);
                    let fast = (-(eta + T::one()) * x).exp() * T::lit(0.5);
                    (slow + fast, (slow - fast) / eta)
                } else {
                    (envelope * y.cosh(), envelope * y.sinh() / eta)
                }
            }
            Eta::Imaginary(m) => {
                let y = m * x;
                (envelope * y.cos(), envelope * y.sin() / m)
            }
            Eta::Zero => (envelope, envelope * x),
        }
    }

    /// Coherence factor `q(t)`, with `q(0) = 1`.
    pub fn q(&self, t: T) -> T {
        let (c, s) = self.parts(t, true);
        c + s
    }

    pub fn q_derivative(&self, t: T) -> T {
        let (_, s) = self.parts(t, true);
        -T::lit(4.0) * self.p / self.s * s
    }

    /// `γ(t) = −q'(t) / (2 q(t))`.
    ///
    /// Fails with [`Error::Singularity`] when the oscillating factor of `q`
    /// (without its `e^{−st/2}` envelope) is below `1e-12` in magnitude.
    pub fn rate(&self, t: T) -> Result<T> {
        let two = T::lit(2.0);
        let x = self.s * t * T::lit(0.5);
        let scale = two * self.p / self.s;
        match self.eta {
            Eta::Real(eta) => {
                let th = (eta * x).tanh();
                Ok(scale * th / (eta + th))
            }
            Eta::Zero => Ok(scale * x / (T::one() + x)),
            Eta::Imaginary(m) => {
                let (c, s) = self.parts(t, false);
                if (c + s).abs() < T::tol(1e-12) {
                    return Err(Error::Singularity {
                        t: t.as_f64(),
                        q: self.q(t).as_f64(),
                    });
                }
                let y = m * x;
                Ok(scale * y.sin() / (m * y.cos() + y.sin()))
            }
        }
    }

    /// Zeros of `q` in `(0, t_max]`; none unless `p > s²/8`.
    pub fn zeros_of_q(&self, t_max: T) -> Vec<T> {
        let Eta::Imaginary(m) = self.eta else {
            return Vec::new();
        };
        // tan(m x) = −m  ⇒  m x = π − atan(m) + kπ.
        let pi = T::PI();
        let first = pi - m.atan();
        let mut out = Vec::new();
        let mut k = 0usize;
        loop {
            let t = T::lit(2.0) * (first + T::from_count(k) * pi) / (m * self.s);
            if t > t_max {
                break;
            }
            out.push(t);
            k += 1;
        }
        out
    }

    /// Kraus form `{√((1+q)/2) 1, √((1−q)/2) Z}`.
    pub fn kraus_at(&self, t: T) -> Result<KrausSet<T>> {
        let q = self.q(t).max(-T::one()).min(T::one());
        let half = T::lit(0.5);
        let id = ComplexMatrix::identity(2);
        let z = ComplexMatrix::from_real_diag(&[T::one(), -T::one()]);
        KrausSet::new(vec![
            id.scale_real((half * (T::one() + q)).sqrt()),
            z.scale_real((half * (T::one() - q)).sqrt()),
        ])
    }

    /// `q(t)` from the memory-kernel equation `Φ̇ = ∫₀ᵗ k(t−τ) (Z·Z − 1) Φ(τ) dτ`,
    /// read off the coherence element of the propagated superoperator.
    pub fn volterra_coherence(&self, t_max: T, dt: T) -> Result<(Vec<T>, Vec<T>)> {
        let jump = GeneratorSnapshot::new(2, T::one(), JumpStructure::DephasingZ(DephasingNormalization::Unit))?
            .superoperator()?;
        let (p, s) = (self.p, self.s);
        let traj = solve_volterra(|t: T| p * (-s * t).exp(), jump.matrix(), t_max, dt)?;
        let q = traj.maps.iter().map(|m| m[(1, 1)].re).collect();
        Ok((traj.times, q))
    }
}

impl<T: Real> SemiMarkovFamily<T> for DephasingSemiMarkov<T> {
    fn rate(&self, t: T) -> Result<T> {
        DephasingSemiMarkov::rate(self, t)
    }

    fn singular_points(&self, t_max: T) -> Vec<T> {
        self.zeros_of_q(t_max)
    }

    fn map_at(&self, t: T) -> Result<QuantumMap<T>> {
        Ok(QuantumMap::from_kraus(self.kraus_at(t)?))
    }

    fn superoperator_at(&self, t: T) -> Result<SuperOperator<T>> {
        let q = self.q(t);
        let diag = [T::one(), q, q, T::one()];
        SuperOperator::new(2, ComplexMatrix::from_real_diag(&diag))
    }

    fn generator_jump(&self) -> JumpStructure {
        JumpStructure::DephasingZ(self.normalization)
    }

    fn generator_dim(&self) -> usize {
        self.generator_dim
    }

    fn timelocal_rhs(&self, t: T, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        GeneratorSnapshot::new(
            2,
            self.rate(t)?,
            JumpStructure::DephasingZ(DephasingNormalization::Unit),
        )?
        .apply(rho)
    }
}

/// Non-unital family `Φ_t = g(t)·id + (1 − g(t))·𝒫` with `𝒫[ρ] = |0⟩⟨0| Tr ρ`
/// and survival `g(t) = sech(λt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonUnitalSemiMarkov<T: Real> {
    lambda: T,
}

impl<T: Real> NonUnitalSemiMarkov<T> {
    /// `λ = 0` gives the identity map at all times.
    pub fn new(lambda: T) -> Result<Self> {
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be non-negative, got {lambda}"
            )));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn waiting_time(&self) -> Result<WaitingTimeDist<T>> {
        WaitingTimeDist::tanh_sech(self.lambda)
    }

    pub fn survival(&self, t: T) -> T {
        sech(self.lambda * t)
    }

    /// `λ tanh(λt)`.
    pub fn rate(&self, t: T) -> T {
        self.lambda * (self.lambda * t).tanh()
    }

    pub fn choi_at(&self, t: T) -> Result<ChoiMatrix<T>> {
        let g = self.survival(t);
        let identity = KrausSet::identity(2).choi();
        let projector = ComplexMatrix::from_real_diag(&[T::one(), T::zero()]).kron(&ComplexMatrix::identity(2));
        let mut m = identity.matrix().scale_real(g);
        m = &m + &projector.scale_real(T::one() - g);
        ChoiMatrix::new(2, m)
    }
}

impl<T: Real> SemiMarkovFamily<T> for NonUnitalSemiMarkov<T> {
    fn rate(&self, t: T) -> Result<T> {
        Ok(NonUnitalSemiMarkov::rate(self, t))
    }

    fn singular_points(&self, _t_max: T) -> Vec<T> {
        Vec::new()
    }

    fn map_at(&self, t: T) -> Result<QuantumMap<T>> {
        QuantumMap::from_choi(&self.choi_at(t)?)
    }

    fn superoperator_at(&self, t: T) -> Result<SuperOperator<T>> {
        Ok(self.choi_at(t)?.superoperator())
    }

    fn generator_jump(&self) -> JumpStructure {
        JumpStructure::Projector
    }

    fn timelocal_rhs(&self, t: T, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        GeneratorSnapshot::new(2, self.rate(t), JumpStructure::Projector)?.apply(rho)
    }
}
