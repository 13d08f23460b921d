//! Deviation-from-semigroup measure `ξ = min_γ (1/T) ∫₀ᵀ ‖χ_{ℒ(t)} − χ_{ℒ_γ}‖₁ dt`
//! and its rate form `(1/T) ∫₀ᵀ |γ(t) − γ_ref| dt`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::numerics::{adaptive_quad_try, excision_pieces, find_root, minimize_scalar, trace_norm, QuadOptions};
use crate::quantum::{family_constant, GeneratorSnapshot};
use crate::scalar::Real;
use crate::semimarkov::SemiMarkovFamily;

const SAMPLE_POINTS: usize = 4000;
const SCAN_POINTS: usize = 64;

/// How the constant reference rate is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceMode<T: Real> {
    /// Fixed reference rate; `0` compares against the identity semigroup.
    PaperReference { gamma_ref: T },
    /// Minimize over constant rates in `[0, γ_max]`.
    TrueMinimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureForm {
    /// `|γ(t) − γ_ref|`.
    Rate,
    /// `‖χ_{ℒ(γ(t))} − χ_{ℒ(γ_ref)}‖₁`, evaluated on the Choi matrices.
    Choi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SssConfig<T: Real> {
    pub horizon: T,
    pub mode: ReferenceMode<T>,
    pub form: MeasureForm,
    /// Upper end of the reference-rate search; `None` means `10 · max γ(t)`.
    pub gamma_max: Option<T>,
    /// Radius excised around each pole of the rate.
    pub epsilon: T,
    pub quad: QuadOptions<T>,
}

impl<T: Real> Default for SssConfig<T> {
    fn default() -> Self {
        Self {
            horizon: T::one(),
            mode: ReferenceMode::PaperReference { gamma_ref: T::zero() },
            form: MeasureForm::Rate,
            gamma_max: None,
            epsilon: T::lit(1e-6),
            quad: QuadOptions {
                abs_tol: T::tol(1e-12),
                // Near a pole the rate is only known to ~1e-10 relative, since
                // the distance to the pole carries the rounding of t itself.
                rel_tol: T::tol(1e-10),
                max_depth: 40,
                max_intervals: 50_000,
            },
        }
    }
}

impl<T: Real> SssConfig<T> {
    pub fn with_horizon(mut self, horizon: T) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_mode(mut self, mode: ReferenceMode<T>) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_form(mut self, form: MeasureForm) -> Self {
        self.form = form;
        self
    }

    pub fn with_epsilon(mut self, epsilon: T) -> Self {
        self.epsilon = epsilon;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon > T::zero()) || !self.horizon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.epsilon > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "excision radius must be positive, got {}",
                self.epsilon
            )));
        }
        if let Some(g) = self.gamma_max {
            if !(g >= T::zero()) {
                return Err(Error::InvalidParameter(format!(
                    "gamma_max must be non-negative, got {g}"
                )));
            }
        }
        if let ReferenceMode::PaperReference { gamma_ref } = self.mode {
            if !gamma_ref.is_finite() {
                return Err(Error::InvalidParameter("reference rate must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Raw and family-normalized Choi-form values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiDetails<T: Real> {
    pub raw: T,
    /// `‖χ_{ℒ(γ=1)}‖₁`, computed from one Choi evaluation.
    pub family_constant: T,
    pub normalized: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureResult<T: Real> {
    pub xi: T,
    /// `ξ / (1 + ξ)`.
    pub zeta: T,
    pub gamma_ref: T,
    pub excised: Vec<(T, T)>,
    pub excised_measure: T,
    pub error_estimate: T,
    pub config: SssConfig<T>,
    /// Present for the Choi form; `xi` then holds the raw value.
    pub choi: Option<ChoiDetails<T>>,
}

pub fn zeta_of<T: Real>(xi: T) -> T {
    xi / (T::one() + xi)
}

struct Prepared<T: Real> {
    pieces: Vec<(T, T)>,
    excised: Vec<(T, T)>,
    samples: Vec<T>,
}

fn prepare<T: Real, G>(gamma: &G, singular: &[T], config: &SssConfig<T>) -> Result<Prepared<T>>
where
    G: Fn(T) -> Result<T>,
{
    let (pieces, excised) = excision_pieces(T::zero(), config.horizon, singular, &[], config.epsilon);
    let mut samples = Vec::with_capacity(SAMPLE_POINTS + 1);
    for k in 0..=SAMPLE_POINTS {
        let t = config.horizon * T::from_count(k) / T::from_count(SAMPLE_POINTS);
        if excised.iter().any(|&(lo, hi)| t >= lo && t <= hi) {
            continue;
        }
        match gamma(t) {
            Ok(v) if v.is_finite() => samples.push(v),
            Ok(_) | Err(Error::Singularity { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    if samples.is_empty() {
        return Err(Error::NumericalError { at: 0.0 });
    }
    Ok(Prepared {
        pieces,
        excised,
        samples,
    })
}

/// Points in `(lo, hi)` where `γ(t) = c`, from a uniform scan plus Brent.
fn crossings<T: Real, G>(gamma: &G, c: T, lo: T, hi: T) -> Result<Vec<T>>
where
    G: Fn(T) -> Result<T>,
{
    let mut out = Vec::new();
    let step = (hi - lo) / T::from_count(SCAN_POINTS);
    let mut prev_t = lo;
    let mut prev = gamma(lo)? - c;
    for k in 1..=SCAN_POINTS {
        let t = if k == SCAN_POINTS {
            hi
        } else {
            lo + step * T::from_count(k)
        };
        let cur = gamma(t)? - c;
        if prev * cur < T::zero() {
            let root = find_root(
                |x| gamma(x).map(|g| g - c).unwrap_or(T::nan()),
                prev_t,
                t,
                T::epsilon() * (T::one() + t.abs()),
            )?;
            out.push(root);
        }
        prev_t = t;
        prev = cur;
    }
    Ok(out)
}

/// `∫ integrand(t, γ(t)) dt` over the non-excised pieces, split where `γ = c`.
fn split_integral<T: Real, G, F>(
    prepared: &Prepared<T>,
    gamma: &G,
    c: T,
    mut integrand: F,
    opts: &QuadOptions<T>,
) -> Result<(T, T)>
where
    G: Fn(T) -> Result<T>,
    F: FnMut(T, T) -> Result<T>,
{
    let share = T::from_count(prepared.pieces.len().max(1));
    let piece_opts = QuadOptions {
        abs_tol: opts.abs_tol / share,
        ..*opts
    };
    let mut value = T::zero();
    let mut error = T::zero();
    for &(lo, hi) in &prepared.pieces {
        let mut cuts = vec![lo];
        cuts.extend(crossings(gamma, c, lo, hi)?);
        cuts.push(hi);
        for w in cuts.windows(2) {
            let r = adaptive_quad_try(|t| integrand(t, gamma(t)?), w[0], w[1], &piece_opts)?;
            value = value + r.value;
            error = error + r.error_estimate;
        }
    }
    Ok((value, error))
}

fn median<T: Real>(values: &[T]) -> T {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        T::lit(0.5) * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Minimizer of the convex `F(c) = ∫|γ − c|` over `[0, γ_max]`: bracket
/// around the sample median, golden-section inside the bracket, then keep
/// the better of the median and the golden-section point.
fn true_minimum<T: Real, G>(prepared: &Prepared<T>, gamma: &G, config: &SssConfig<T>) -> Result<T>
where
    G: Fn(T) -> Result<T>,
{
    let top = prepared.samples.iter().copied().fold(T::zero(), |m, v| m.max(v.abs()));
    let gamma_max = config.gamma_max.unwrap_or(T::lit(10.0) * top);
    if gamma_max.is_zero() {
        return Ok(T::zero());
    }
    let mut objective =
        |c: T| -> Result<T> { Ok(split_integral(prepared, gamma, c, |_, g| Ok((g - c).abs()), &config.quad)?.0) };
    let start = median(&prepared.samples).max(T::zero()).min(gamma_max);
    let f_start = objective(start)?;
    let mut delta = T::lit(0.05) * gamma_max;
    let (lo, hi) = loop {
        let lo = (start - delta).max(T::zero());
        let hi = (start + delta).min(gamma_max);
        let lo_ok = lo.is_zero() || objective(lo)? >= f_start;
        let hi_ok = hi >= gamma_max || objective(hi)? >= f_start;
        if lo_ok && hi_ok {
            break (lo, hi);
        }
        delta = delta * T::lit(2.0);
    };
    let tol = T::tol(1e-10) * (T::one() + gamma_max);
    let (golden, f_golden) = minimize_scalar(&mut objective, lo, hi, tol)?;
    Ok(if f_start <= f_golden { start } else { golden })
}

fn reference_rate<T: Real, G>(prepared: &Prepared<T>, gamma: &G, config: &SssConfig<T>) -> Result<T>
where
    G: Fn(T) -> Result<T>,
{
    match config.mode {
        ReferenceMode::PaperReference { gamma_ref } => Ok(gamma_ref),
        ReferenceMode::TrueMinimum => true_minimum(prepared, gamma, config),
    }
}

fn finish<T: Real>(
    xi: T,
    error: T,
    gamma_ref: T,
    prepared: Prepared<T>,
    config: &SssConfig<T>,
    choi: Option<ChoiDetails<T>>,
) -> MeasureResult<T> {
    let excised_measure = prepared
        .excised
        .iter()
        .fold(T::zero(), |acc, &(lo, hi)| acc + (hi - lo));
    MeasureResult {
        xi,
        zeta: zeta_of(xi),
        gamma_ref,
        excised: prepared.excised,
        excised_measure,
        error_estimate: error,
        config: *config,
        choi,
    }
}

/// Rate form `(1/T) ∫₀ᵀ |γ(t) − γ_ref| dt`, with `ε`-neighbourhoods of the
/// points in `singular` removed from the integration range.
pub fn sss_rate_form<T: Real, G>(gamma: G, singular: &[T], config: &SssConfig<T>) -> Result<MeasureResult<T>>
where
    G: Fn(T) -> Result<T>,
{
    config.validate()?;
    let prepared = prepare(&gamma, singular, config)?;
    let gamma_ref = reference_rate(&prepared, &gamma, config)?;
    let (integral, error) = split_integral(
        &prepared,
        &gamma,
        gamma_ref,
        |_, g| Ok((g - gamma_ref).abs()),
        &config.quad,
    )?;
    let xi = integral / config.horizon;
    Ok(finish(xi, error / config.horizon, gamma_ref, prepared, config, None))
}

/// Choi form: the integrand is the trace norm of the difference between the
/// Choi matrices of `ℒ(t)` and of the constant-rate generator with the same
/// jump structure. `xi` holds the raw value; `choi.normalized` divides it by
/// the family constant.
pub fn sss_choi_form<T: Real, P>(process: &P, config: &SssConfig<T>) -> Result<MeasureResult<T>>
where
    P: SemiMarkovFamily<T> + ?Sized,
{
    config.validate()?;
    let gamma = |t: T| process.rate(t);
    let singular = process.singular_points(config.horizon);
    let prepared = prepare(&gamma, &singular, config)?;
    let gamma_ref = reference_rate(&prepared, &gamma, config)?;
    let (dim, jump) = (process.generator_dim(), process.generator_jump());
    let reference = GeneratorSnapshot::new(dim, gamma_ref, jump)?.choi()?;
    let (integral, error) = split_integral(
        &prepared,
        &gamma,
        gamma_ref,
        |_, g| {
            let current = GeneratorSnapshot::new(dim, g, jump)?.choi()?;
            trace_norm(&(current.matrix() - reference.matrix()))
        },
        &config.quad,
    )?;
    let raw = integral / config.horizon;
    let constant: T = family_constant(dim, jump)?;
    let details = ChoiDetails {
        raw,
        family_constant: constant,
        normalized: raw / constant,
    };
    Ok(finish(
        raw,
        error / config.horizon,
        gamma_ref,
        prepared,
        config,
        Some(details),
    ))
}

/// Dispatches on `config.form`.
pub fn sss_measure<T: Real, P>(process: &P, config: &SssConfig<T>) -> Result<MeasureResult<T>>
where
    P: SemiMarkovFamily<T> + ?Sized,
{
    match config.form {
        MeasureForm::Rate => sss_rate_form(|t| process.rate(t), &process.singular_points(config.horizon), config),
        MeasureForm::Choi => sss_choi_form(process, config),
    }
}
