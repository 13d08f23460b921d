//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Intervals are bisected worst-first until the summed error estimate meets
//! `max(abs_tol, rel_tol·|I|)`. [`adaptive_quad_excised`] additionally removes
//! `ε`-neighbourhoods of caller-flagged singular points and grades the mesh
//! geometrically towards each excision edge.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions<T: Real> {
    pub abs_tol: T,
    pub rel_tol: T,
    /// Maximum bisection depth of any subinterval.
    pub max_depth: u32,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::tol(1e-10),
            rel_tol: T::tol(1e-8),
            max_depth: 20,
            max_intervals: 20_000,
        }
    }
}

impl<T: Real> QuadOptions<T> {
    pub fn with_tolerances(abs_tol: T, rel_tol: T) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T: Real> {
    pub value: T,
    pub error_estimate: T,
    pub evaluations: usize,
}

/// Quadrature over a domain with excised neighbourhoods.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcisedQuadrature<T: Real> {
    pub result: QuadratureResult<T>,
    /// Removed intervals, clipped to `[a, b]`.
    pub excised: Vec<(T, T)>,
}

impl<T: Real> ExcisedQuadrature<T> {
    pub fn excised_measure(&self) -> T {
        self.excised.iter().map(|&(lo, hi)| hi - lo).sum()
    }
}

struct Segment<T: Real> {
    a: T,
    b: T,
    value: T,
    error: T,
    abs: T,
    depth: u32,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Segment<T> {}
impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// (Kronrod value, |Kronrod − Gauss|, Σ|f|·w)
fn gk15<T: Real, F>(f: &mut F, a: T, b: T) -> Result<(T, T, T)>
where
    F: FnMut(T) -> Result<T>,
{
    let half = T::lit(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let mut eval = |x: T| -> Result<T> {
        let y = f(x)?;
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NumericalError { at: x.as_f64() })
        }
    };
    let fc = eval(center)?;
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    let mut abs_sum = fc.abs() * T::lit(WGK[7]);
    for k in 0..7 {
        let dx = radius * T::lit(XGK[k]);
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        let wk = T::lit(WGK[k]);
        kronrod = kronrod + wk * (f1 + f2);
        abs_sum = abs_sum + wk * (f1.abs() + f2.abs());
        if k % 2 == 1 {
            gauss = gauss + T::lit(WG[k / 2]) * (f1 + f2);
        }
    }
    let scale = radius.abs();
    Ok((kronrod * radius, ((kronrod - gauss) * radius).abs(), abs_sum * scale))
}

/// Integrates a fallible integrand; errors from `f` abort the integration.
pub fn adaptive_quad_try<T: Real, F>(mut f: F, a: T, b: T, opts: &QuadOptions<T>) -> Result<QuadratureResult<T>>
where
    F: FnMut(T) -> Result<T>,
{
    if !(a <= b) {
        return Err(Error::DomainError(format!(
            "integration bounds [{a}, {b}] out of order"
        )));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: T::zero(),
            error_estimate: T::zero(),
            evaluations: 1,
        });
    }
    let (value, error, abs_value) = gk15(&mut f, a, b)?;
    let mut evaluations = 15;
    let mut total = value;
    let mut total_err = error;
    let mut total_abs = abs_value;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value,
        error,
        abs: abs_value,
        depth: 0,
    });
    let roundoff = T::lit(50.0) * T::epsilon();

    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= target || total_err <= roundoff * total_abs {
            return Ok(QuadratureResult {
                value: total,
                error_estimate: total_err,
                evaluations,
            });
        }
        let worst = heap.pop().expect("segment heap is never empty");
        if worst.depth >= opts.max_depth || heap.len() + 2 > opts.max_intervals {
            return Err(Error::ToleranceNotMet {
                estimate: total_err.as_f64(),
                target: target.as_f64(),
            });
        }
        let mid = T::lit(0.5) * (worst.a + worst.b);
        let (v1, e1, r1) = gk15(&mut f, worst.a, mid)?;
        let (v2, e2, r2) = gk15(&mut f, mid, worst.b)?;
        evaluations += 30;
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        total_abs = total_abs - worst.abs + r1 + r2;
        if total_err < T::zero() {
            total_err = heap.iter().map(|s| s.error).sum::<T>() + e1 + e2;
        }
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            abs: r1,
            depth: worst.depth + 1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            abs: r2,
            depth: worst.depth + 1,
        });
    }
}

/// `∫_a^b f(t) dt` for an infallible integrand.
pub fn adaptive_quad<T: Real, F>(mut f: F, a: T, b: T, opts: &QuadOptions<T>) -> Result<QuadratureResult<T>>
where
    F: FnMut(T) -> T,
{
    adaptive_quad_try(|x| Ok(f(x)), a, b, opts)
}

/// Closed sub-intervals `(start, end)`.
pub type Intervals<T> = Vec<(T, T)>;

/// Splits `[a, b]` into integration pieces: `ε`-neighbourhoods of the
/// singular points are removed, each remaining side is graded geometrically
/// (`ε·2^k` away from the singular point), and `breakpoints` are honoured.
/// Returns `(pieces, excised)`.
pub fn excision_pieces<T: Real>(
    a: T,
    b: T,
    singular: &[T],
    breakpoints: &[T],
    epsilon: T,
) -> (Intervals<T>, Intervals<T>) {
    let mut excised: Vec<(T, T)> = Vec::new();
    let mut sorted: Vec<T> = singular
        .iter()
        .copied()
        .filter(|&s| s > a - epsilon && s < b + epsilon)
        .collect();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    for s in &sorted {
        let lo = (*s - epsilon).max(a);
        let hi = (*s + epsilon).min(b);
        if hi <= lo {
            continue;
        }
        match excised.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => excised.push((lo, hi)),
        }
    }

    let mut cuts: Vec<T> = vec![a, b];
    for &(lo, hi) in &excised {
        cuts.push(lo);
        cuts.push(hi);
    }
    let two = T::lit(2.0);
    for s in &sorted {
        let mut offset = epsilon * two;
        while offset < b - a {
            for x in [*s - offset, *s + offset] {
                if x > a && x < b {
                    cuts.push(x);
                }
            }
            offset = offset * two;
        }
    }
    cuts.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    cuts.dedup();

    let inside_excision = |lo: T, hi: T| {
        let mid = T::lit(0.5) * (lo + hi);
        excised.iter().any(|&(el, eh)| mid >= el && mid <= eh)
    };
    let pieces = cuts
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|&(lo, hi)| hi > lo && !inside_excision(lo, hi))
        .collect();
    (pieces, excised)
}

/// `∫ f` over `[a, b]` minus the `ε`-neighbourhoods of `singular`.
pub fn adaptive_quad_excised<T: Real, F>(
    mut f: F,
    a: T,
    b: T,
    singular: &[T],
    breakpoints: &[T],
    epsilon: T,
    opts: &QuadOptions<T>,
) -> Result<ExcisedQuadrature<T>>
where
    F: FnMut(T) -> Result<T>,
{
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "excision radius {epsilon} must be positive"
        )));
    }
    if !(a <= b) {
        return Err(Error::DomainError(format!(
            "integration bounds [{a}, {b}] out of order"
        )));
    }
    let (pieces, excised) = excision_pieces(a, b, singular, breakpoints, epsilon);
    let share = T::from_count(pieces.len().max(1));
    let piece_opts = QuadOptions {
        abs_tol: opts.abs_tol / share,
        ..*opts
    };
    let mut value = T::zero();
    let mut error = T::zero();
    let mut evaluations = 0;
    for (lo, hi) in pieces {
        let r = adaptive_quad_try(&mut f, lo, hi, &piece_opts)?;
        value = value + r.value;
        error = error + r.error_estimate;
        evaluations += r.evaluations;
    }
    Ok(ExcisedQuadrature {
        result: QuadratureResult {
            value,
            error_estimate: error,
            evaluations: evaluations.max(1),
        },
        excised,
    })
}
