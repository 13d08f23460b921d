//! One-dimensional minimization and root bracketing.

use crate::error::{Error, Result};
use crate::scalar::Real;

fn checked<T: Real>(x: T, y: T) -> Result<T> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NumericalError { at: x.as_f64() })
    }
}

/// Golden-section search on `[lo, hi]`; assumes `f` is unimodal there.
///
/// Returns `(argmin, f(argmin))`. The endpoints are compared at the end, so
/// a minimum sitting on the boundary is returned exactly.
pub fn minimize_scalar<T: Real, F>(mut f: F, lo: T, hi: T, tol: T) -> Result<(T, T)>
where
    F: FnMut(T) -> Result<T>,
{
    if !(lo < hi) {
        return Err(Error::DomainError(format!("empty search interval [{lo}, {hi}]")));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = checked(x1, f(x1)?)?;
    let mut f2 = checked(x2, f(x2)?)?;

    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = checked(x1, f(x1)?)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = checked(x2, f(x2)?)?;
        }
    }
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for x in [lo, hi] {
        let fx = checked(x, f(x)?)?;
        if fx < best.1 {
            best = (x, fx);
        }
    }
    Ok(best)
}

/// Brent's method: inverse quadratic interpolation and secant steps with a
/// bisection fallback. Terminates when the bracket is narrower than `tol`
/// or an exact zero is hit.
pub fn find_root<T: Real, F>(mut f: F, lo: T, hi: T, tol: T) -> Result<T>
where
    F: FnMut(T) -> T,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = checked(a, f(a))?;
    let mut fb = checked(b, f(b))?;
    if fa.is_zero() {
        return Ok(a);
    }
    if fb.is_zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * T::epsilon() * b.abs() + half * tol;
        let xm = half * (c - b);
        if xm.abs() <= tol1 || fb.is_zero() {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = T::lit(3.0) * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol1 { b + d } else { b + tol1 * xm.signum() };
        fb = checked(b, f(b))?;
    }
    Ok(b)
}
