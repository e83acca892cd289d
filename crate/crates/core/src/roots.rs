//! Scalar root finding on a bracket.
//!
//! Everything in this crate that inverts a monotone map (λ for the arithmetic
//! mixing, s for a target reserve, the last coordinate of a Stableswap state)
//! goes through these two routines.

use crate::error::{Error, Result};

/// Bisection on `[lo, hi]` until the bracket stops shrinking or its width
/// drops below `tol`. Returns the final bracket `(lo, hi)` with
/// `f(lo)` and `f(hi)` of opposite sign (or one of them zero).
pub fn bisect_bracket<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok((lo, lo));
    }
    if f_hi == 0.0 {
        return Ok((hi, hi));
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::RootFinding("bracket has no sign change"));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok((mid, mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Plain bisection returning the bracket midpoint.
pub fn bisect<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (lo, hi) = bisect_bracket(f, lo, hi, tol)?;
    Ok(0.5 * (lo + hi))
}

/// Safeguarded Newton: Newton steps that stay inside the current bracket,
/// bisection otherwise. `f` returns `(value, derivative)`.
///
/// Converges when the step is below `rel_tol * |x|`.
pub fn newton_bisect<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::RootFinding("bracket has no sign change"));
    }
    let rising = f_hi > 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == rising {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= rel_tol * x.abs().max(f64::MIN_POSITIVE) || hi - lo <= rel_tol * hi.abs() {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::RootFinding("iteration limit reached"))
}
