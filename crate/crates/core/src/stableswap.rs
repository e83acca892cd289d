//! The n-currency Stableswap invariant
//! `χ D^(n-1) Σx + Πx = χ D^n + (D/n)^n`
//! and its reading as an arithmetic blend of `A0 = Σx / D` and
//! `A1 = (n/D)^n Πx` with `t = n^-n / (χ + n^-n)`.

use serde::Serialize;

use crate::error::{positive, Error, Result};
use crate::roots;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StableswapParams {
    n: usize,
    d: f64,
    chi: f64,
}

impl StableswapParams {
    pub fn new(n: usize, d: f64, chi: f64) -> Result<Self> {
        check_n(n)?;
        let d = positive("d", d)?;
        if !(chi.is_finite() && chi >= 0.0) {
            return Err(Error::InvalidParameter { name: "chi", value: chi });
        }
        Ok(StableswapParams { n, d, chi })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    /// `x_j = D / n` for every `j`.
    pub fn balanced_state(&self) -> Vec<f64> {
        vec![self.d / self.n as f64; self.n]
    }

    /// Blend weight of the product term.
    pub fn t(&self) -> f64 {
        t_of(self.chi, self.n)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter { name: "n", value: n as f64 });
    }
    Ok(())
}

fn check_reserves(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    for &v in x {
        positive("reserve", v)?;
    }
    Ok(())
}

/// `n^-n`.
fn inv_pow(n: usize) -> f64 {
    (n as f64).powi(-(n as i32))
}

fn t_of(chi: f64, n: usize) -> f64 {
    let c = inv_pow(n);
    c / (chi + c)
}

/// Left side minus right side of the invariant.
pub fn invariant_residual(ss: &StableswapParams, x: &[f64]) -> Result<f64> {
    check_reserves(ss.n, x)?;
    let (n, d, chi) = (ss.n as i32, ss.d, ss.chi);
    let sum: f64 = x.iter().sum();
    let prod: f64 = x.iter().product();
    Ok(chi * d.powi(n - 1) * sum + prod - chi * d.powi(n) - (d / n as f64).powi(n))
}

/// `t = n^-n / (χ + n^-n)`.
pub fn t_from_chi(chi: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    if !(chi.is_finite() && chi >= 0.0) {
        return Err(Error::InvalidParameter { name: "chi", value: chi });
    }
    Ok(t_of(chi, n))
}

/// `χ = n^-n (1 - t) / t`, the inverse of [`t_from_chi`] on `(0, 1]`.
pub fn chi_from_t(t: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameter { name: "t", value: t });
    }
    Ok(inv_pow(n) * (1.0 - t) / t)
}

/// `χ = A Πx / (D/n)^n`; equals `A` at the balanced state.
pub fn dynamic_chi(amp: f64, d: f64, x: &[f64]) -> Result<f64> {
    let amp = positive("amp", amp)?;
    let d = positive("d", d)?;
    check_reserves(x.len().max(2), x)?;
    let prod: f64 = x.iter().product();
    Ok(amp * prod / (d / x.len() as f64).powi(x.len() as i32))
}

/// `|A0 (1 - t) + A1 t - 1|` with `t` from the leverage.
///
/// Equals the invariant residual divided by `χ D^n + (D/n)^n`.
pub fn equivalence_check(ss: &StableswapParams, x: &[f64]) -> Result<f64> {
    check_reserves(ss.n, x)?;
    let a0 = x.iter().sum::<f64>() / ss.d;
    let a1 = x.iter().map(|v| v * ss.n as f64 / ss.d).product::<f64>();
    let t = ss.t();
    Ok((a0 * (1.0 - t) + a1 * t - 1.0).abs())
}

/// Completes `fixed` (all but the last reserve) to a point of the invariant.
///
/// The invariant is affine in any single reserve, so the last one is explicit.
pub fn solve_last_coordinate(ss: &StableswapParams, fixed: &[f64]) -> Result<Vec<f64>> {
    check_reserves(ss.n - 1, fixed)?;
    let (n, d, chi) = (ss.n as i32, ss.d, ss.chi);
    let sum: f64 = fixed.iter().sum();
    let prod: f64 = fixed.iter().product();
    let lin = chi * d.powi(n - 1);
    let rhs = chi * d.powi(n) + (d / n as f64).powi(n) - lin * sum;
    let z = rhs / (lin + prod);
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::OutOfRange { target: z, min: 0.0, max: f64::INFINITY });
    }
    let mut out = fixed.to_vec();
    out.push(z);
    Ok(out)
}

/// The invariant after substituting the dynamic leverage:
/// `A n^n Σx + D - A D n^n - D^(n+1) / (n^n Πx)`.
pub fn curve_invariant_residual(amp: f64, d: f64, x: &[f64]) -> Result<f64> {
    let n = x.len();
    check_n(n)?;
    check_reserves(n, x)?;
    let nn = (n as f64).powi(n as i32);
    let sum: f64 = x.iter().sum();
    let prod: f64 = x.iter().product();
    Ok(amp * nn * sum + d - amp * d * nn - d.powi(n as i32 + 1) / (nn * prod))
}

/// Completes `fixed` to a point of [`curve_invariant_residual`] by bisection;
/// the residual increases in each reserve.
pub fn curve_solve_last(amp: f64, d: f64, fixed: &[f64]) -> Result<Vec<f64>> {
    let amp = positive("amp", amp)?;
    let d = positive("d", d)?;
    let n = fixed.len() + 1;
    check_n(n)?;
    check_reserves(n - 1, fixed)?;
    let mut trial = fixed.to_vec();
    trial.push(0.0);
    let mut f = |z: f64| {
        *trial.last_mut().expect("n >= 2") = z;
        curve_invariant_residual(amp, d, &trial).unwrap_or(f64::NAN)
    };
    let mut lo = d * 1e-3;
    while f(lo) > 0.0 {
        lo *= 1e-3;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::RootFinding("no lower bracket for the last reserve"));
        }
    }
    let mut hi = d;
    while f(hi) < 0.0 {
        hi *= 4.0;
        if !hi.is_finite() {
            return Err(Error::RootFinding("no upper bracket for the last reserve"));
        }
    }
    let z = roots::bisect(&mut f, lo, hi, 0.0)?;
    let mut out = fixed.to_vec();
    out.push(z);
    Ok(out)
}
