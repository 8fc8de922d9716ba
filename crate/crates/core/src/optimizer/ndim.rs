//! Spacings of the N-dimensional grid.
//!
//! Adjacent dimensions satisfy `F(Δ_i) = q²·F(Δ_{i+1})` with
//! `F(x) = Σ_{m ≤ ⌊2N/3⌋} γ_m e^{−θ_m x²}/x` and `Δ_i = d_i/σ_i`; the
//! first spacing is set by the budget `‖d‖² = 12P/(q²−1)`.

use super::bisect_increasing;
use crate::analytic::UNDERFLOW;
use crate::encoder::NDimSpacing;
use crate::error::{Error, Result};
use crate::model::{coefficients, Coefficients};

/// `ln F(x)`, strictly decreasing in `x`.
fn log_f(c: &Coefficients, bar: usize, x: f64) -> f64 {
    let x2 = x * x;
    let lead = c.theta[0];
    let mut acc = 0.0;
    for (&g, &t) in c.gamma[..bar].iter().zip(&c.theta) {
        let u = (t - lead) * x2;
        if u > UNDERFLOW {
            break;
        }
        acc += g * (-u).exp();
    }
    acc.ln() - lead * x2 - x.ln()
}

/// The `x` with `ln F(x) = target`.
fn invert(c: &Coefficients, bar: usize, target: f64) -> Option<f64> {
    if !target.is_finite() {
        return None;
    }
    let g = |x: f64| target - log_f(c, bar, x);
    let (mut lo, mut hi) = (1.0, 1.0);
    for _ in 0..2100 {
        if g(lo) < 0.0 {
            break;
        }
        lo *= 0.5;
    }
    for _ in 0..2100 {
        if g(hi) > 0.0 {
            break;
        }
        hi *= 2.0;
    }
    if !(g(lo) < 0.0 && g(hi) > 0.0) {
        return None;
    }
    Some(bisect_increasing(g, lo, hi))
}

/// Chain of spacings starting from `d1`.
fn chain(c: &Coefficients, bar: usize, step: f64, d1: f64, sigmas: &[f64]) -> Result<Vec<f64>> {
    let mut d = Vec::with_capacity(sigmas.len());
    let mut delta = d1 / sigmas[0];
    d.push(d1);
    for (i, &s) in sigmas.iter().enumerate().skip(1) {
        delta = invert(c, bar, log_f(c, bar, delta) - step).ok_or_else(|| Error::ChainPropagation {
            link: i,
            reason: format!("no spacing matches the link from normalized spacing {delta}"),
        })?;
        d.push(s * delta);
    }
    Ok(d)
}

/// Spacings for `dims` dimensions with common base `q`, `k` nodes, power
/// budget `power` and per-dimension noise deviations `sigmas`.
pub fn solve_ndim(dims: usize, q: usize, k: usize, power: f64, sigmas: &[f64]) -> Result<NDimSpacing> {
    if dims < 2 || q < 2 || k < 1 {
        return Err(Error::InvalidConfig(format!("need dims >= 2, q >= 2, K >= 1, got {dims}, {q}, {k}")));
    }
    if sigmas.len() != dims {
        return Err(Error::DimensionMismatch { expected: dims, got: sigmas.len() });
    }
    if sigmas.iter().any(|s| !(*s > 0.0) || !s.is_finite()) || !(power > 0.0) || !power.is_finite() {
        return Err(Error::InvalidConfig("noise deviations and power must be positive".into()));
    }
    let levels = k * (q - 1) + 1;
    let c = coefficients(levels);
    let bar = (2 * levels / 3).max(1);
    let step = 2.0 * (q as f64).ln();
    let budget = 12.0 * power / ((q * q - 1) as f64);
    let excess = |d1: f64| -> Result<f64> {
        let d = chain(&c, bar, step, d1, sigmas)?;
        Ok(d.iter().map(|x| x * x).sum::<f64>() - budget)
    };
    let hi = budget.sqrt();
    let mut lo = hi;
    for _ in 0..2100 {
        if excess(lo)? < 0.0 {
            break;
        }
        lo *= 0.5;
    }
    let mut err = None;
    let d1 = bisect_increasing(
        |x| match excess(x) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(NDimSpacing { d: chain(&c, bar, step, d1, sigmas)?, q })
}
