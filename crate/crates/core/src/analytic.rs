//! Closed-form MSE of the ML and MAP receivers and of the N-dim grid.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::decoder::map_scale;
use crate::encoder::{GridSpacing, NDimSpacing};
use crate::error::{Error, Result};
use crate::model::{coefficients, Coefficients, NoiseModel, SystemConfig};

/// Exponent beyond which `e^{−x}` underflows.
pub(crate) const UNDERFLOW: f64 = 745.0;

/// Gaussian upper tail `Q(x) = ½·erfc(x/√2)`.
pub fn qfunc(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseBreakdown {
    /// In-phase contribution.
    pub real_term: f64,
    /// Quadrature contribution including the `q²` weight.
    pub imag_term: f64,
    pub total: f64,
    /// Bound on the neglected MAP approximation error.
    pub error_bound: Option<f64>,
}

fn gaussian_sigma(cfg: &SystemConfig) -> Result<f64> {
    match cfg.noise {
        NoiseModel::Gaussian { sigma2 } => Ok(sigma2.sqrt()),
        NoiseModel::Cauchy { .. } => Err(Error::Unsupported("closed-form MSE needs Gaussian noise")),
    }
}

/// `Σ_m w_m·Q((2m−1)·x/scale)` over the given weights, stopping once the
/// tail underflows.
fn weighted_tail_sum(weights: impl Iterator<Item = f64>, x: f64, scale: f64) -> f64 {
    if x == 0.0 {
        return 0.5 * weights.sum::<f64>();
    }
    let mut acc = 0.0;
    for (i, w) in weights.enumerate() {
        let arg = (2 * i + 1) as f64 * x / scale;
        if arg * arg / 2.0 > UNDERFLOW {
            break;
        }
        acc += w * qfunc(arg);
    }
    acc
}

/// Per-axis ML error term `μ(x) = 2·Σ α_m Q((2m−1)x/(√2σ))`.
pub fn axis_mu(coef: &Coefficients, x: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return if x > 0.0 { 0.0 } else { 2.0 * 0.5 * coef.alpha.iter().sum::<f64>() };
    }
    2.0 * weighted_tail_sum(coef.alpha.iter().copied(), x, SQRT_2 * sigma)
}

/// Per-axis MAP error term `ω(x) = 2·Σ_{m=1}^{terms} β_m Q(η β_m x/(√2σ))`.
pub fn axis_omega(terms: usize, x: f64, sigma: f64, eta: f64) -> f64 {
    let betas = (1..=terms).map(|m| 2.0 * m as f64 - 1.0);
    if sigma == 0.0 {
        return if x > 0.0 { 0.0 } else { betas.sum::<f64>() };
    }
    2.0 * weighted_tail_sum(betas, eta * x, SQRT_2 * sigma)
}

pub fn mse_ml(sp: &GridSpacing, cfg: &SystemConfig) -> Result<MseBreakdown> {
    let sigma = gaussian_sigma(cfg)?;
    let n1 = cfg.k * (cfg.q - 1) + 1;
    let n2 = cfg.k * (cfg.n - 1) + 1;
    let real_term = axis_mu(&coefficients(n1), sp.d1, sigma);
    let imag_term = (cfg.q * cfg.q) as f64 * axis_mu(&coefficients(n2), sp.d2, sigma);
    Ok(MseBreakdown { real_term, imag_term, total: real_term + imag_term, error_bound: None })
}

/// Bound on one axis' neglected MAP terms: the grid tail beyond `levels`
/// plus the prior mass near the grid edge.
fn map_axis_bound(d: f64, sigma: f64, eta: f64, levels: usize, k: usize) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    if d == 0.0 {
        return f64::INFINITY;
    }
    let l = levels as f64;
    let b = 2.0 * l - 1.0;
    let de = d * eta;
    let tail = 4.0 * sigma / (de * PI.sqrt())
        * (-(de * de * b * b) / (4.0 * sigma * sigma)).exp()
        * (b + 4.0 * sigma * sigma / (de * de * b));
    let mean = (l - 1.0) * k as f64 / 2.0;
    let var = (l * l - 1.0) * k as f64 / 12.0;
    let edge = 2.0 * SQRT_2 * de * l * l / (PI * var.sqrt() * sigma)
        * (-(l - mean).powi(2) / (2.0 * var) - de * de / (4.0 * sigma * sigma)).exp();
    tail + edge
}

pub fn mse_map(sp: &GridSpacing, cfg: &SystemConfig) -> Result<MseBreakdown> {
    let sigma = gaussian_sigma(cfg)?;
    let eta = map_scale(cfg)?;
    let qsq = (cfg.q * cfg.q) as f64;
    let real_term = axis_omega(2 * cfg.q, sp.d1, sigma, eta);
    let imag_term = qsq * axis_omega(2 * cfg.n, sp.d2, sigma, eta);
    let bound = map_axis_bound(sp.d1, sigma, eta, cfg.q, cfg.k) + qsq * map_axis_bound(sp.d2, sigma, eta, cfg.n, cfg.k);
    Ok(MseBreakdown { real_term, imag_term, total: real_term + imag_term, error_bound: Some(bound) })
}

/// MSE of the N-dim grid, `Σ_i q^{i−1}·Σ_m α_m Q((2m−1)d_i/σ_i)`.
pub fn mse_ndim(sp: &NDimSpacing, sigmas: &[f64], k: usize) -> Result<f64> {
    if sigmas.len() != sp.dims() {
        return Err(Error::DimensionMismatch { expected: sp.dims(), got: sigmas.len() });
    }
    let coef = coefficients(k * (sp.q - 1) + 1);
    let mut w = 1.0;
    let mut total = 0.0;
    for (&d, &s) in sp.d.iter().zip(sigmas) {
        let mu = if s == 0.0 {
            if d > 0.0 {
                0.0
            } else {
                0.5 * coef.alpha.iter().sum::<f64>()
            }
        } else {
            weighted_tail_sum(coef.alpha.iter().copied(), d, s)
        };
        total += w * mu;
        w *= sp.q as f64;
    }
    Ok(total)
}
