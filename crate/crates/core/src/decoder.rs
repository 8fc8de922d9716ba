//! Receivers: per-axis slicing of the superimposed grid under ML and the
//! η-scaled MAP rule, the hybrid clipped-linear decoder and N-dim slicing.

use num_complex::Complex64;

use crate::encoder::{GridSpacing, NDimSpacing};
use crate::error::{Error, Result};
use crate::model::{NoiseModel, SystemConfig};

/// Index of the decision region containing `value` on the grid
/// `{0, spacing, …, (count−1)·spacing}`.
///
/// With `scale = 1` this is the nearest level, end regions being half-lines
/// and ties going to the lower index. Other scales stretch every region by
/// `scale` about the grid center, which is where the prior of a sum of
/// uniform symbols peaks.
pub fn slice_axis(value: f64, spacing: f64, count: usize, scale: f64) -> usize {
    if !(spacing > 0.0) || count < 2 {
        return 0;
    }
    let u = if scale == 1.0 {
        value / spacing
    } else {
        let center = (count - 1) as f64 / 2.0;
        center + (value / spacing - center) / scale
    };
    let idx = (u - 0.5).ceil();
    if idx.is_nan() || idx <= 0.0 {
        0
    } else if idx >= (count - 1) as f64 {
        count - 1
    } else {
        idx as usize
    }
}

fn decode_scaled(r: Complex64, sp: &GridSpacing, cfg: &SystemConfig, scale: f64) -> u64 {
    let y = r - sp.chi * cfg.k as f64;
    let n1 = cfg.k * (cfg.q - 1) + 1;
    let n2 = cfg.k * (cfg.n - 1) + 1;
    let a = slice_axis(y.re, sp.d1, n1, scale);
    let b = slice_axis(y.im, sp.d2, n2, scale);
    (a + cfg.q * b) as u64
}

/// ML estimate of `Σ s_k`.
pub fn decode_ml(r: Complex64, sp: &GridSpacing, cfg: &SystemConfig) -> u64 {
    decode_scaled(r, sp, cfg, 1.0)
}

/// Region scale `η = 1 + σ²/K` of the MAP rule.
pub fn map_scale(cfg: &SystemConfig) -> Result<f64> {
    match cfg.noise {
        NoiseModel::Gaussian { sigma2 } => Ok(1.0 + sigma2 / cfg.k as f64),
        NoiseModel::Cauchy { .. } => Err(Error::Unsupported("MAP decoding under Cauchy noise")),
    }
}

/// MAP estimate of `Σ s_k` with η-scaled regions.
pub fn decode_map(r: Complex64, sp: &GridSpacing, cfg: &SystemConfig) -> Result<u64> {
    Ok(decode_scaled(r, sp, cfg, map_scale(cfg)?))
}

/// Hybrid receiver: clipped-linear on the real axis, PAM slicing on the
/// imaginary axis.
pub fn decode_hybrid(r: Complex64, sp: &GridSpacing, q: f64, n: usize, k: usize) -> f64 {
    let y = r - sp.chi * k as f64;
    let re = (y.re / sp.d1).clamp(0.0, k as f64 * q);
    let im = slice_axis(y.im, sp.d2, k * (n - 1) + 1, 1.0);
    re + q * im as f64
}

/// Slices each dimension and recombines the digits with weights `q^{i−1}`.
pub fn decode_ndim(r: &[f64], sp: &NDimSpacing, cfg: &SystemConfig) -> Result<u64> {
    if r.len() != sp.dims() {
        return Err(Error::DimensionMismatch { expected: sp.dims(), got: r.len() });
    }
    let count = cfg.k * (sp.q - 1) + 1;
    let mut f = 0u64;
    let mut w = 1u64;
    for (&v, &d) in r.iter().zip(&sp.d) {
        f += slice_axis(v, d, count, 1.0) as u64 * w;
        w *= sp.q as u64;
    }
    Ok(f)
}
