//! Symbol-to-constellation maps: the 2-D grid, the hybrid digital–analog
//! curve and the N-dimensional grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemConfig;

/// Spacings of the per-node grid and its centering offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpacing {
    pub d1: f64,
    pub d2: f64,
    pub chi: Complex64,
}

impl GridSpacing {
    /// Spacings with the zero-mean offset `−((q−1)d1 + (n−1)d2·i)/2`.
    pub fn centered(d1: f64, d2: f64, q: usize, n: usize) -> Self {
        let chi = -Complex64::new((q - 1) as f64 * d1, (n - 1) as f64 * d2) / 2.0;
        GridSpacing { d1, d2, chi }
    }

    pub fn uncentered(d1: f64, d2: f64) -> Self {
        GridSpacing { d1, d2, chi: Complex64::new(0.0, 0.0) }
    }

    /// The QAM-style baseline `d1 = d2 = √(12P/(q²+n²−2))`.
    pub fn equal_distance(cfg: &SystemConfig) -> Self {
        let (q, n) = (cfg.q as f64, cfg.n as f64);
        let d = (12.0 * cfg.power / (q * q + n * n - 2.0)).sqrt();
        Self::centered(d, d, cfg.q, cfg.n)
    }
}

/// Spacings of an N-dimensional grid with common base `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NDimSpacing {
    pub d: Vec<f64>,
    pub q: usize,
}

impl NDimSpacing {
    pub fn dims(&self) -> usize {
        self.d.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.d.iter().map(|x| x * x).sum()
    }
}

/// Base-`q` split `s = c1 + c2·q`.
pub fn decompose(s: u64, q: usize, n: usize) -> Result<(usize, usize)> {
    let limit = (q * n) as u64;
    if s >= limit {
        return Err(Error::SymbolOutOfRange { symbol: s, limit });
    }
    let q = q as u64;
    Ok(((s % q) as usize, (s / q) as usize))
}

pub fn encode(s: u64, sp: &GridSpacing, cfg: &SystemConfig) -> Result<Complex64> {
    let (c1, c2) = decompose(s, cfg.q, cfg.n)?;
    Ok(Complex64::new(c1 as f64 * sp.d1, c2 as f64 * sp.d2) + sp.chi)
}

/// Mean `|encode(s)|²` over uniform symbols for the centered grid.
pub fn avg_power(sp: &GridSpacing, cfg: &SystemConfig) -> f64 {
    let (q, n) = (cfg.q as f64, cfg.n as f64);
    (q * q - 1.0) / 12.0 * sp.d1 * sp.d1 + (n * n - 1.0) / 12.0 * sp.d2 * sp.d2
}

/// Hybrid map of a real input `s ∈ [0, q·n]`: the level `⌊s/q⌋` goes on the
/// imaginary axis and the residual is sent as an analog amplitude on the
/// real axis. `s = q·n` is carried as residual `q` on level `n−1`.
pub fn encode_hybrid(s: f64, sp: &GridSpacing, q: f64, n: usize) -> Result<Complex64> {
    let top = q * n as f64;
    if !(0.0..=top).contains(&s) || !(q > 0.0) {
        return Err(Error::Domain(format!("hybrid input {s} outside [0, {top}]")));
    }
    let level = ((s / q).floor() as usize).min(n - 1);
    let residual = s - q * level as f64;
    Ok(Complex64::new(residual * sp.d1, level as f64 * sp.d2) + sp.chi)
}

/// Second moment of the uncentered hybrid constellation under uniform input.
pub fn hybrid_avg_power(sp: &GridSpacing, q: f64, n: usize) -> f64 {
    let nf = n as f64;
    sp.d1 * sp.d1 * q * q / 3.0 + sp.d2 * sp.d2 * (nf - 1.0) * (2.0 * nf - 1.0) / 6.0
}

/// Base-`q` digits of `s`, least significant first.
pub fn digits(s: u64, q: usize, dims: usize) -> Result<Vec<usize>> {
    let limit = (q as u64).checked_pow(dims as u32).unwrap_or(u64::MAX);
    if s >= limit {
        return Err(Error::SymbolOutOfRange { symbol: s, limit });
    }
    let mut rest = s;
    Ok((0..dims)
        .map(|_| {
            let c = (rest % q as u64) as usize;
            rest /= q as u64;
            c
        })
        .collect())
}

pub fn encode_ndim(s: u64, sp: &NDimSpacing) -> Result<Vec<f64>> {
    let c = digits(s, sp.q, sp.dims())?;
    Ok(c.iter().zip(&sp.d).map(|(&c, &d)| c as f64 * d).collect())
}
