//! Problem configuration, derived grid quantities and coefficient tables.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Additive channel noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NoiseModel {
    /// Circularly symmetric complex Gaussian with total variance `sigma2`
    /// (each component carries `sigma2 / 2`).
    Gaussian { sigma2: f64 },
    /// Independent centered Cauchy components with scale `gamma`.
    Cauchy { gamma: f64 },
}

impl NoiseModel {
    /// σ for Gaussian noise, γ for Cauchy noise.
    pub fn scale(&self) -> f64 {
        match *self {
            NoiseModel::Gaussian { sigma2 } => sigma2.sqrt(),
            NoiseModel::Cauchy { gamma } => gamma,
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, NoiseModel::Gaussian { .. })
    }
}

/// A problem instance: `k` nodes sharing a `q × n` constellation under an
/// average power budget `power`.
///
/// The noise parameters are authoritative; the SNR `ξ = P / scale²` is
/// derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub q: usize,
    pub n: usize,
    pub k: usize,
    pub power: f64,
    pub noise: NoiseModel,
}

impl SystemConfig {
    pub fn new(q: usize, n: usize, k: usize, power: f64, noise: NoiseModel) -> Result<Self> {
        let cfg = SystemConfig { q, n, k, power, noise };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Gaussian instance at unit power with `σ² = 1/ξ`.
    pub fn gaussian(q: usize, n: usize, k: usize, snr: f64) -> Result<Self> {
        if !(snr > 0.0) || !snr.is_finite() {
            return Err(Error::InvalidConfig(format!("snr must be positive, got {snr}")));
        }
        Self::new(q, n, k, 1.0, NoiseModel::Gaussian { sigma2: 1.0 / snr })
    }

    /// Cauchy instance at unit power with `γ = 1/√ξ`.
    pub fn cauchy(q: usize, n: usize, k: usize, snr: f64) -> Result<Self> {
        if !(snr > 0.0) || !snr.is_finite() {
            return Err(Error::InvalidConfig(format!("snr must be positive, got {snr}")));
        }
        Self::new(q, n, k, 1.0, NoiseModel::Cauchy { gamma: 1.0 / snr.sqrt() })
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 2 || self.n < 2 || self.k < 2 {
            return Err(Error::InvalidConfig(format!(
                "need q, n, K >= 2, got q={}, n={}, K={}",
                self.q, self.n, self.k
            )));
        }
        if !(self.power > 0.0) || !self.power.is_finite() {
            return Err(Error::InvalidConfig(format!("power must be positive, got {}", self.power)));
        }
        match self.noise {
            NoiseModel::Gaussian { sigma2 } if !(sigma2 >= 0.0) || !sigma2.is_finite() => {
                Err(Error::InvalidConfig(format!("sigma2 must be non-negative, got {sigma2}")))
            }
            NoiseModel::Cauchy { gamma } if !(gamma > 0.0) || !gamma.is_finite() => {
                Err(Error::InvalidConfig(format!("gamma must be positive, got {gamma}")))
            }
            _ => Ok(()),
        }
    }

    /// ξ = P / σ² (or P / γ² for Cauchy noise).
    pub fn snr(&self) -> f64 {
        match self.noise {
            NoiseModel::Gaussian { sigma2 } => self.power / sigma2,
            NoiseModel::Cauchy { gamma } => self.power / (gamma * gamma),
        }
    }

    pub fn noise_scale(&self) -> f64 {
        self.noise.scale()
    }

    /// Same power and noise family, noise rescaled to reach `snr`.
    pub fn with_snr(&self, snr: f64) -> Result<Self> {
        if !(snr > 0.0) || !snr.is_finite() {
            return Err(Error::InvalidConfig(format!("snr must be positive, got {snr}")));
        }
        let noise = match self.noise {
            NoiseModel::Gaussian { .. } => NoiseModel::Gaussian { sigma2: self.power / snr },
            NoiseModel::Cauchy { .. } => NoiseModel::Cauchy { gamma: (self.power / snr).sqrt() },
        };
        Self::new(self.q, self.n, self.k, self.power, noise)
    }

    /// Number of symbols per node, `q·n`.
    pub fn symbols(&self) -> usize {
        self.q * self.n
    }

    pub fn grid(&self) -> Result<DerivedGrid> {
        derive_grid(self)
    }
}

/// Cached quantities of the superimposed grid.
#[derive(Debug, Clone)]
pub struct DerivedGrid {
    pub q: usize,
    pub n: usize,
    pub k: usize,
    pub snr: f64,
    /// Real-axis levels `K(q−1)+1`.
    pub n1: usize,
    /// Imaginary-axis levels `K(n−1)+1`.
    pub n2: usize,
    pub upsilon1: f64,
    pub upsilon2: f64,
    pub kappa: f64,
    /// Truncation index `⌊2·n1/3⌋`.
    pub bar_n1: usize,
    pub bar_n2: usize,
    pub coef1: Arc<Coefficients>,
    pub coef2: Arc<Coefficients>,
}

pub fn derive_grid(cfg: &SystemConfig) -> Result<DerivedGrid> {
    cfg.validate()?;
    let snr = cfg.snr();
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(Error::InvalidConfig(format!("snr must be positive and finite, got {snr}")));
    }
    let (q, n, k) = (cfg.q, cfg.n, cfg.k);
    let n1 = k * (q - 1) + 1;
    let n2 = k * (n - 1) + 1;
    let qq = (q * q - 1) as f64;
    let nn = (n * n - 1) as f64;
    Ok(DerivedGrid {
        q,
        n,
        k,
        snr,
        n1,
        n2,
        upsilon1: (12.0 * snr / qq).sqrt(),
        upsilon2: (12.0 * snr / nn).sqrt(),
        kappa: (qq / nn).sqrt(),
        bar_n1: 2 * n1 / 3,
        bar_n2: 2 * n2 / 3,
        coef1: coefficients(n1),
        coef2: coefficients(n2),
    })
}

impl DerivedGrid {
    /// Same grid at a different SNR.
    pub fn at_snr(&self, snr: f64) -> DerivedGrid {
        let qq = (self.q * self.q - 1) as f64;
        let nn = (self.n * self.n - 1) as f64;
        DerivedGrid { snr, upsilon1: (12.0 * snr / qq).sqrt(), upsilon2: (12.0 * snr / nn).sqrt(), ..self.clone() }
    }

    pub fn qsq(&self) -> f64 {
        (self.q * self.q) as f64
    }
}

/// Per-level coefficient table for a grid with `levels` points per axis.
/// Index `m − 1` holds the value for `m = 1..levels−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub levels: usize,
    pub theta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Coefficients {
    pub fn new(levels: usize) -> Self {
        let nf = levels as f64;
        let mut theta = Vec::with_capacity(levels.saturating_sub(1));
        let mut alpha = Vec::with_capacity(levels.saturating_sub(1));
        let mut gamma = Vec::with_capacity(levels.saturating_sub(1));
        for m in 1..levels {
            let mf = m as f64;
            let odd = 2.0 * mf - 1.0;
            let a = odd + (3.0 * mf * (1.0 - mf) - 1.0) / nf;
            theta.push(odd * odd / 4.0);
            alpha.push(a);
            gamma.push(odd * a);
        }
        Coefficients { levels, theta, alpha, gamma }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// θ_m = (2m−1)²/4.
pub fn theta(m: usize) -> f64 {
    let odd = 2.0 * m as f64 - 1.0;
    odd * odd / 4.0
}

/// β_m = 2m−1.
pub fn beta(m: usize) -> f64 {
    2.0 * m as f64 - 1.0
}

/// Shared, memoized table for `levels`.
pub fn coefficients(levels: usize) -> Arc<Coefficients> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Coefficients>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(levels).or_insert_with(|| Arc::new(Coefficients::new(levels))).clone()
}

pub fn snr_from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn snr_to_db(xi: f64) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::Domain(format!("snr_to_db needs xi > 0, got {xi}")));
    }
    Ok(10.0 * xi.log10())
}
