//! Stationarity functions on the power ellipse.
//!
//! Each function has the shape `A(t) − B(t)` with
//! `A(t) = Σ w_m k(θ_m Υ1²(0.5−t))/√(0.5−t)` and
//! `B(t) = c·Σ w'_m k(θ_m Υ2²(0.5+t))/√(0.5+t)`, where `k` is `e^{−u}` for
//! Gaussian noise and `1/(1+u)` for Cauchy noise. Solvers work on
//! `ln A − ln B`, which keeps its sign and stays finite where the sums
//! underflow.

use crate::analytic::UNDERFLOW;
use crate::error::{Error, Result};
use crate::model::{theta, DerivedGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kernel {
    Gaussian,
    Cauchy,
}

#[derive(Debug, Clone)]
struct Side {
    weights: Vec<f64>,
    theta: Vec<f64>,
    /// Multiplies `θ_m` inside the kernel.
    scale2: f64,
}

impl Side {
    fn new(weights: &[f64], theta: &[f64], scale2: f64) -> Side {
        Side { weights: weights.to_vec(), theta: theta[..weights.len()].to_vec(), scale2 }
    }

    fn sum(&self, s: f64, kernel: Kernel) -> f64 {
        let mut acc = 0.0;
        for (&w, &th) in self.weights.iter().zip(&self.theta) {
            let u = th * self.scale2 * s;
            match kernel {
                Kernel::Gaussian => {
                    if u > UNDERFLOW {
                        break;
                    }
                    acc += w * (-u).exp();
                }
                Kernel::Cauchy => acc += w / (1.0 + u),
            }
        }
        acc
    }

    /// `ln` of [`Side::sum`], NaN when the sum is not positive.
    fn log_sum(&self, s: f64, kernel: Kernel) -> f64 {
        match kernel {
            Kernel::Cauchy => {
                let v = self.sum(s, kernel);
                if v > 0.0 {
                    v.ln()
                } else {
                    f64::NAN
                }
            }
            Kernel::Gaussian => {
                let Some(&lead) = self.theta.first() else { return f64::NAN };
                let base = lead * self.scale2 * s;
                let mut acc = 0.0;
                for (&w, &th) in self.weights.iter().zip(&self.theta) {
                    let u = (th - lead) * self.scale2 * s;
                    if u > UNDERFLOW {
                        break;
                    }
                    acc += w * (-u).exp();
                }
                if acc > 0.0 {
                    acc.ln() - base
                } else {
                    f64::NAN
                }
            }
        }
    }
}

/// One `A(t) − B(t)` stationarity function.
#[derive(Debug, Clone)]
pub(crate) struct Stationarity {
    left: Side,
    right: Side,
    /// Constant in front of the right-hand sum.
    weight: f64,
    kernel: Kernel,
}

impl Stationarity {
    fn ml(grid: &DerivedGrid, bar1: usize, bar2: usize, kernel: Kernel) -> Self {
        Stationarity {
            left: Side::new(&grid.coef1.gamma[..bar1], &grid.coef1.theta, grid.upsilon1.powi(2)),
            right: Side::new(&grid.coef2.gamma[..bar2], &grid.coef2.theta, grid.upsilon2.powi(2)),
            weight: grid.kappa * grid.qsq(),
            kernel,
        }
    }

    pub(crate) fn ml_full(grid: &DerivedGrid) -> Self {
        Self::ml(grid, grid.n1 - 1, grid.n2 - 1, Kernel::Gaussian)
    }

    pub(crate) fn ml_truncated(grid: &DerivedGrid) -> Self {
        Self::ml(grid, grid.bar_n1, grid.bar_n2, Kernel::Gaussian)
    }

    pub(crate) fn first_terms(grid: &DerivedGrid) -> Self {
        Self::ml(grid, 1, 1, Kernel::Gaussian)
    }

    pub(crate) fn cauchy_full(grid: &DerivedGrid) -> Self {
        Self::ml(grid, grid.n1 - 1, grid.n2 - 1, Kernel::Cauchy)
    }

    pub(crate) fn cauchy_truncated(grid: &DerivedGrid) -> Self {
        Self::ml(grid, grid.bar_n1, grid.bar_n2, Kernel::Cauchy)
    }

    /// MAP receiver: `2q` and `2n` terms weighted by `θ_m`, with the region
    /// scale `η` folded into the kernel argument.
    pub(crate) fn map(grid: &DerivedGrid, eta: f64) -> Self {
        let t1: Vec<f64> = (1..=2 * grid.q).map(theta).collect();
        let t2: Vec<f64> = (1..=2 * grid.n).map(theta).collect();
        let e2 = eta * eta;
        Stationarity {
            left: Side::new(&t1, &t1, e2 * grid.upsilon1.powi(2)),
            right: Side::new(&t2, &t2, e2 * grid.upsilon2.powi(2)),
            weight: grid.kappa * grid.qsq(),
            kernel: Kernel::Gaussian,
        }
    }

    pub(crate) fn value(&self, t: f64) -> f64 {
        let (a, b) = (0.5 - t, 0.5 + t);
        self.left.sum(a, self.kernel) / a.sqrt() - self.weight * self.right.sum(b, self.kernel) / b.sqrt()
    }

    /// `ln A(t) − ln B(t)`.
    pub(crate) fn log_balance(&self, t: f64) -> f64 {
        let (a, b) = (0.5 - t, 0.5 + t);
        let la = self.left.log_sum(a, self.kernel) - 0.5 * a.ln();
        let lb = self.weight.ln() + self.right.log_sum(b, self.kernel) - 0.5 * b.ln();
        la - lb
    }

    /// `ln A − ln B` at an arbitrary point `(x, y) = (Δ1, Δ2)` with
    /// `x = Υ1√(0.5−t)`, `y = Υ2√(0.5+t)`.
    pub(crate) fn log_balance_xy(&self, x: f64, y: f64) -> f64 {
        let a = (x / self.left.scale2.sqrt()).powi(2);
        let b = (y / self.right.scale2.sqrt()).powi(2);
        self.left.log_sum(a, self.kernel)
            - 0.5 * a.ln()
            - (self.weight.ln() + self.right.log_sum(b, self.kernel) - 0.5 * b.ln())
    }
}

/// `|A − B|/(|A| + |B|)` from `ln A − ln B`; 1 when undefined.
pub(crate) fn relative_imbalance(log_balance: f64) -> f64 {
    if log_balance.is_nan() {
        1.0
    } else {
        (0.5 * log_balance).tanh().abs()
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > -0.5 && t < 0.5 {
        Ok(())
    } else {
        Err(Error::Domain(format!("t must lie in (-0.5, 0.5), got {t}")))
    }
}

fn g_sum(weights: &[f64], theta: &[f64], x: f64) -> f64 {
    Side::new(weights, theta, 1.0).sum(x * x, Kernel::Gaussian) / x
}

/// `Σ γ1_m e^{−θ_m x²}/x − q²κ²·Σ γ2_m e^{−θ_m y²}/y`, the stationarity
/// condition in normalized spacings `x = d1/σ`, `y = d2/σ`.
pub fn g_q(x: f64, y: f64, grid: &DerivedGrid) -> f64 {
    g_sum(&grid.coef1.gamma, &grid.coef1.theta, x)
        - grid.qsq() * grid.kappa.powi(2) * g_sum(&grid.coef2.gamma, &grid.coef2.theta, y)
}

/// [`g_q`] with both sums cut at the truncation indices.
pub fn g_tilde(x: f64, y: f64, grid: &DerivedGrid) -> f64 {
    g_sum(&grid.coef1.gamma[..grid.bar_n1], &grid.coef1.theta, x)
        - grid.qsq() * grid.kappa.powi(2) * g_sum(&grid.coef2.gamma[..grid.bar_n2], &grid.coef2.theta, y)
}

/// Full ML stationarity function; equals `Υ1·g_q` on the ellipse.
pub fn calg(t: f64, grid: &DerivedGrid) -> Result<f64> {
    check_t(t)?;
    Ok(Stationarity::ml_full(grid).value(t))
}

/// Truncated ML stationarity function.
pub fn calgbar(t: f64, grid: &DerivedGrid) -> Result<f64> {
    check_t(t)?;
    Ok(Stationarity::ml_truncated(grid).value(t))
}

/// MAP stationarity function for region scale `eta`.
pub fn calh(t: f64, grid: &DerivedGrid, eta: f64) -> Result<f64> {
    check_t(t)?;
    Ok(Stationarity::map(grid, eta).value(t))
}

/// High-SNR approximation keeping only the first term of each sum.
pub fn calf(t: f64, grid: &DerivedGrid) -> Result<f64> {
    check_t(t)?;
    Ok(Stationarity::first_terms(grid).value(t))
}

/// ML stationarity function under Cauchy noise.
pub fn calg_cauchy(t: f64, grid: &DerivedGrid) -> Result<f64> {
    check_t(t)?;
    Ok(Stationarity::cauchy_full(grid).value(t))
}
