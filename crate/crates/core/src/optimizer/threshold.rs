//! SNR thresholds below which the interior stationary point disappears.

use serde::{Deserialize, Serialize};

use super::poly::{poly_p1, poly_p2, poly_p3, poly_p4, root_search_limit, scan_roots};
use crate::error::{Error, Result};
use crate::model::DerivedGrid;

/// Lower end of the cross-equation scans.
const CROSS_MIN: f64 = 1e-7;
const CROSS_MAX_GAUSSIAN: f64 = 50.0;
const CROSS_MAX_CAUCHY: f64 = 1e4;
const CAUCHY_ROOT_MAX: f64 = 1e3;

/// Threshold SNR and the normalized spacings `(x, y)` where the interior
/// branch meets the axis branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub xi: f64,
    pub x: f64,
    pub y: f64,
}

fn combine(grid: &DerivedGrid, x: f64, y: f64) -> ThresholdPoint {
    let qq = (grid.q * grid.q - 1) as f64;
    let nn = (grid.n * grid.n - 1) as f64;
    ThresholdPoint { xi: (qq * x * x + nn * y * y) / 12.0, x, y }
}

fn largest(roots: Vec<f64>) -> Option<f64> {
    roots.last().copied()
}

/// Gaussian threshold point. On the axis with at least nine levels
/// (in-phase first, quadrature from ten), take the largest root of `P⁽¹⁾`
/// and carry it across with `P⁽²⁾_{N1}(x) = q²κ²·P⁽²⁾_{N2}(y)`.
pub fn threshold_point(grid: &DerivedGrid) -> Result<ThresholdPoint> {
    let (n1, n2) = (grid.n1, grid.n2);
    let c = grid.qsq() * grid.kappa.powi(2);
    let none = || Error::NoThreshold { n1, n2 };
    if n1 >= 9 {
        let x = largest(scan_roots(&|x| poly_p1(n1, x), root_search_limit(n1) * 1e-9, root_search_limit(n1)))
            .ok_or_else(none)?;
        let target = poly_p2(n1, x) / c;
        let y = largest(scan_roots(&|y| poly_p2(n2, y) - target, CROSS_MIN, CROSS_MAX_GAUSSIAN)).ok_or_else(none)?;
        Ok(combine(grid, x, y))
    } else if n2 >= 10 {
        let y = largest(scan_roots(&|y| poly_p1(n2, y), root_search_limit(n2) * 1e-9, root_search_limit(n2)))
            .ok_or_else(none)?;
        let target = c * poly_p2(n2, y);
        let x = largest(scan_roots(&|x| poly_p2(n1, x) - target, CROSS_MIN, CROSS_MAX_GAUSSIAN)).ok_or_else(none)?;
        Ok(combine(grid, x, y))
    } else {
        Err(none())
    }
}

/// Gaussian threshold SNR `ξ1`.
pub fn threshold_xi1(grid: &DerivedGrid) -> Result<f64> {
    threshold_point(grid).map(|p| p.xi)
}

/// Large-`K` approximation `1.5·n/K²` of `ξ1`.
pub fn threshold_xi1_approx(grid: &DerivedGrid) -> f64 {
    1.5 * grid.n as f64 / (grid.k * grid.k) as f64
}

/// Cauchy threshold from the largest `P⁽³⁾` root and
/// `q²·P⁽⁴⁾_{N2}(y) = P⁽⁴⁾_{N1}(x)`.
pub fn threshold_cauchy(grid: &DerivedGrid) -> Result<ThresholdPoint> {
    let (n1, n2) = (grid.n1, grid.n2);
    let q2 = grid.qsq();
    let none = || Error::NoThreshold { n1, n2 };
    let root = |levels: usize| largest(scan_roots(&|x| poly_p3(levels, x), CAUCHY_ROOT_MAX * 1e-10, CAUCHY_ROOT_MAX));
    if let Some(x) = root(n1) {
        let target = poly_p4(n1, x);
        let y = largest(scan_roots(&|y| q2 * poly_p4(n2, y) - target, CROSS_MIN, CROSS_MAX_CAUCHY)).ok_or_else(none)?;
        Ok(combine(grid, x, y))
    } else if let Some(y) = root(n2) {
        let target = q2 * poly_p4(n2, y);
        let x = largest(scan_roots(&|x| poly_p4(n1, x) - target, CROSS_MIN, CROSS_MAX_CAUCHY)).ok_or_else(none)?;
        Ok(combine(grid, x, y))
    } else {
        Err(none())
    }
}
