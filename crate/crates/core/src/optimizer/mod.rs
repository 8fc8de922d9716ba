//! Optimal grid spacings: root polynomials, thresholds, stationarity
//! functions and the per-receiver solvers.

mod ndim;
mod objective;
mod poly;
mod solve;
mod threshold;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ndim::solve_ndim;
pub use objective::{calf, calg, calg_cauchy, calgbar, calh, g_q, g_tilde};
pub use poly::{find_positive_roots, p1_roots, poly_p1, poly_p2, poly_p3, poly_p4, root_search_limit};
pub use solve::{solve_cauchy, solve_lambert, solve_map, solve_ml, AXIS_EPS};
pub use threshold::{threshold_cauchy, threshold_point, threshold_xi1, threshold_xi1_approx, ThresholdPoint};

/// Which branch of the piecewise optimum produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    MainFullG,
    MainTruncated,
    AxisY,
    AxisX,
}

impl Region {
    pub fn is_main(self) -> bool {
        matches!(self, Region::MainFullG | Region::MainTruncated)
    }

    pub fn label(self) -> &'static str {
        match self {
            Region::MainFullG => "main-full-G",
            Region::MainTruncated => "main-truncated",
            Region::AxisY => "axis-y",
            Region::AxisX => "axis-x",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSolution {
    pub d1: f64,
    pub d2: f64,
    /// Position on the power ellipse; `None` for axis solutions.
    pub t_star: Option<f64>,
    pub region: Region,
    /// Relative imbalance `|A − B| / (|A| + |B|)` of the stationarity
    /// equation `A = B` that was solved.
    pub kkt_residual: f64,
    /// `|Δ1²/Υ1² + Δ2²/Υ2² − 1|`.
    pub power_residual: f64,
    /// Set when a closed-form solution is used outside its SNR range.
    pub validity_warning: bool,
}

/// Positive roots of a polynomial-like sum for a grid with `n` levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub n: usize,
    pub roots: Vec<f64>,
    pub root_count: usize,
}

/// Tolerance on `kkt_residual` for a solution to count as stationary.
pub const KKT_TOLERANCE: f64 = 1e-10;

const PROBES: usize = 256;

/// Bisection of an increasing function on `(lo, hi)` down to adjacent
/// doubles. Expects `f(lo) < 0 < f(hi)`.
pub(crate) fn bisect_increasing(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Checks `f` strictly increasing over evenly spaced interior probes of
/// `(lo, hi)` and returns a bracket `(a, b)` with `f(a) < 0 ≤ f(b)`.
pub(crate) fn monotone_bracket(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, what: &str) -> Result<(f64, f64)> {
    let step = (hi - lo) / PROBES as f64;
    let probes: Vec<(f64, f64)> = (0..PROBES)
        .map(|i| {
            let t = lo + (i as f64 + 0.5) * step;
            (t, f(t))
        })
        .collect();
    for w in probes.windows(2) {
        if !(w[1].1 > w[0].1) {
            return Err(Error::NotMonotone(format!(
                "{what}: f({}) = {} then f({}) = {}",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
    }
    let first = probes[0];
    let last = probes[PROBES - 1];
    if first.1 >= 0.0 {
        return edge_bracket(f, first.0, lo, true, what);
    }
    if last.1 < 0.0 {
        return edge_bracket(f, last.0, hi, false, what);
    }
    let i = probes.iter().position(|p| p.1 >= 0.0).unwrap_or(PROBES - 1);
    Ok((probes[i - 1].0, probes[i].0))
}

/// Walks from the outermost probe `inner` toward the open endpoint `outer`
/// until the sign change is bracketed.
fn edge_bracket(
    f: &impl Fn(f64) -> f64,
    mut inner: f64,
    outer: f64,
    lower_edge: bool,
    what: &str,
) -> Result<(f64, f64)> {
    let (a, b) = (inner, outer);
    for _ in 0..200 {
        let x = 0.5 * (inner + outer);
        if x == inner || x == outer {
            break;
        }
        let fx = f(x);
        if !fx.is_finite() {
            break;
        }
        if lower_edge && fx < 0.0 {
            return Ok((x, inner));
        }
        if !lower_edge && fx >= 0.0 {
            return Ok((inner, x));
        }
        inner = x;
    }
    Err(Error::RootBracket(format!("{what}: no sign change inside ({a}, {b})")))
}
