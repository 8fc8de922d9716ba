//! The root polynomials behind the SNR thresholds and a log-grid root scan.

use super::RootReport;
use crate::analytic::UNDERFLOW;
use crate::model::coefficients;

const SCAN_POINTS: usize = 4096;
/// Ratio between the lower and upper end of the log-grid scan.
const SCAN_SPAN: f64 = 1e-9;

/// `Σ γ_m e^{−θ_m x²}(1 + 2θ_m x²)`.
pub fn poly_p1(levels: usize, x: f64) -> f64 {
    let c = coefficients(levels);
    let x2 = x * x;
    let mut acc = 0.0;
    for (&g, &t) in c.gamma.iter().zip(&c.theta) {
        let a = t * x2;
        if a > UNDERFLOW {
            break;
        }
        acc += g * (-a).exp() * (1.0 + 2.0 * a);
    }
    acc
}

/// `(1/x)·Σ γ_m e^{−θ_m x²}`.
pub fn poly_p2(levels: usize, x: f64) -> f64 {
    let c = coefficients(levels);
    let x2 = x * x;
    let mut acc = 0.0;
    for (&g, &t) in c.gamma.iter().zip(&c.theta) {
        let a = t * x2;
        if a > UNDERFLOW {
            break;
        }
        acc += g * (-a).exp();
    }
    acc / x
}

/// `Σ γ_m (1 + 3θ_m x²)/(1 + θ_m x²)²`.
pub fn poly_p3(levels: usize, x: f64) -> f64 {
    let c = coefficients(levels);
    let x2 = x * x;
    c.gamma
        .iter()
        .zip(&c.theta)
        .map(|(&g, &t)| {
            let u = 1.0 + t * x2;
            g * (1.0 + 3.0 * t * x2) / (u * u)
        })
        .sum()
}

/// `Σ γ_m/(1 + θ_m x²)²`.
pub fn poly_p4(levels: usize, x: f64) -> f64 {
    let c = coefficients(levels);
    let x2 = x * x;
    c.gamma
        .iter()
        .zip(&c.theta)
        .map(|(&g, &t)| {
            let u = 1.0 + t * x2;
            g / (u * u)
        })
        .sum()
}

/// Upper end of the `P⁽¹⁾` root scan, four times the bound `√(3.96/(2N−3))`.
pub fn root_search_limit(levels: usize) -> f64 {
    4.0 * (3.96 / (2.0 * levels as f64 - 3.0)).sqrt()
}

/// Every sign change of `f` on a log grid over `[x_max·1e−9, x_max]`,
/// refined by bisection. Returned in increasing order.
pub fn find_positive_roots(f: impl Fn(f64) -> f64, x_max: f64) -> Vec<f64> {
    scan_roots(&f, x_max * SCAN_SPAN, x_max)
}

pub(crate) fn scan_roots(f: &impl Fn(f64) -> f64, x_min: f64, x_max: f64) -> Vec<f64> {
    let (l0, l1) = (x_min.ln(), x_max.ln());
    let step = (l1 - l0) / (SCAN_POINTS - 1) as f64;
    let mut roots = Vec::new();
    let mut prev = (x_min, f(x_min));
    for i in 1..SCAN_POINTS {
        let x = if i == SCAN_POINTS - 1 { x_max } else { (l0 + step * i as f64).exp() };
        let v = f(x);
        if v == 0.0 {
            roots.push(x);
        } else if prev.1 != 0.0 && (prev.1 < 0.0) != (v < 0.0) {
            roots.push(refine(f, prev, (x, v)));
        }
        prev = (x, v);
    }
    roots
}

fn refine(f: &impl Fn(f64) -> f64, (mut a, fa): (f64, f64), (mut b, _): (f64, f64)) -> f64 {
    let neg_at_a = fa < 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) < 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Positive roots of `P⁽¹⁾` for a grid with `levels` points.
pub fn p1_roots(levels: usize) -> RootReport {
    let roots = find_positive_roots(|x| poly_p1(levels, x), root_search_limit(levels));
    RootReport { n: levels, root_count: roots.len(), roots }
}
