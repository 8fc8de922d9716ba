//! Solvers for the optimal `(d1, d2)` under ML, MAP and Cauchy noise, and
//! the high-SNR closed form.

use super::objective::{relative_imbalance, Stationarity};
use super::threshold::{threshold_cauchy, threshold_xi1};
use super::{bisect_increasing, monotone_bracket, OptimizerSolution, Region};
use crate::analytic::mse_ml;
use crate::decoder::map_scale;
use crate::encoder::GridSpacing;
use crate::error::{Error, Result};
use crate::model::{DerivedGrid, NoiseModel, SystemConfig};

/// Relative offset from the ellipse axis used for axis solutions.
pub const AXIS_EPS: f64 = 1e-9;

fn gaussian_scale(cfg: &SystemConfig) -> Result<f64> {
    cfg.validate()?;
    match cfg.noise {
        NoiseModel::Gaussian { sigma2 } => Ok(sigma2.sqrt()),
        NoiseModel::Cauchy { .. } => Err(Error::Unsupported("this solver needs Gaussian noise")),
    }
}

fn power_residual(d1: f64, d2: f64, scale: f64, grid: &DerivedGrid) -> f64 {
    let a = d1 / (scale * grid.upsilon1);
    let b = d2 / (scale * grid.upsilon2);
    (a * a + b * b - 1.0).abs()
}

fn on_ellipse(t: f64, scale: f64, grid: &DerivedGrid) -> (f64, f64) {
    (scale * grid.upsilon1 * (0.5 - t).sqrt(), scale * grid.upsilon2 * (0.5 + t).sqrt())
}

fn interior(
    stat: &Stationarity,
    region: Region,
    scale: f64,
    grid: &DerivedGrid,
    what: &str,
) -> Result<OptimizerSolution> {
    let f = |t: f64| stat.log_balance(t);
    let (a, b) = monotone_bracket(&f, -0.5, 0.5, what)?;
    let t = bisect_increasing(f, a, b);
    let (d1, d2) = on_ellipse(t, scale, grid);
    Ok(OptimizerSolution {
        d1,
        d2,
        t_star: Some(t),
        region,
        kkt_residual: relative_imbalance(f(t)),
        power_residual: power_residual(d1, d2, scale, grid),
        validity_warning: false,
    })
}

fn axis(region: Region, scale: f64, grid: &DerivedGrid, stat: &Stationarity) -> OptimizerSolution {
    let far = (1.0 - AXIS_EPS * AXIS_EPS).sqrt();
    let (d1, d2) = match region {
        Region::AxisX => (scale * grid.upsilon1 * far, scale * grid.upsilon2 * AXIS_EPS),
        _ => (scale * grid.upsilon1 * AXIS_EPS, scale * grid.upsilon2 * far),
    };
    OptimizerSolution {
        d1,
        d2,
        t_star: None,
        region,
        kkt_residual: relative_imbalance(stat.log_balance_xy(d1 / scale, d2 / scale)),
        power_residual: power_residual(d1, d2, scale, grid),
        validity_warning: false,
    }
}

/// Below the threshold: the better of the two ellipse endpoints.
fn axis_ml(cfg: &SystemConfig, sigma: f64, grid: &DerivedGrid) -> Result<OptimizerSolution> {
    let stat = Stationarity::ml_full(grid);
    let y = axis(Region::AxisY, sigma, grid, &stat);
    let x = axis(Region::AxisX, sigma, grid, &stat);
    let mse = |s: &OptimizerSolution| mse_ml(&GridSpacing::centered(s.d1, s.d2, cfg.q, cfg.n), cfg).map(|b| b.total);
    Ok(if mse(&x)? < mse(&y)? { x } else { y })
}

/// MSE-optimal spacings for the ML receiver under Gaussian noise.
pub fn solve_ml(cfg: &SystemConfig) -> Result<OptimizerSolution> {
    let sigma = gaussian_scale(cfg)?;
    let grid = cfg.grid()?;
    if grid.n1 <= 8 && grid.n2 <= 8 {
        return interior(&Stationarity::ml_full(&grid), Region::MainFullG, sigma, &grid, "ML full sum");
    }
    match threshold_xi1(&grid) {
        Ok(xi1) if grid.snr < xi1 => axis_ml(cfg, sigma, &grid),
        Ok(_) | Err(Error::NoThreshold { .. }) => {
            interior(&Stationarity::ml_truncated(&grid), Region::MainTruncated, sigma, &grid, "ML truncated sum")
        }
        Err(e) => Err(e),
    }
}

/// MSE-optimal spacings for the MAP receiver under Gaussian noise.
pub fn solve_map(cfg: &SystemConfig) -> Result<OptimizerSolution> {
    let sigma = gaussian_scale(cfg)?;
    let grid = cfg.grid()?;
    let eta = map_scale(cfg)?;
    interior(&Stationarity::map(&grid, eta), Region::MainFullG, sigma, &grid, "MAP sum")
}

/// High-SNR closed form from the first terms of the ML sums.
///
/// Solves `κ̃² = ((0.5+t)/(0.5−t))·e^{(Υ1²+Υ2²)t/2}` in log form. The
/// warning flag is set when `ξ < max(q²/(0.5−t), n²/(0.5+t))/10`.
pub fn solve_lambert(cfg: &SystemConfig) -> Result<OptimizerSolution> {
    let sigma = gaussian_scale(cfg)?;
    let grid = cfg.grid()?;
    let (u1, u2) = (grid.upsilon1.powi(2), grid.upsilon2.powi(2));
    let (n1, n2) = (grid.n1 as f64, grid.n2 as f64);
    let log_kt = (u1 - u2) / 8.0 + (grid.kappa * grid.qsq()).ln() + (n1 * n2 - n1).ln() - (n1 * n2 - n2).ln();
    let f = |t: f64| (0.5 + t).ln() - (0.5 - t).ln() + (u1 + u2) * t / 2.0 - 2.0 * log_kt;
    let (a, b) = monotone_bracket(&f, -0.5, 0.5, "closed form")?;
    let t = bisect_increasing(f, a, b);
    let (d1, d2) = on_ellipse(t, sigma, &grid);
    let needed = (grid.qsq() / (0.5 - t)).max((grid.n * grid.n) as f64 / (0.5 + t)) / 10.0;
    Ok(OptimizerSolution {
        d1,
        d2,
        t_star: Some(t),
        region: Region::MainFullG,
        kkt_residual: relative_imbalance(f(t) / 2.0),
        power_residual: power_residual(d1, d2, sigma, &grid),
        validity_warning: grid.snr < needed,
    })
}

/// ML spacings under Cauchy noise, with `γ` in place of `σ`.
pub fn solve_cauchy(cfg: &SystemConfig) -> Result<OptimizerSolution> {
    cfg.validate()?;
    let gamma = match cfg.noise {
        NoiseModel::Cauchy { gamma } => gamma,
        NoiseModel::Gaussian { .. } => return Err(Error::Unsupported("solve_cauchy needs Cauchy noise")),
    };
    let grid = cfg.grid()?;
    if grid.n1 <= 8 && grid.n2 <= 8 {
        return interior(&Stationarity::cauchy_full(&grid), Region::MainFullG, gamma, &grid, "Cauchy full sum");
    }
    let stat = Stationarity::cauchy_truncated(&grid);
    match threshold_cauchy(&grid) {
        Ok(p) if grid.snr < p.xi => Ok(axis(Region::AxisY, gamma, &grid, &stat)),
        Ok(_) | Err(Error::NoThreshold { .. }) => {
            interior(&stat, Region::MainTruncated, gamma, &grid, "Cauchy truncated sum")
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::mse_map;
    use crate::model::snr_from_db;
    use crate::optimizer::KKT_TOLERANCE;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn gauss(q: usize, n: usize, k: usize, db: f64) -> SystemConfig {
        SystemConfig::gaussian(q, n, k, snr_from_db(db)).unwrap()
    }

    fn ml_total(cfg: &SystemConfig, d1: f64, d2: f64) -> f64 {
        mse_ml(&GridSpacing::centered(d1, d2, cfg.q, cfg.n), cfg).unwrap().total
    }

    /// Minimizer of `mse` over `points` evenly spaced values of `t`.
    fn ellipse_argmin(cfg: &SystemConfig, points: usize, mse: impl Fn(f64, f64) -> f64) -> (f64, f64) {
        let g = cfg.grid().unwrap();
        let s = cfg.noise_scale();
        let step = 1.0 / (points - 1) as f64;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..points {
            let t = -0.5 + i as f64 * step;
            let (d1, d2) = on_ellipse(t, s, &g);
            let v = mse(d1, d2);
            if v < best.0 {
                best = (v, t);
            }
        }
        (best.1, step)
    }

    #[test]
    fn ml_beats_equal_distance() {
        let cfg = gauss(4, 4, 10, 20.0);
        let sol = solve_ml(&cfg).unwrap();
        assert_eq!(sol.region, Region::MainTruncated);
        assert!(sol.kkt_residual <= KKT_TOLERANCE && sol.power_residual <= 1e-12);
        let eq = GridSpacing::equal_distance(&cfg);
        assert!(ml_total(&cfg, sol.d1, sol.d2) < ml_total(&cfg, eq.d1, eq.d2));
    }

    #[test]
    fn ml_matches_ellipse_grid() {
        for (q, n, k, db) in [(4, 4, 2, 8.0), (3, 5, 2, 12.0), (4, 4, 10, 20.0), (6, 4, 20, 15.0)] {
            let cfg = gauss(q, n, k, db);
            let sol = solve_ml(&cfg).unwrap();
            let (t, step) = ellipse_argmin(&cfg, 100_001, |a, b| ml_total(&cfg, a, b));
            assert!((sol.t_star.unwrap() - t).abs() <= step, "{q} {n} {k} {db}: {} vs {t}", sol.t_star.unwrap());
        }
    }

    #[test]
    fn ml_ratio_rises_toward_one() {
        let ratios: Vec<f64> = (15..=30)
            .map(|db| {
                let s = solve_ml(&gauss(4, 4, 2, db as f64)).unwrap();
                s.d1 / s.d2
            })
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] > w[0]));
        assert!(ratios.iter().all(|&r| r < 1.0));
    }

    #[test]
    fn ml_below_threshold_is_axis() {
        let cfg = gauss(4, 4, 10, -20.0);
        let sol = solve_ml(&cfg).unwrap();
        assert!(!sol.region.is_main());
        assert!(sol.t_star.is_none());
        assert!(sol.power_residual <= 1e-12);
        assert!(sol.kkt_residual > KKT_TOLERANCE);
    }

    #[test]
    fn ml_rejects_cauchy() {
        assert!(solve_ml(&SystemConfig::cauchy(4, 4, 2, 10.0).unwrap()).is_err());
        assert!(solve_cauchy(&gauss(4, 4, 2, 10.0)).is_err());
    }

    #[test]
    fn map_matches_ellipse_grid() {
        let cfg = gauss(4, 4, 10, 10.0);
        let sol = solve_map(&cfg).unwrap();
        let map = |a: f64, b: f64| mse_map(&GridSpacing::centered(a, b, 4, 4), &cfg).unwrap().total;
        let (t, step) = ellipse_argmin(&cfg, 100_001, map);
        assert!((sol.t_star.unwrap() - t).abs() <= step);
    }

    #[test]
    fn map_meets_ml_at_high_snr() {
        let cfg = gauss(4, 4, 10, 40.0);
        let (a, b) = (solve_map(&cfg).unwrap(), solve_ml(&cfg).unwrap());
        assert_relative_eq!(a.d1, b.d1, max_relative = 1e-3);
        assert_relative_eq!(a.d2, b.d2, max_relative = 1e-3);
    }

    #[test]
    fn map_meets_ml_for_many_nodes() {
        let cfg = gauss(4, 4, 10_000, 10.0);
        let (a, b) = (solve_map(&cfg).unwrap(), solve_ml(&cfg).unwrap());
        assert_relative_eq!(a.d1, b.d1, max_relative = 1e-2);
        assert_relative_eq!(a.d2, b.d2, max_relative = 1e-2);
    }

    #[test]
    fn lambert_tracks_ml_at_high_snr() {
        let cfg = gauss(4, 4, 2, 30.0);
        let cf = solve_lambert(&cfg).unwrap();
        let ml = solve_ml(&cfg).unwrap();
        assert!((cf.d1 / ml.d1 - 1.0).abs() <= 0.01);
        assert!(!cf.validity_warning);
        assert!(cf.power_residual <= 1e-12);
        assert!(solve_lambert(&gauss(4, 4, 2, -10.0)).unwrap().validity_warning);
    }

    #[test]
    fn lambert_sign_of_offset() {
        // t* > 0 exactly when the closed-form constant exceeds one.
        for (q, n, k, db) in [(4, 4, 2, 20.0), (6, 2, 3, 25.0), (2, 6, 3, 25.0)] {
            let cfg = gauss(q, n, k, db);
            let g = cfg.grid().unwrap();
            let (n1, n2) = (g.n1 as f64, g.n2 as f64);
            let kt = ((g.upsilon1.powi(2) - g.upsilon2.powi(2)) / 8.0).exp() * g.kappa * g.qsq() * (n1 * n2 - n1)
                / (n1 * n2 - n2);
            assert_eq!(solve_lambert(&cfg).unwrap().t_star.unwrap() > 0.0, kt > 1.0);
        }
    }

    #[test]
    fn cauchy_residual_and_orientation() {
        let cfg = SystemConfig::cauchy(4, 4, 5, snr_from_db(25.0)).unwrap();
        let sol = solve_cauchy(&cfg).unwrap();
        assert!(sol.region.is_main());
        assert!(sol.kkt_residual <= KKT_TOLERANCE);
        assert!(sol.t_star.unwrap() > 0.0);
        let small = SystemConfig::cauchy(4, 4, 2, snr_from_db(25.0)).unwrap();
        let sol = solve_cauchy(&small).unwrap();
        assert_eq!(sol.region, Region::MainFullG);
        let g = small.grid().unwrap();
        assert!(crate::optimizer::calg_cauchy(sol.t_star.unwrap(), &g).unwrap().abs() <= 1e-10);
    }

    /// Bordered-Hessian sign on the constraint ellipse, from central
    /// differences of `g_q`.
    fn bordered_hessian(x: f64, y: f64, g: &DerivedGrid) -> f64 {
        use crate::optimizer::g_q;
        let h = 1e-6;
        let gx = (g_q(x + h, y, g) - g_q(x - h, y, g)) / (2.0 * h);
        let gy = (g_q(x, y + h, g) - g_q(x, y - h, g)) / (2.0 * h);
        -(4.0 * x * y / (2.0 * std::f64::consts::PI).sqrt()) * (x * gy + y * gx)
    }

    #[test]
    fn solution_is_bordered_hessian_minimum() {
        for (q, n, k, db) in [(4, 4, 2, 10.0), (4, 6, 3, 15.0)] {
            let cfg = gauss(q, n, k, db);
            let g = cfg.grid().unwrap();
            let s = solve_ml(&cfg).unwrap();
            let sigma = cfg.noise_scale();
            assert!(bordered_hessian(s.d1 / sigma, s.d2 / sigma, &g) > 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn ml_kkt_directional_derivative(q in 2usize..7, n in 2usize..7, k in 2usize..8, db in 8.0f64..25.0) {
            let cfg = gauss(q, n, k, db);
            let sol = solve_ml(&cfg).unwrap();
            prop_assume!(sol.region.is_main());
            let g = cfg.grid().unwrap();
            let s = cfg.noise_scale();
            let t = sol.t_star.unwrap();
            let h = 1e-5 * (0.5 - t.abs());
            let along = |t: f64| {
                let (a, b) = on_ellipse(t, s, &g);
                ml_total(&cfg, a, b)
            };
            let deriv = (along(t + h) - along(t - h)) / (2.0 * h);
            let scale = along(t).max(1e-300);
            prop_assert!((deriv / scale).abs() <= 1e-6 || deriv.abs() <= 1e-12, "deriv {deriv} at {t}");
            prop_assert!(sol.power_residual <= 1e-12);
        }
    }
}
