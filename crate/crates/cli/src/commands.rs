use std::fs::File;
use std::io::{self, BufWriter, Write};

use aircomp_core::experiments::fmt_real;
use aircomp_core::optimizer::{find_positive_roots, poly_p1, poly_p2, root_search_limit, threshold_xi1_approx};
use aircomp_core::{
    analytic_mse, estimate_mse, mse_map, mse_ml, snr_to_db, solve_cauchy, solve_lambert, solve_map, solve_ml,
    sweep as run_sweep, threshold_xi1, write_csv, DecoderKind, Design, GridSpacing, MseBreakdown, SweepPlan,
    SweepRecord, SystemConfig,
};
use log::{info, warn};
use serde::Serialize;

use crate::config::{Format, Method, RunConfig};
use crate::CliError;

const DEFAULT_TRIALS: usize = 10_000;

fn sink(cfg: &RunConfig) -> Result<Box<dyn Write>, CliError> {
    Ok(match &cfg.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

fn emit<T: Serialize>(cfg: &RunConfig, header: &[&str], rows: &[Vec<String>], json: &T) -> Result<(), CliError> {
    let mut out = sink(cfg)?;
    match cfg.format() {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(header).map_err(io::Error::from)?;
            for row in rows {
                w.write_record(row).map_err(io::Error::from)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, json).map_err(io::Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Serialize)]
struct OptimizeRecord {
    method: Method,
    q: usize,
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    xi_db: f64,
    d1: f64,
    d2: f64,
    t_star: Option<f64>,
    region: &'static str,
    kkt_residual: f64,
    power_residual: f64,
    validity_warning: bool,
    mse_analytic: Option<f64>,
}

pub fn optimize(cfg: &RunConfig) -> Result<(), CliError> {
    let sys = cfg.system()?;
    let method = cfg.method.unwrap_or(if sys.noise.is_gaussian() { Method::Ml } else { Method::Cauchy });
    let sol = match method {
        Method::Ml => solve_ml(&sys),
        Method::Map => solve_map(&sys),
        Method::Lambert => solve_lambert(&sys),
        Method::Cauchy => solve_cauchy(&sys),
    }?;
    info!("{method:?} solution in region {} with t* = {:?}", sol.region.label(), sol.t_star);
    if sol.validity_warning {
        warn!("closed form used below its SNR range; prefer --method ml");
    }
    let kind = if method == Method::Map { DecoderKind::Map } else { DecoderKind::Ml };
    let sp = GridSpacing::centered(sol.d1, sol.d2, sys.q, sys.n);
    let rec = OptimizeRecord {
        method,
        q: sys.q,
        n: sys.n,
        k: sys.k,
        xi_db: snr_to_db(sys.snr())?,
        d1: sol.d1,
        d2: sol.d2,
        t_star: sol.t_star,
        region: sol.region.label(),
        kkt_residual: sol.kkt_residual,
        power_residual: sol.power_residual,
        validity_warning: sol.validity_warning,
        mse_analytic: finite(analytic_mse(&sys, &sp, kind)),
    };
    let header = [
        "method",
        "q",
        "n",
        "K",
        "xi_db",
        "d1",
        "d2",
        "t_star",
        "region",
        "kkt_residual",
        "power_residual",
        "validity_warning",
        "mse_analytic",
    ];
    let row = vec![
        format!("{method:?}").to_lowercase(),
        rec.q.to_string(),
        rec.n.to_string(),
        rec.k.to_string(),
        fmt_real(rec.xi_db),
        fmt_real(rec.d1),
        fmt_real(rec.d2),
        opt(rec.t_star),
        rec.region.to_string(),
        fmt_real(rec.kkt_residual),
        fmt_real(rec.power_residual),
        rec.validity_warning.to_string(),
        opt(rec.mse_analytic),
    ];
    emit(cfg, &header, &[row], &rec)
}

#[derive(Serialize)]
struct SweepRow<'a> {
    xi_db: f64,
    q: usize,
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    design: &'static str,
    decoder: &'static str,
    d1: f64,
    d2: f64,
    mse_analytic: f64,
    mse_mc: f64,
    mse_stderr: f64,
    trials: usize,
    seed: u64,
    status: &'a str,
}

impl<'a> From<&'a SweepRecord> for SweepRow<'a> {
    fn from(r: &'a SweepRecord) -> Self {
        SweepRow {
            xi_db: r.xi_db,
            q: r.q,
            n: r.n,
            k: r.k,
            design: r.design.label(),
            decoder: r.decoder.label(),
            d1: r.d1,
            d2: r.d2,
            mse_analytic: r.mse_analytic,
            mse_mc: r.mse_mc.mean,
            mse_stderr: r.mse_mc.stderr,
            trials: r.mse_mc.trials,
            seed: r.mse_mc.seed,
            status: &r.status,
        }
    }
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let template = cfg.template()?;
    let from = cfg.snr_db_from.ok_or_else(|| CliError::Usage("missing required value: --snr-db-from".into()))?;
    let to = cfg.snr_db_to.ok_or_else(|| CliError::Usage("missing required value: --snr-db-to".into()))?;
    let xi_db =
        SweepPlan::db_range(from, to, cfg.snr_db_step.unwrap_or(1.0)).map_err(|e| CliError::Usage(e.to_string()))?;
    let designs = cfg.designs.clone().unwrap_or_else(|| vec![Design::Optimal, Design::EqualDistance]);
    let decoders = cfg.decoders.clone().unwrap_or_else(|| vec![DecoderKind::Ml]);
    let trials = cfg.trials.unwrap_or(DEFAULT_TRIALS);
    if designs.is_empty() || decoders.is_empty() || trials == 0 {
        return Err(CliError::Usage("sweep needs at least one design, one decoder and one trial".into()));
    }
    let plan = SweepPlan { template, xi_db, designs, decoders, trials, seed: cfg.seed()? };
    info!("sweeping {} SNR points, {} trials per cell, seed {}", plan.xi_db.len(), plan.trials, plan.seed);
    let records = run_sweep(&plan)?;
    for r in records.iter().filter(|r| r.status != "ok") {
        warn!("{} dB {} {}: {}", r.xi_db, r.design.label(), r.decoder.label(), r.status);
    }
    let mut out = sink(cfg)?;
    match cfg.format() {
        Format::Csv => write_csv(&records, &mut out)?,
        Format::Json => {
            let rows: Vec<SweepRow> = records.iter().map(SweepRow::from).collect();
            serde_json::to_writer_pretty(&mut out, &rows).map_err(io::Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct LevelRoots {
    axis: &'static str,
    #[serde(rename = "N")]
    levels: usize,
    p1_roots: Vec<f64>,
    p2_roots: Vec<f64>,
}

#[derive(Serialize)]
struct RootsRecord {
    levels: Vec<LevelRoots>,
    xi1: Option<f64>,
    xi1_approx: Option<f64>,
}

fn level_roots(axis: &'static str, levels: usize) -> Result<LevelRoots, CliError> {
    if levels < 2 {
        return Err(CliError::Usage(format!("--N must be at least 2, got {levels}")));
    }
    let limit = root_search_limit(levels);
    Ok(LevelRoots {
        axis,
        levels,
        p1_roots: find_positive_roots(|x| poly_p1(levels, x), limit),
        p2_roots: find_positive_roots(|x| poly_p2(levels, x), limit),
    })
}

fn root_list(roots: &[f64]) -> String {
    if roots.is_empty() {
        "no positive roots".into()
    } else {
        roots.iter().map(|&r| fmt_real(r)).collect::<Vec<_>>().join(";")
    }
}

pub fn roots(cfg: &RunConfig) -> Result<(), CliError> {
    let rec = match (cfg.levels, cfg.q.or(cfg.n).or(cfg.k)) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --N or --q/--n/--K, not both".into())),
        (Some(levels), None) => RootsRecord { levels: vec![level_roots("", levels)?], xi1: None, xi1_approx: None },
        (None, _) => {
            let (q, n, k) = cfg.sizes().map_err(|_| CliError::Usage("give --N, or --q, --n and --K".into()))?;
            let grid = SystemConfig::gaussian(q, n, k, 1.0)
                .and_then(|s| s.grid())
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let mut levels = vec![level_roots("in-phase", grid.n1)?];
            if grid.n2 != grid.n1 {
                levels.push(level_roots("quadrature", grid.n2)?);
            }
            let xi1 = match threshold_xi1(&grid) {
                Ok(x) => Some(x),
                Err(e) => {
                    info!("{e}");
                    None
                }
            };
            RootsRecord { levels, xi1, xi1_approx: Some(threshold_xi1_approx(&grid)) }
        }
    };
    let header = ["axis", "N", "p1_roots", "p2_roots", "xi1", "xi1_approx"];
    let rows: Vec<Vec<String>> = rec
        .levels
        .iter()
        .map(|l| {
            vec![
                l.axis.to_string(),
                l.levels.to_string(),
                root_list(&l.p1_roots),
                root_list(&l.p2_roots),
                opt(rec.xi1),
                opt(rec.xi1_approx),
            ]
        })
        .collect();
    emit(cfg, &header, &rows, &rec)
}

#[derive(Serialize)]
struct EvaluateRecord {
    decoder: &'static str,
    q: usize,
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    xi_db: f64,
    d1: f64,
    d2: f64,
    real_term: Option<f64>,
    imag_term: Option<f64>,
    total: Option<f64>,
    error_bound: Option<f64>,
    mse_mc: Option<f64>,
    mse_stderr: Option<f64>,
    trials: Option<usize>,
    seed: Option<u64>,
}

pub fn evaluate(cfg: &RunConfig) -> Result<(), CliError> {
    let sys = cfg.system()?;
    let d1 = cfg.d1.ok_or_else(|| CliError::Usage("missing required value: --d1".into()))?;
    let d2 = cfg.d2.ok_or_else(|| CliError::Usage("missing required value: --d2".into()))?;
    if !(d1 > 0.0 && d2 >= 0.0 && d1.is_finite() && d2.is_finite()) {
        return Err(CliError::Usage(format!("spacings need d1 > 0 and d2 >= 0, got {d1}, {d2}")));
    }
    let kind = cfg.decoder.unwrap_or(DecoderKind::Ml);
    let sp = GridSpacing::centered(d1, d2, sys.q, sys.n);
    let analytic: Option<MseBreakdown> = if sys.noise.is_gaussian() {
        Some(match kind {
            DecoderKind::Ml => mse_ml(&sp, &sys)?,
            DecoderKind::Map => mse_map(&sp, &sys)?,
        })
    } else {
        info!("no closed-form MSE under Cauchy noise");
        None
    };
    let mc = match cfg.mc_trials {
        Some(0) => return Err(CliError::Usage("--mc-trials must be at least 1".into())),
        Some(trials) => Some(estimate_mse(&sys, &sp, kind, trials, cfg.seed()?)?),
        None => None,
    };
    let rec = EvaluateRecord {
        decoder: kind.label(),
        q: sys.q,
        n: sys.n,
        k: sys.k,
        xi_db: snr_to_db(sys.snr())?,
        d1,
        d2,
        real_term: analytic.map(|b| b.real_term),
        imag_term: analytic.map(|b| b.imag_term),
        total: analytic.map(|b| b.total),
        error_bound: analytic.and_then(|b| b.error_bound),
        mse_mc: mc.map(|m| m.mean),
        mse_stderr: mc.map(|m| m.stderr),
        trials: mc.map(|m| m.trials),
        seed: mc.map(|m| m.seed),
    };
    let mut header = vec!["decoder", "q", "n", "K", "xi_db", "d1", "d2", "real_term", "imag_term", "total"];
    let mut row = vec![
        rec.decoder.to_string(),
        rec.q.to_string(),
        rec.n.to_string(),
        rec.k.to_string(),
        fmt_real(rec.xi_db),
        fmt_real(d1),
        fmt_real(d2),
        opt(rec.real_term),
        opt(rec.imag_term),
        opt(rec.total),
    ];
    if kind == DecoderKind::Map {
        header.push("error_bound");
        row.push(opt(rec.error_bound));
    }
    header.extend(["mse_mc", "mse_stderr", "trials", "seed"]);
    row.extend([
        opt(rec.mse_mc),
        opt(rec.mse_stderr),
        rec.trials.map(|t| t.to_string()).unwrap_or_default(),
        rec.seed.map(|s| s.to_string()).unwrap_or_default(),
    ]);
    emit(cfg, &header, &[row], &rec)
}
