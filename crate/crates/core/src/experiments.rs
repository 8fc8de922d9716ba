//! Monte Carlo MSE estimation and SNR sweeps.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{mse_map, mse_ml};
use crate::channel::{sample_noise, RngStream};
use crate::decoder::{decode_map, decode_ml};
use crate::encoder::{encode, GridSpacing};
use crate::error::{Error, Result};
use crate::model::{snr_from_db, NoiseModel, SystemConfig};
use crate::optimizer::{solve_cauchy, solve_lambert, solve_map, solve_ml};

/// Trials per random stream.
const SHARD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Ml,
    Map,
}

impl DecoderKind {
    pub fn label(self) -> &'static str {
        match self {
            DecoderKind::Ml => "ML",
            DecoderKind::Map => "MAP",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Design {
    Optimal,
    EqualDistance,
    ClosedFormLambert,
}

impl Design {
    pub fn label(self) -> &'static str {
        match self {
            Design::Optimal => "optimal",
            Design::EqualDistance => "equal-distance",
            Design::ClosedFormLambert => "closed-form-lambert",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√trials`.
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

impl MseEstimate {
    /// Standard error that stays meaningful when no errors were observed.
    ///
    /// The squared error is a non-negative integer, so its variance is at
    /// least `μ − μ²` for mean `μ`; this floor is evaluated at a reference
    /// mean such as the analytic MSE.
    pub fn stderr_floor(&self, reference_mean: f64) -> f64 {
        let mu = reference_mean.max(0.0);
        self.stderr.max(((mu - mu * mu).max(0.0) / self.trials as f64).sqrt())
    }
}

/// Compensated summation.
#[derive(Debug, Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

fn run_shard(
    cfg: &SystemConfig,
    sp: &GridSpacing,
    kind: DecoderKind,
    seed: u64,
    shard: usize,
    count: usize,
) -> Result<(f64, f64)> {
    let mut rng = RngStream::new(seed, shard as u64);
    let symbols = cfg.symbols() as u64;
    let (mut s1, mut s2) = (Kahan::default(), Kahan::default());
    for _ in 0..count {
        let mut r = sample_noise(&cfg.noise, &mut rng);
        let mut truth = 0u64;
        for _ in 0..cfg.k {
            let s = rng.gen_range(0..symbols);
            truth += s;
            r += encode(s, sp, cfg)?;
        }
        let est = match kind {
            DecoderKind::Ml => decode_ml(r, sp, cfg),
            DecoderKind::Map => decode_map(r, sp, cfg)?,
        };
        let e = (est as f64 - truth as f64).powi(2);
        s1.add(e);
        s2.add(e * e);
    }
    Ok((s1.sum, s2.sum))
}

/// Monte Carlo estimate of `E[(f̂ − Σ s_k)²]` under uniform symbols.
///
/// Trials are split into fixed-size shards, each drawing from its own
/// stream of `seed`, and the shard sums are reduced in shard order, so the
/// result does not depend on the thread count.
pub fn estimate_mse(
    cfg: &SystemConfig,
    sp: &GridSpacing,
    kind: DecoderKind,
    trials: usize,
    seed: u64,
) -> Result<MseEstimate> {
    cfg.validate()?;
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    if kind == DecoderKind::Map {
        crate::decoder::map_scale(cfg)?;
    }
    let shards = trials.div_ceil(SHARD);
    let parts: Vec<(f64, f64)> = (0..shards)
        .into_par_iter()
        .map(|i| run_shard(cfg, sp, kind, seed, i, SHARD.min(trials - i * SHARD)))
        .collect::<Result<_>>()?;
    let (mut s1, mut s2) = (Kahan::default(), Kahan::default());
    for (a, b) in parts {
        s1.add(a);
        s2.add(b);
    }
    let n = trials as f64;
    let mean = s1.sum / n;
    let var = if trials > 1 { ((s2.sum - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(MseEstimate { mean, stderr: (var / n).sqrt(), trials, seed })
}

/// Spacing used by `design` for the receiver `kind`.
pub fn design_spacing(cfg: &SystemConfig, design: Design, kind: DecoderKind) -> Result<GridSpacing> {
    let sol = match (design, cfg.noise, kind) {
        (Design::EqualDistance, _, _) => return Ok(GridSpacing::equal_distance(cfg)),
        (Design::Optimal, NoiseModel::Gaussian { .. }, DecoderKind::Ml) => solve_ml(cfg)?,
        (Design::Optimal, NoiseModel::Gaussian { .. }, DecoderKind::Map) => solve_map(cfg)?,
        (Design::Optimal, NoiseModel::Cauchy { .. }, DecoderKind::Ml) => solve_cauchy(cfg)?,
        (Design::Optimal, NoiseModel::Cauchy { .. }, DecoderKind::Map) => {
            return Err(Error::Unsupported("MAP design under Cauchy noise"))
        }
        (Design::ClosedFormLambert, _, _) => solve_lambert(cfg)?,
    };
    Ok(GridSpacing::centered(sol.d1, sol.d2, cfg.q, cfg.n))
}

/// Closed-form MSE for `kind`, NaN when none exists for the noise model.
pub fn analytic_mse(cfg: &SystemConfig, sp: &GridSpacing, kind: DecoderKind) -> f64 {
    if !cfg.noise.is_gaussian() {
        return f64::NAN;
    }
    let b = match kind {
        DecoderKind::Ml => mse_ml(sp, cfg),
        DecoderKind::Map => mse_map(sp, cfg),
    };
    b.map(|b| b.total).unwrap_or(f64::NAN)
}

/// A grid of sweep cells: every SNR × design × decoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    /// Sizes, power and noise family; the noise level is set per cell.
    pub template: SystemConfig,
    pub xi_db: Vec<f64>,
    pub designs: Vec<Design>,
    pub decoders: Vec<DecoderKind>,
    pub trials: usize,
    pub seed: u64,
}

impl SweepPlan {
    /// `from, from+step, …` up to `to` inclusive.
    pub fn db_range(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
        if !(step > 0.0) || !from.is_finite() || !to.is_finite() || to < from {
            return Err(Error::InvalidConfig(format!("empty SNR range {from}..{to} step {step}")));
        }
        let count = ((to - from) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| from + step * i as f64).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub xi_db: f64,
    pub q: usize,
    pub n: usize,
    pub k: usize,
    pub design: Design,
    pub decoder: DecoderKind,
    pub d1: f64,
    pub d2: f64,
    pub mse_analytic: f64,
    pub mse_mc: MseEstimate,
    /// `ok`, or `failed: <reason>`.
    pub status: String,
}

fn run_cell(
    cfg: &SystemConfig,
    design: Design,
    kind: DecoderKind,
    trials: usize,
    seed: u64,
) -> Result<(GridSpacing, f64, MseEstimate)> {
    let sp = design_spacing(cfg, design, kind)?;
    let est = estimate_mse(cfg, &sp, kind, trials, seed)?;
    Ok((sp, analytic_mse(cfg, &sp, kind), est))
}

/// Evaluates every cell of `plan` in SNR-major order. Every cell uses
/// `plan.seed`, so designs are compared on common random numbers; a cell
/// whose solver fails is kept with status `failed`.
pub fn sweep(plan: &SweepPlan) -> Result<Vec<SweepRecord>> {
    if plan.xi_db.is_empty() || plan.designs.is_empty() || plan.decoders.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one SNR, design and decoder".into()));
    }
    if plan.trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    plan.template.validate()?;
    let mut out = Vec::with_capacity(plan.xi_db.len() * plan.designs.len() * plan.decoders.len());
    for &db in &plan.xi_db {
        let cfg = plan.template.with_snr(snr_from_db(db))?;
        for &design in &plan.designs {
            for &kind in &plan.decoders {
                let rec = match run_cell(&cfg, design, kind, plan.trials, plan.seed) {
                    Ok((sp, an, est)) => (sp.d1, sp.d2, an, est, "ok".to_string()),
                    Err(e) => {
                        let nan =
                            MseEstimate { mean: f64::NAN, stderr: f64::NAN, trials: plan.trials, seed: plan.seed };
                        (f64::NAN, f64::NAN, f64::NAN, nan, format!("failed: {e}"))
                    }
                };
                out.push(SweepRecord {
                    xi_db: db,
                    q: cfg.q,
                    n: cfg.n,
                    k: cfg.k,
                    design,
                    decoder: kind,
                    d1: rec.0,
                    d2: rec.1,
                    mse_analytic: rec.2,
                    mse_mc: rec.3,
                    status: rec.4,
                });
            }
        }
    }
    Ok(out)
}

pub const CSV_HEADER: [&str; 14] = [
    "xi_db",
    "q",
    "n",
    "K",
    "design",
    "decoder",
    "d1",
    "d2",
    "mse_analytic",
    "mse_mc",
    "mse_stderr",
    "trials",
    "seed",
    "status",
];

/// Shortest decimal that parses back to the same double.
pub fn fmt_real(x: f64) -> String {
    format!("{x:?}")
}

/// Writes `records` as CSV with [`CSV_HEADER`].
pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            fmt_real(r.xi_db),
            r.q.to_string(),
            r.n.to_string(),
            r.k.to_string(),
            r.design.label().to_string(),
            r.decoder.label().to_string(),
            fmt_real(r.d1),
            fmt_real(r.d2),
            fmt_real(r.mse_analytic),
            fmt_real(r.mse_mc.mean),
            fmt_real(r.mse_mc.stderr),
            r.mse_mc.trials.to_string(),
            r.mse_mc.seed.to_string(),
            r.status.clone(),
        ])?;
    }
    w.flush()
}
