//! Synchronous multiple-access channel with Gaussian or Cauchy noise.

use num_complex::Complex64;
use rand::distributions::Open01;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::encoder::{encode, GridSpacing};
use crate::error::{Error, Result};
use crate::model::{NoiseModel, SystemConfig};

/// Deterministic random stream addressed by `(seed, stream_id)`.
///
/// Distinct stream ids select disjoint ChaCha streams, so Monte Carlo
/// shards are reproducible regardless of scheduling.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

pub fn superimpose(points: &[Complex64]) -> Result<Complex64> {
    if points.is_empty() {
        return Err(Error::Domain("superimpose needs at least one point".into()));
    }
    Ok(points.iter().sum())
}

/// One complex noise sample.
pub fn sample_noise<R: Rng + ?Sized>(model: &NoiseModel, rng: &mut R) -> Complex64 {
    match *model {
        NoiseModel::Gaussian { sigma2 } => {
            let s = (sigma2 / 2.0).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(s * re, s * im)
        }
        NoiseModel::Cauchy { gamma } => {
            let u: f64 = rng.sample(Open01);
            let v: f64 = rng.sample(Open01);
            Complex64::new(
                gamma * (std::f64::consts::PI * (u - 0.5)).tan(),
                gamma * (std::f64::consts::PI * (v - 0.5)).tan(),
            )
        }
    }
}

/// `r = Σ_k encode(s_k) + z`.
pub fn transmit<R: Rng + ?Sized>(
    symbols: &[u64],
    sp: &GridSpacing,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<Complex64> {
    if symbols.len() != cfg.k {
        return Err(Error::DimensionMismatch { expected: cfg.k, got: symbols.len() });
    }
    let mut r = Complex64::new(0.0, 0.0);
    for &s in symbols {
        r += encode(s, sp, cfg)?;
    }
    Ok(r + sample_noise(&cfg.noise, rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn variance(xs: &[f64]) -> f64 {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
    }

    #[test]
    fn superimpose_examples() {
        let a = Complex64::new(1.0, 1.0);
        let b = Complex64::new(2.0, -1.0);
        assert_eq!(superimpose(&[a, b]).unwrap(), Complex64::new(3.0, 0.0));
        assert_eq!(superimpose(&[a]).unwrap(), a);
        assert!(superimpose(&[]).is_err());
    }

    #[test]
    fn zero_variance_is_silent() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..100 {
            assert_eq!(sample_noise(&NoiseModel::Gaussian { sigma2: 0.0 }, &mut rng), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn gaussian_component_variance() {
        let mut rng = RngStream::new(2, 0);
        let model = NoiseModel::Gaussian { sigma2: 2.0 };
        let z: Vec<Complex64> = (0..1_000_000).map(|_| sample_noise(&model, &mut rng)).collect();
        let re: Vec<f64> = z.iter().map(|c| c.re).collect();
        let im: Vec<f64> = z.iter().map(|c| c.im).collect();
        for v in [variance(&re), variance(&im)] {
            assert!((0.99..=1.01).contains(&v), "variance {v}");
        }
    }

    #[test]
    fn cauchy_median_abs_is_scale() {
        let mut rng = RngStream::new(3, 0);
        let model = NoiseModel::Cauchy { gamma: 1.0 };
        let mut a: Vec<f64> = (0..1_000_000).map(|_| sample_noise(&model, &mut rng).re.abs()).collect();
        a.sort_by(f64::total_cmp);
        let med = a[a.len() / 2];
        assert!((med - 1.0).abs() <= 0.01, "median {med}");
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, id| {
            let mut r = RngStream::new(seed, id);
            (0..8).map(|_| r.next_u64()).collect::<Vec<_>>()
        };
        assert_eq!(draw(5, 7), draw(5, 7));
        assert_ne!(draw(5, 7), draw(5, 8));
        assert_ne!(draw(5, 7), draw(6, 7));
    }

    #[test]
    fn transmit_without_noise_is_superposition() {
        let cfg = SystemConfig::new(4, 4, 2, 1.0, NoiseModel::Gaussian { sigma2: 0.0 }).unwrap();
        let sp = GridSpacing::uncentered(1.0, 1.0);
        let mut rng = RngStream::new(0, 0);
        assert_eq!(transmit(&[0, 0], &sp, &cfg, &mut rng).unwrap(), Complex64::new(0.0, 0.0));
        let sp = GridSpacing::centered(0.3, 0.7, 4, 4);
        let pts: Vec<Complex64> = [5, 10].iter().map(|&s| encode(s, &sp, &cfg).unwrap()).collect();
        assert_eq!(transmit(&[5, 10], &sp, &cfg, &mut rng).unwrap(), superimpose(&pts).unwrap());
        assert!(transmit(&[1], &sp, &cfg, &mut rng).is_err());
        assert!(transmit(&[1, 16], &sp, &cfg, &mut rng).is_err());
    }

    #[test]
    fn transmit_noise_matches_sampler() {
        // Two-sample Kolmogorov–Smirnov on the real component.
        let cfg = SystemConfig::new(4, 4, 3, 1.0, NoiseModel::Gaussian { sigma2: 0.3 }).unwrap();
        let sp = GridSpacing::centered(0.4, 0.5, 4, 4);
        let clean: Complex64 = [3u64, 9, 14].iter().map(|&s| encode(s, &sp, &cfg).unwrap()).sum();
        let draws = 100_000;
        let mut a = RngStream::new(10, 0);
        let mut b = RngStream::new(10, 1);
        let mut x: Vec<f64> =
            (0..draws).map(|_| (transmit(&[3, 9, 14], &sp, &cfg, &mut a).unwrap() - clean).re).collect();
        let mut y: Vec<f64> = (0..draws).map(|_| sample_noise(&cfg.noise, &mut b).re).collect();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0, 0, 0.0f64);
        while i < draws && j < draws {
            if x[i] <= y[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 - j as f64).abs() / draws as f64);
        }
        // 99.9% critical value for equal sample sizes.
        assert!(d < 1.95 * (2.0 / draws as f64).sqrt(), "KS statistic {d}");
    }
}
