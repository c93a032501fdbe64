//! Seeded sampling of `ln Y_n` and goodness-of-fit checks against the
//! analytic product distribution.
//!
//! Replication `i` draws from its own ChaCha20 stream (`seed`, stream `i`),
//! so results do not depend on how replications are spread over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Error, Result};
use crate::exact::Precision;
use crate::products::{log_cdf, ProductModel};

/// Name of the generator behind [`sample_products`].
pub const RNG_NAME: &str = "chacha20-stream-per-replication/v1";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McConfig {
    pub a: f64,
    pub n: u32,
    pub replications: usize,
    pub seed: u64,
}

impl McConfig {
    pub fn new(a: f64, n: u32, replications: usize, seed: u64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return invalid("A must be positive and finite");
        }
        if n < 1 || replications < 1 {
            return invalid("need n >= 1 and at least one replication");
        }
        Ok(McConfig {
            a,
            n,
            replications,
            seed,
        })
    }

    pub fn rng_name(&self) -> &'static str {
        RNG_NAME
    }
}

fn replication_rng(seed: u64, index: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

// uniform on (0, 1]: draw from [0, 1) and reject 0
fn open_unit(rng: &mut ChaCha20Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// `r` samples of `ln Y_n = sum ln U_i` with `U_i` uniform on `(0, A]`.
pub fn sample_products(cfg: &McConfig) -> Vec<f64> {
    let ln_a = cfg.a.ln();
    (0..cfg.replications)
        .into_par_iter()
        .map(|i| {
            let mut rng = replication_rng(cfg.seed, i);
            let mut s = 0.0;
            for _ in 0..cfg.n {
                s += open_unit(&mut rng).ln() + ln_a;
            }
            s
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data (`(n-1) p` positions).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(samples: &[f64]) -> Result<Summary> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    Ok(Summary {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        mean,
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

/// `sup |F_emp - F|` over the sample.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((i + 1) as f64 / r - f).max(f - i as f64 / r);
    }
    Ok(d)
}

/// Asymptotic 1% critical value of the one-sample KS distance.
pub fn ks_critical_1pct(r: usize) -> f64 {
    1.63 / (r as f64).sqrt()
}

/// `G_n` as an f64 function of `ln Y_n`.
pub fn log_cdf_fn(a: f64, n: u32, prec: Precision) -> Result<impl Fn(f64) -> f64> {
    let model = ProductModel::with_f64(a, n, prec)?;
    Ok(move |y: f64| log_cdf(&model, &prec.real(y)).to_f64())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub density: f64,
}

/// Equal-width bins over `[lo, hi)`; samples outside are not counted.
pub fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Vec<HistogramBin>> {
    if bins == 0 || !(hi > lo) {
        return invalid("need at least one bin and hi > lo");
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &x in samples {
        if x >= lo && x < hi {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
    }
    let total = samples.len().max(1) as f64;
    Ok(counts
        .iter()
        .enumerate()
        .map(|(k, &count)| HistogramBin {
            lo: lo + k as f64 * width,
            hi: lo + (k + 1) as f64 * width,
            count,
            density: count as f64 / (total * width),
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson chi-square of standardized samples `(ln Y_n - n(ln A - 1))/sqrt n`
/// against the exact law, on `bins` equal-width cells over `[-4, 4]` whose
/// outer cells absorb the tails.
pub fn chi_square_standardized(
    cfg: &McConfig,
    samples: &[f64],
    bins: usize,
    prec: Precision,
) -> Result<ChiSquareResult> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if bins < 2 {
        return invalid("need at least two bins");
    }
    let n = cfg.n as f64;
    let centre = n * (cfg.a.ln() - 1.0);
    let scale = n.sqrt();
    let g = log_cdf_fn(cfg.a, cfg.n, prec)?;
    let width = 8.0 / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| -4.0 + k as f64 * width).collect();
    let mut probs = Vec::with_capacity(bins);
    for k in 0..bins {
        let lo = if k == 0 { 0.0 } else { g(centre + edges[k] * scale) };
        let hi = if k == bins - 1 { 1.0 } else { g(centre + edges[k + 1] * scale) };
        probs.push(hi - lo);
    }
    let mut counts = vec![0u64; bins];
    for &y in samples {
        let z = (y - centre) / scale;
        let k = ((z + 4.0) / width).floor();
        let k = if k < 0.0 { 0 } else { (k as usize).min(bins - 1) };
        counts[k] += 1;
    }
    let r = samples.len() as f64;
    let statistic: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&o, &p)| {
            let e = r * p;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let df = bins - 1;
    let dist = ChiSquared::new(df as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(ChiSquareResult {
        statistic,
        degrees_of_freedom: df,
        p_value: 1.0 - dist.cdf(statistic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(McConfig::new(0.0, 3, 10, 1).is_err());
        assert!(McConfig::new(2.0, 0, 10, 1).is_err());
        assert!(McConfig::new(2.0, 3, 0, 1).is_err());
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let cfg = McConfig::new(2.0, 30, 2000, 42).unwrap();
        let a = sample_products(&cfg);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = one.install(|| sample_products(&cfg));
        let c = three.install(|| sample_products(&cfg));
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!(a.iter().all(|x| x.is_finite()));
        let other = sample_products(&McConfig::new(2.0, 30, 2000, 43).unwrap());
        assert_ne!(a, other);
    }

    #[test]
    fn summaries() {
        let s = summarize(&[3.5; 7]).unwrap();
        assert_eq!(
            s,
            Summary {
                min: 3.5,
                q1: 3.5,
                median: 3.5,
                mean: 3.5,
                q3: 3.5,
                max: 3.5
            }
        );
        let s = summarize(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert_eq!(s.q1, 1.75);
        assert_eq!(s.q3, 3.25);
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn ks_basics() {
        let d = ks_distance(&[0.5], |x| x).unwrap();
        assert_eq!(d, 0.5);
        let cfg = McConfig::new(3.0, 1, 20_000, 7).unwrap();
        let ys = sample_products(&cfg);
        let d = ks_distance(&ys, |y| (y.exp() / 3.0).min(1.0)).unwrap();
        assert!(d <= ks_critical_1pct(ys.len()));
        // wrong A
        let d = ks_distance(&ys, |y| (y.exp() / 6.0).min(1.0)).unwrap();
        assert!(d > 0.3);
        assert!(ks_distance(&[], |x| x).is_err());
    }

    #[test]
    fn chi_square_on_standardized_bins() {
        let cfg = McConfig::new(2.0, 120, 100_000, 11).unwrap();
        let ys = sample_products(&cfg);
        let c = chi_square_standardized(&cfg, &ys, 40, Precision::default()).unwrap();
        assert_eq!(c.degrees_of_freedom, 39);
        assert!(c.p_value > 0.001, "{c:?}");
        // the wrong bound is rejected outright
        let off = McConfig::new(2.2, 120, 100_000, 11).unwrap();
        let c = chi_square_standardized(&off, &ys, 40, Precision::default()).unwrap();
        assert!(c.p_value < 1e-6);
    }

    #[test]
    fn product_below_one() {
        let cfg = McConfig::new(2.0, 24, 100_000, 5).unwrap();
        let ys = sample_products(&cfg);
        let hits = ys.iter().filter(|&&y| y <= 0.0).count() as f64;
        let r = ys.len() as f64;
        let model = ProductModel::with_f64(2.0, 24, Precision::default()).unwrap();
        let p = crate::products::product_cdf(&model, &Precision::default().real(1)).to_f64();
        assert!((hits / r - p).abs() <= 3.0 * (p * (1.0 - p) / r).sqrt());
    }

    #[test]
    fn large_replay_centre() {
        let cfg = McConfig::new(std::f64::consts::E, 500, 50_000, 1).unwrap();
        let s = summarize(&sample_products(&cfg)).unwrap();
        assert!(s.median.abs() <= 0.5);
        assert!((s.mean - 0.054).abs() <= 0.35);
        assert!(s.min < -60.0 && s.max > 60.0);
    }

    #[test]
    fn histogram_bins() {
        let h = histogram(&[0.1, 0.2, 0.9, 1.5, -1.0], 0.0, 1.0, 2).unwrap();
        assert_eq!(h[0].count, 2);
        assert_eq!(h[1].count, 1);
        assert!(histogram(&[1.0], 1.0, 1.0, 3).is_err());
    }
}
