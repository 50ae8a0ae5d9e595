//! Random completely multiplicative functions and Monte Carlo moments.
//!
//! A sample draws one value per prime `p ≤ N` and extends it with
//! `X(n) = X(spf(n)) · X(n / spf(n))`. Sample `i` uses its own ChaCha8 stream:
//! the generator is seeded from the master seed and then switched to stream
//! `i`, so any sample can be regenerated alone and results do not depend on
//! how the work is scheduled. Per-sample contributions are collected in index
//! order and reduced sequentially, which keeps estimates bitwise identical for
//! any worker count.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::sieve::FactorSieve;

/// Seed used when the caller does not provide one.
pub const DEFAULT_SEED: u64 = 20_150_223;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// `z(p)` uniform on the unit circle; every `n ≤ N` is summed.
    Steinhaus,
    /// `ε(p) = ±1` with probability ½; only squarefree `n` are summed.
    Rademacher,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SamplerConfig {
    pub model: Model,
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
    pub workers: usize,
}

impl SamplerConfig {
    pub fn steinhaus(n: usize, seed: u64, samples: usize) -> Self {
        Self {
            model: Model::Steinhaus,
            n,
            seed,
            samples,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_model(mut self, model: Model) -> Self {
        self.model = model;
        self
    }
}

/// Values of one realisation on `[1, N]` (index 0 unused).
#[derive(Debug, Clone, PartialEq)]
pub enum ChaosSample {
    Steinhaus(Vec<Complex64>),
    Rademacher(Vec<i8>),
}

impl ChaosSample {
    pub fn model(&self) -> Model {
        match self {
            ChaosSample::Steinhaus(_) => Model::Steinhaus,
            ChaosSample::Rademacher(_) => Model::Rademacher,
        }
    }

    /// `X(n)` as a complex number.
    pub fn value(&self, n: usize) -> Complex64 {
        match self {
            ChaosSample::Steinhaus(v) => v[n],
            ChaosSample::Rademacher(v) => Complex64::new(f64::from(v[n]), 0.0),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ChaosSample::Steinhaus(v) => v.len() - 1,
            ChaosSample::Rademacher(v) => v.len() - 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn fill_steinhaus(sieve: &FactorSieve, n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Complex64>) {
    out.clear();
    out.resize(n + 1, Complex64::new(0.0, 0.0));
    if n >= 1 {
        out[1] = Complex64::new(1.0, 0.0);
    }
    for m in 2..=n {
        let p = sieve.spf(m) as usize;
        out[m] = if p == m {
            let theta = rng.random::<f64>() * TAU;
            Complex64::new(theta.cos(), theta.sin())
        } else {
            out[p] * out[m / p]
        };
    }
}

fn fill_rademacher(sieve: &FactorSieve, n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<i8>) {
    out.clear();
    out.resize(n + 1, 0);
    if n >= 1 {
        out[1] = 1;
    }
    for m in 2..=n {
        let p = sieve.spf(m) as usize;
        out[m] = if p == m {
            if rng.random::<bool>() {
                1
            } else {
                -1
            }
        } else {
            out[p] * out[m / p]
        };
    }
}

fn check_config(cfg: &SamplerConfig, sieve: &FactorSieve) -> Result<()> {
    if cfg.n == 0 {
        return Err(LabError::Domain("chaos needs N ≥ 1".into()));
    }
    if cfg.n > sieve.limit() {
        return Err(LabError::Capacity(format!(
            "N = {} exceeds the sieve limit {}",
            cfg.n,
            sieve.limit()
        )));
    }
    Ok(())
}

/// Draws realisation `index` of the configured model.
pub fn draw_sample(cfg: &SamplerConfig, sieve: &FactorSieve, index: u64) -> Result<ChaosSample> {
    check_config(cfg, sieve)?;
    let mut rng = stream_rng(cfg.seed, index);
    Ok(match cfg.model {
        Model::Steinhaus => {
            let mut v = Vec::new();
            fill_steinhaus(sieve, cfg.n, &mut rng, &mut v);
            ChaosSample::Steinhaus(v)
        }
        Model::Rademacher => {
            let mut v = Vec::new();
            fill_rademacher(sieve, cfg.n, &mut rng, &mut v);
            ChaosSample::Rademacher(v)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub q: f64,
    /// Sample mean of `|C|^q`.
    pub mean: f64,
    /// Sample standard deviation divided by `√samples`.
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

impl MomentEstimate {
    /// `‖C‖_q = mean^{1/q}`.
    pub fn norm(&self) -> f64 {
        self.mean.powf(1.0 / self.q)
    }

    /// Standard error of [`norm`](Self::norm) by the delta method.
    pub fn norm_stderr(&self) -> f64 {
        if self.mean == 0.0 {
            return 0.0;
        }
        self.stderr * self.mean.powf(1.0 / self.q - 1.0) / self.q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub threshold: f64,
    pub probability: f64,
    /// Binomial standard error `√(p(1 − p)/samples)`.
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> T {
    if workers <= 1 {
        return job();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(job),
        Err(_) => job(),
    }
}

/// Evaluates `f` on the terms of every sample and returns the per-sample
/// results in index order.
///
/// `terms` lists the `n` included in the sum; for Rademacher chaos only its
/// squarefree members are kept.
fn per_sample<T, F>(cfg: &SamplerConfig, sieve: &FactorSieve, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&ChaosSample) -> T + Sync,
{
    with_pool(cfg.workers, || {
        (0..cfg.samples as u64)
            .into_par_iter()
            .map(|i| {
                let sample = draw_sample(cfg, sieve, i).expect("config checked by caller");
                f(&sample)
            })
            .collect()
    })
}

fn summands(cfg: &SamplerConfig, sieve: &FactorSieve, level: Option<u32>) -> Vec<usize> {
    (1..=cfg.n)
        .filter(|&n| level.is_none_or(|m| sieve.omega(n) == m))
        .filter(|&n| cfg.model == Model::Steinhaus || sieve.is_squarefree(n))
        .collect()
}

fn abs_sum(sample: &ChaosSample, terms: &[usize]) -> f64 {
    match sample {
        ChaosSample::Steinhaus(v) => terms.iter().map(|&n| v[n]).sum::<Complex64>().norm(),
        ChaosSample::Rademacher(v) => terms
            .iter()
            .map(|&n| i64::from(v[n]))
            .sum::<i64>()
            .unsigned_abs() as f64,
    }
}

fn check_samples(cfg: &SamplerConfig) -> Result<()> {
    if cfg.samples < 2 {
        return Err(LabError::Domain(format!(
            "need at least 2 samples, got {}",
            cfg.samples
        )));
    }
    Ok(())
}

/// Estimates `E|C|^q` where `C` is the full sum or, with `level = Some(m)`,
/// the homogeneous part over `E_{N,m}`.
pub fn estimate_moment(
    cfg: &SamplerConfig,
    sieve: &FactorSieve,
    q: f64,
    level: Option<u32>,
) -> Result<MomentEstimate> {
    if !(q > 0.0) {
        return Err(LabError::Domain(format!("q must be positive, got {q}")));
    }
    check_samples(cfg)?;
    check_config(cfg, sieve)?;
    let terms = summands(cfg, sieve, level);
    if terms.is_empty() {
        return Err(LabError::Domain(format!(
            "the level set for m = {:?} below N = {} is empty",
            level, cfg.n
        )));
    }
    let values = per_sample(cfg, sieve, |s| abs_sum(s, &terms).powf(q));
    let (mean, stderr) = mean_and_stderr(&values);
    Ok(MomentEstimate {
        q,
        mean,
        stderr,
        samples: cfg.samples,
        seed: cfg.seed,
    })
}

/// Estimates `P(|C_N| ≥ threshold)`.
pub fn tail_probability(
    cfg: &SamplerConfig,
    sieve: &FactorSieve,
    threshold: f64,
) -> Result<TailEstimate> {
    if !(threshold >= 0.0) {
        return Err(LabError::Domain(format!(
            "threshold must be non-negative, got {threshold}"
        )));
    }
    check_samples(cfg)?;
    check_config(cfg, sieve)?;
    let terms = summands(cfg, sieve, None);
    let hits = per_sample(cfg, sieve, |s| abs_sum(s, &terms) >= threshold);
    let count = hits.iter().filter(|&&h| h).count();
    let k = cfg.samples as f64;
    let p = count as f64 / k;
    Ok(TailEstimate {
        threshold,
        probability: p,
        stderr: (p * (1.0 - p) / k).sqrt(),
        samples: cfg.samples,
        seed: cfg.seed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelCheck {
    pub m: u32,
    /// `|E_{N,m}|` (squarefree members only for Rademacher chaos).
    pub level_size: u64,
    pub norm: f64,
    pub stderr: f64,
    /// Estimate exceeds `‖C_N‖_q` by more than three combined standard errors.
    pub violation: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionReport {
    pub n: usize,
    pub q: f64,
    /// False for `q < 1`, where the bound carries an unknown constant.
    pub asserting: bool,
    pub full_norm: f64,
    pub full_stderr: f64,
    /// `|E_{N,m}| ≤ N` for every level, the exact `q = 2` case.
    pub exact_l2_ok: bool,
    pub levels: Vec<LevelCheck>,
}

impl ProjectionReport {
    pub fn violations(&self) -> usize {
        self.levels.iter().filter(|l| l.violation).count()
    }
}

/// Compares `‖C_{N,m}‖_q` with `‖C_N‖_q` for every non-empty level.
///
/// All levels are evaluated on the same realisations.
pub fn projection_coeff_check(
    cfg: &SamplerConfig,
    sieve: &FactorSieve,
    q: f64,
) -> Result<ProjectionReport> {
    if !(q > 0.0) {
        return Err(LabError::Domain(format!("q must be positive, got {q}")));
    }
    check_samples(cfg)?;
    check_config(cfg, sieve)?;
    let full = summands(cfg, sieve, None);
    let max_m = crate::sieve::floor_log2(cfg.n);
    let levels: Vec<(u32, Vec<usize>)> = (0..=max_m)
        .map(|m| (m, summands(cfg, sieve, Some(m))))
        .filter(|(_, t)| !t.is_empty())
        .collect();

    let rows = per_sample(cfg, sieve, |s| {
        let mut row = Vec::with_capacity(levels.len() + 1);
        row.push(abs_sum(s, &full).powf(q));
        row.extend(levels.iter().map(|(_, t)| abs_sum(s, t).powf(q)));
        row
    });

    let column = |j: usize| -> MomentEstimate {
        let vals: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let (mean, stderr) = mean_and_stderr(&vals);
        MomentEstimate {
            q,
            mean,
            stderr,
            samples: cfg.samples,
            seed: cfg.seed,
        }
    };
    let full_est = column(0);
    let asserting = q >= 1.0;
    let checks = levels
        .iter()
        .enumerate()
        .map(|(j, (m, terms))| {
            let est = column(j + 1);
            let combined = est.norm_stderr().hypot(full_est.norm_stderr());
            LevelCheck {
                m: *m,
                level_size: terms.len() as u64,
                norm: est.norm(),
                stderr: est.norm_stderr(),
                violation: asserting && est.norm() - full_est.norm() > 3.0 * combined,
            }
        })
        .collect();

    Ok(ProjectionReport {
        n: cfg.n,
        q,
        asserting,
        full_norm: full_est.norm(),
        full_stderr: full_est.norm_stderr(),
        exact_l2_ok: levels.iter().all(|(_, t)| t.len() <= cfg.n),
        levels: checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sieve(n: usize) -> FactorSieve {
        FactorSieve::new(n).unwrap()
    }

    #[test]
    fn trivial_sample() {
        let s = sieve(1);
        let cfg = SamplerConfig::steinhaus(1, 42, 10);
        let x = draw_sample(&cfg, &s, 0).unwrap();
        assert_eq!(x.len(), 1);
        assert_eq!(x.value(1), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn steinhaus_values_are_unimodular_and_multiplicative() {
        let s = sieve(1000);
        let cfg = SamplerConfig::steinhaus(1000, 7, 10);
        let x = draw_sample(&cfg, &s, 3).unwrap();
        for n in 1..=1000 {
            assert!((x.value(n).norm() - 1.0).abs() < 1e-12, "n={n}");
        }
        for a in 1..=31 {
            for b in 1..=(1000 / a) {
                let d = x.value(a * b) - x.value(a) * x.value(b);
                assert!(d.norm() < 1e-10, "{a}*{b}");
            }
        }
    }

    #[test]
    fn rademacher_values_are_signs() {
        let s = sieve(200);
        let cfg = SamplerConfig::steinhaus(200, 1, 10).with_model(Model::Rademacher);
        let x = draw_sample(&cfg, &s, 0).unwrap();
        assert_eq!(x.model(), Model::Rademacher);
        for n in 1..=200 {
            assert_eq!(x.value(n).norm(), 1.0);
        }
        // ε(4) = ε(2)² = 1
        assert_eq!(x.value(4).re, 1.0);
    }

    #[test]
    fn draw_is_deterministic() {
        let s = sieve(100);
        let cfg = SamplerConfig::steinhaus(100, 42, 10);
        assert_eq!(
            draw_sample(&cfg, &s, 7).unwrap(),
            draw_sample(&cfg, &s, 7).unwrap()
        );
        assert_ne!(
            draw_sample(&cfg, &s, 7).unwrap(),
            draw_sample(&cfg, &s, 8).unwrap()
        );
    }

    #[test]
    fn moment_of_constant_sum() {
        let s = sieve(1);
        let cfg = SamplerConfig::steinhaus(1, 42, 50);
        let est = estimate_moment(&cfg, &s, 3.0, None).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn moment_rejects_bad_arguments() {
        let s = sieve(10);
        let cfg = SamplerConfig::steinhaus(10, 42, 50);
        assert!(estimate_moment(&cfg, &s, 0.0, None).is_err());
        assert!(estimate_moment(&cfg, &s, -1.0, None).is_err());
        // E_(10, 3) = {8} is fine, E_(10, 4) is empty
        assert!(estimate_moment(&cfg, &s, 2.0, Some(3)).is_ok());
        assert!(estimate_moment(&cfg, &s, 2.0, Some(4)).is_err());
        let one = SamplerConfig::steinhaus(10, 42, 1);
        assert!(estimate_moment(&one, &s, 2.0, None).is_err());
        let big = SamplerConfig::steinhaus(11, 42, 50);
        assert!(matches!(
            estimate_moment(&big, &s, 2.0, None),
            Err(LabError::Capacity(_))
        ));
    }

    #[test]
    fn second_moment_is_near_n() {
        let s = sieve(100);
        let cfg = SamplerConfig::steinhaus(100, 42, 10_000);
        let est = estimate_moment(&cfg, &s, 2.0, None).unwrap();
        assert!((est.mean - 100.0).abs() <= 3.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn level_second_moment_is_level_size() {
        let s = sieve(100);
        let cfg = SamplerConfig::steinhaus(100, 9, 10_000);
        let size = s.count_table().counts()[2] as f64;
        let est = estimate_moment(&cfg, &s, 2.0, Some(2)).unwrap();
        assert!(
            (est.mean - size).abs() <= 3.0 * est.stderr,
            "{est:?} vs {size}"
        );
    }

    #[test]
    fn rademacher_second_moment_counts_squarefree() {
        let s = sieve(100);
        let cfg = SamplerConfig::steinhaus(100, 5, 10_000).with_model(Model::Rademacher);
        let squarefree = (1..=100).filter(|&n| s.is_squarefree(n)).count() as f64;
        let est = estimate_moment(&cfg, &s, 2.0, None).unwrap();
        assert!((est.mean - squarefree).abs() <= 3.0 * est.stderr);
    }

    #[test]
    fn norms_increase_with_q() {
        let s = sieve(50);
        let cfg = SamplerConfig::steinhaus(50, 3, 2000);
        let norms: Vec<f64> = [0.5, 1.0, 1.5, 2.0, 3.0, 4.0]
            .iter()
            .map(|&q| estimate_moment(&cfg, &s, q, None).unwrap().norm())
            .collect();
        assert!(norms.windows(2).all(|w| w[0] <= w[1]), "{norms:?}");
    }

    #[test]
    fn tail_examples() {
        let s = sieve(1000);
        let cfg = SamplerConfig::steinhaus(1000, 11, 2000);
        let zero = tail_probability(&cfg, &s, 0.0).unwrap();
        assert_eq!(zero.probability, 1.0);
        assert_eq!(zero.stderr, 0.0);
        let far = tail_probability(&cfg, &s, 10.0 * 1000f64.sqrt()).unwrap();
        assert!(far.probability <= 0.01);
        assert!(tail_probability(&cfg, &s, -1.0).is_err());
    }

    #[test]
    fn projection_report_q_two_and_half() {
        let s = sieve(100);
        let cfg = SamplerConfig::steinhaus(100, 4, 500);
        let two = projection_coeff_check(&cfg, &s, 2.0).unwrap();
        assert!(two.exact_l2_ok);
        assert!(two.asserting);
        let half = projection_coeff_check(&cfg, &s, 0.5).unwrap();
        assert!(!half.asserting);
        assert_eq!(half.violations(), 0);
        assert_eq!(half.levels.len(), 7);
    }
}
