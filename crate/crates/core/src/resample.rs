//! Percentile bootstrap intervals and bootstrap optimism correction.
//!
//! Replicate `b` draws its indices from ChaCha20 stream `b` of the seed, so
//! results do not depend on thread count or scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::EvaluationDataset;
use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

pub const DEFAULT_REPLICATES: usize = 5000;
pub const DEFAULT_LEVEL: f64 = 0.95;
pub const DEFAULT_SEED: u64 = 20_240_101;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: DEFAULT_REPLICATES,
            level: DEFAULT_LEVEL,
            seed: DEFAULT_SEED,
            threads: None,
        }
    }
}

impl BootstrapConfig {
    pub fn new(replicates: usize, level: f64, seed: u64) -> Self {
        Self {
            replicates,
            level,
            seed,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidArgument(
                "bootstrap needs at least one replicate".into(),
            ));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "confidence level must lie in (0, 1), got {}",
                self.level
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidArgument("threads must be positive".into()));
        }
        Ok(())
    }

    fn run<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        match self.threads {
            None => Ok(job()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
                Ok(pool.install(job))
            }
        }
    }
}

/// Data that can be resampled by subject index.
pub trait Resample: Sync + Sized {
    fn size(&self) -> usize;
    fn resample(&self, indices: &[usize]) -> Result<Self>;
}

impl Resample for EvaluationDataset {
    fn size(&self) -> usize {
        self.len()
    }

    fn resample(&self, indices: &[usize]) -> Result<Self> {
        self.subset(indices)
    }
}

/// A named scalar summary of a dataset.
pub trait Statistic<D>: Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, data: &D) -> Result<f64>;
}

pub struct FnStatistic<F> {
    name: String,
    f: F,
}

pub fn statistic<D, F>(name: impl Into<String>, f: F) -> FnStatistic<F>
where
    F: Fn(&D) -> Result<f64> + Sync,
{
    FnStatistic {
        name: name.into(),
        f,
    }
}

impl<D, F> Statistic<D> for FnStatistic<F>
where
    F: Fn(&D) -> Result<f64> + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, data: &D) -> Result<f64> {
        (self.f)(data)
    }
}

/// Indices of bootstrap replicate `b`.
pub fn replicate_indices(n: usize, seed: u64, b: usize) -> Vec<usize> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(b as u64);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Empirical quantile of sorted values: linear interpolation between order
/// statistics at position (B+1)·p, clamped to the sample range.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = (n as f64 + 1.0) * p;
    if h <= 1.0 {
        return sorted[0];
    }
    if h >= n as f64 {
        return sorted[n - 1];
    }
    let lo = h.floor();
    let k = lo as usize;
    let frac = h - lo;
    if frac == 0.0 {
        return sorted[k - 1];
    }
    sorted[k - 1] + frac * (sorted[k] - sorted[k - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CiMethod {
    PercentileBootstrap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: CiMethod,
    pub replicates: usize,
    pub seed: u64,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub statistic: String,
    pub point: f64,
    pub ci: ConfidenceInterval,
    /// Replicate values by replicate index; failed replicates are NaN.
    #[serde(skip)]
    pub replicate_values: Vec<f64>,
}

fn check_failures(outcomes: &[Result<f64>]) -> Result<usize> {
    let failed: Vec<String> = outcomes
        .iter()
        .filter_map(|r| match r {
            Ok(v) if v.is_finite() => None,
            Ok(v) => Some(format!("non-finite value {v}")),
            Err(e) => Some(e.to_string()),
        })
        .collect();
    if failed.len() * 100 > outcomes.len() {
        return Err(Error::TooManyFailedReplicates {
            failed: failed.len(),
            total: outcomes.len(),
            first: failed[0].clone(),
        });
    }
    Ok(failed.len())
}

fn replicate_map<D, T, F>(data: &D, cfg: &BootstrapConfig, f: F) -> Result<Vec<Result<T>>>
where
    D: Resample,
    T: Send,
    F: Fn(&D) -> Result<T> + Sync,
{
    cfg.validate()?;
    if data.size() == 0 {
        return Err(Error::EmptyInput);
    }
    let n = data.size();
    cfg.run(|| {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|b| {
                let idx = replicate_indices(n, cfg.seed, b);
                f(&data.resample(&idx)?)
            })
            .collect()
    })
}

/// Point estimate on `data` with a percentile bootstrap interval.
pub fn bootstrap_ci<D, S>(stat: &S, data: &D, cfg: &BootstrapConfig) -> Result<BootstrapResult>
where
    D: Resample,
    S: Statistic<D>,
{
    let point = stat.evaluate(data)?;
    let outcomes = replicate_map(data, cfg, |rep| stat.evaluate(rep))?;
    let failed = check_failures(&outcomes)?;
    let replicate_values: Vec<f64> = outcomes
        .into_iter()
        .map(|r| r.ok().filter(|v| v.is_finite()).unwrap_or(f64::NAN))
        .collect();
    let mut sorted: Vec<f64> = replicate_values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    sorted.sort_by(f64::total_cmp);
    let alpha = (1.0 - cfg.level) / 2.0;
    Ok(BootstrapResult {
        statistic: stat.name().to_string(),
        point,
        ci: ConfidenceInterval {
            lower: percentile(&sorted, alpha),
            upper: percentile(&sorted, 1.0 - alpha),
            level: cfg.level,
            method: CiMethod::PercentileBootstrap,
            replicates: cfg.replicates,
            seed: cfg.seed,
            failed,
        },
        replicate_values,
    })
}

/// A model-building procedure: fit on data, then score any data.
pub trait FitAndScore<D>: Sync {
    type Model: Send + Sync;
    fn fit(&self, data: &D) -> Result<Self::Model>;
    fn score(&self, model: &Self::Model, data: &D) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimismResult {
    pub apparent: f64,
    /// Mean over replicates of the optimism actually subtracted.
    pub mean_optimism: f64,
    /// Mean of `stat(M_b, replicate) - stat(M_b, original)` alone.
    pub mean_optimism_unpaired: f64,
    pub corrected: f64,
    pub replicates: usize,
    pub failed: usize,
    pub seed: u64,
}

/// Bootstrap optimism correction.
///
/// For replicate `b` with model `M_b` fitted on it, and `M` fitted on the
/// original data:
///
/// ```text
/// optimism_b = [stat(M_b, rep_b) - stat(M_b, orig)] - [stat(M, rep_b) - stat(M, orig)]
/// ```
///
/// The first bracket is Harrell's optimism. The second has expectation zero
/// under resampling and removes the part of the first that comes from
/// resampling the evaluation data rather than from refitting, so a procedure
/// that ignores its training data has optimism exactly 0.
pub fn optimism_correct<D, P, E>(
    procedure: &P,
    eval: &E,
    data: &D,
    cfg: &BootstrapConfig,
) -> Result<OptimismResult>
where
    D: Resample,
    P: FitAndScore<D>,
    E: Fn(&D, &[f64]) -> Result<f64> + Sync,
{
    let model = procedure.fit(data)?;
    let apparent = eval(data, &procedure.score(&model, data)?)?;
    let outcomes = replicate_map(data, cfg, |rep| {
        let m_b = procedure.fit(rep)?;
        let harrell = eval(rep, &procedure.score(&m_b, rep)?)? - eval(data, &procedure.score(&m_b, data)?)?;
        let noise = eval(rep, &procedure.score(&model, rep)?)? - apparent;
        Ok((harrell, noise))
    })?;
    let paired: Vec<Result<f64>> = outcomes
        .iter()
        .map(|r| match r {
            Ok((h, n)) => Ok(h - n),
            Err(e) => Err(Error::InvalidArgument(e.to_string())),
        })
        .collect();
    let failed = check_failures(&paired)?;
    let mut opt = CompensatedSum::new();
    let mut unpaired = CompensatedSum::new();
    let mut ok = 0usize;
    for (h, n) in outcomes.iter().flatten() {
        if (h - n).is_finite() {
            opt.add(h - n);
            unpaired.add(*h);
            ok += 1;
        }
    }
    let mean_optimism = opt.value() / ok as f64;
    Ok(OptimismResult {
        apparent,
        mean_optimism,
        mean_optimism_unpaired: unpaired.value() / ok as f64,
        corrected: apparent - mean_optimism,
        replicates: cfg.replicates,
        failed,
        seed: cfg.seed,
    })
}
