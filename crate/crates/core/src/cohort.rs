//! Synthetic cohorts and the end-to-end demo: fit a compact and a full
//! logistic model on a development cohort, then evaluate both on a
//! validation cohort with the two-treatment weights (statins point mass,
//! lifestyle Gaussian) and the log-normal expected net benefit.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cnb::{cnb_value, CnbUnit};
use crate::confusion::sweep;
use crate::dataset::EvaluationDataset;
use crate::error::{Error, Result};
use crate::models::{fit_logistic, sigmoid, FitOptions, LogisticModel};
use crate::netbenefit::{net_benefit, treat_all_net_benefit, TREAT_ALL};
use crate::quadrature::QuadConfig;
use crate::resample::{
    bootstrap_ci, optimism_correct, statistic, BootstrapConfig, ConfidenceInterval, FitAndScore,
    OptimismResult, Resample,
};
use crate::weighting::{cumulative, example_weights, CumulativeWeights, EXAMPLE_THRESHOLD};

/// Risk depends on `core` features, which both models see, and on `extra`
/// features, which only the full model sees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CohortConfig {
    pub n: usize,
    pub intercept: f64,
    pub core_coefficients: Vec<f64>,
    pub extra_coefficients: Vec<f64>,
    pub seed: u64,
}

impl Default for CohortConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            intercept: -2.3,
            core_coefficients: vec![0.9, 0.6],
            extra_coefficients: vec![0.7, 0.5],
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub feature_names: Vec<String>,
    /// One row per subject.
    pub features: DMatrix<f64>,
    pub outcomes: Vec<bool>,
    /// Number of leading columns that are core features.
    pub core: usize,
}

impl Cohort {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn prevalence(&self) -> f64 {
        self.outcomes.iter().filter(|&&y| y).count() as f64 / self.len() as f64
    }

    fn columns(&self, count: usize) -> DMatrix<f64> {
        self.features.columns(0, count).into_owned()
    }
}

impl Resample for Cohort {
    fn size(&self) -> usize {
        self.len()
    }

    fn resample(&self, indices: &[usize]) -> Result<Self> {
        Ok(Self {
            feature_names: self.feature_names.clone(),
            features: self.features.select_rows(indices),
            outcomes: indices.iter().map(|&i| self.outcomes[i]).collect(),
            core: self.core,
        })
    }
}

/// Draws a cohort from random stream `stream` of `cfg.seed`.
pub fn generate_cohort(cfg: &CohortConfig, stream: u64) -> Result<Cohort> {
    if cfg.n == 0 {
        return Err(Error::InvalidArgument("cohort size must be positive".into()));
    }
    if cfg.core_coefficients.is_empty() {
        return Err(Error::InvalidArgument("a cohort needs at least one core feature".into()));
    }
    let coef: Vec<f64> = cfg
        .core_coefficients
        .iter()
        .chain(&cfg.extra_coefficients)
        .copied()
        .collect();
    let p = coef.len();
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut features = DMatrix::zeros(cfg.n, p);
    let mut outcomes = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let mut eta = cfg.intercept;
        for (j, b) in coef.iter().enumerate() {
            let x: f64 = StandardNormal.sample(&mut rng);
            features[(i, j)] = x;
            eta += b * x;
        }
        outcomes.push(rng.random::<f64>() < sigmoid(eta));
    }
    let core = cfg.core_coefficients.len();
    let feature_names = (0..p)
        .map(|j| if j < core { format!("core{}", j + 1) } else { format!("extra{}", j - core + 1) })
        .collect();
    Ok(Cohort {
        feature_names,
        features,
        outcomes,
        core,
    })
}

/// Logistic regression on the first `columns` features.
#[derive(Debug, Clone, Copy)]
pub struct LogisticProcedure {
    pub columns: usize,
    pub options: FitOptions,
}

impl FitAndScore<Cohort> for LogisticProcedure {
    type Model = LogisticModel;

    fn fit(&self, data: &Cohort) -> Result<LogisticModel> {
        fit_logistic(
            &data.columns(self.columns),
            &data.feature_names[..self.columns],
            &data.outcomes,
            &vec![1.0; data.len()],
            &self.options,
        )
    }

    fn score(&self, model: &LogisticModel, data: &Cohort) -> Result<Vec<f64>> {
        model.predict(&data.columns(self.columns))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemoConfig {
    pub cohort: CohortConfig,
    pub validation_n: usize,
    /// Percentile intervals on the validation cohort.
    pub bootstrap: Option<BootstrapConfig>,
    /// Optimism correction of the lifestyle CNB on the development cohort.
    pub optimism: Option<BootstrapConfig>,
    /// Cutoff for the lifestyle weight, which is positive at t = 0.
    pub epsilon: f64,
    pub fit: FitOptions,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            cohort: CohortConfig::default(),
            validation_n: 2000,
            bootstrap: Some(BootstrapConfig::new(1000, 0.95, 20_240_101)),
            optimism: Some(BootstrapConfig::new(200, 0.95, 20_240_102)),
            epsilon: 1e-6,
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyValue {
    pub policy: String,
    /// Per capita.
    pub value: f64,
    pub ci: Option<ConfidenceInterval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoTable {
    pub name: String,
    pub unit: String,
    pub rows: Vec<PolicyValue>,
}

impl DemoTable {
    pub fn value(&self, policy: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.policy == policy).map(|r| r.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub config: DemoConfig,
    pub development_prevalence: f64,
    pub validation_prevalence: f64,
    pub models: Vec<(String, LogisticModel)>,
    /// Statins: net benefit at the 10% threshold.
    pub statins: DemoTable,
    /// Lifestyle: CNB under the normalized Gaussian weight.
    pub lifestyle: DemoTable,
    /// Single treatment: expected net benefit under log-normal thresholds.
    pub expected_nb: DemoTable,
    /// Lifestyle CNB optimism per model on the development cohort.
    pub optimism: Vec<(String, OptimismResult)>,
}

pub const COMPACT: &str = "compact";
pub const FULL: &str = "full";

fn cnb_table(
    name: &str,
    ds: &EvaluationDataset,
    cw: &CumulativeWeights,
    unit: CnbUnit,
    boot: Option<&BootstrapConfig>,
) -> Result<DemoTable> {
    let mut rows = Vec::new();
    for model in [COMPACT, FULL] {
        let value = cnb_value(ds, model, cw)?;
        let ci = match boot {
            Some(b) => {
                let stat = statistic(model, |d: &EvaluationDataset| cnb_value(d, model, cw));
                Some(bootstrap_ci(&stat, ds, b)?.ci)
            }
            None => None,
        };
        rows.push(PolicyValue {
            policy: model.to_string(),
            value,
            ci,
        });
    }
    let all = |d: &EvaluationDataset| -> Result<f64> {
        let pi = d.prevalence();
        Ok(pi * cw.w1(1.0)? - (1.0 - pi) * cw.w0(1.0)?)
    };
    rows.push(PolicyValue {
        policy: TREAT_ALL.to_string(),
        value: all(ds)?,
        ci: match boot {
            Some(b) => Some(bootstrap_ci(&statistic(TREAT_ALL, all), ds, b)?.ci),
            None => None,
        },
    });
    Ok(DemoTable {
        name: name.to_string(),
        unit: unit.label().to_string(),
        rows,
    })
}

fn statins_table(ds: &EvaluationDataset, boot: Option<&BootstrapConfig>) -> Result<DemoTable> {
    let t = EXAMPLE_THRESHOLD;
    let mut rows = Vec::new();
    for model in [COMPACT, FULL] {
        let f = |d: &EvaluationDataset| net_benefit(&sweep(d, model)?, t);
        rows.push(PolicyValue {
            policy: model.to_string(),
            value: f(ds)?,
            ci: match boot {
                Some(b) => Some(bootstrap_ci(&statistic(model, f), ds, b)?.ci),
                None => None,
            },
        });
    }
    let all = |d: &EvaluationDataset| Ok(treat_all_net_benefit(d.prevalence(), t));
    rows.push(PolicyValue {
        policy: TREAT_ALL.to_string(),
        value: all(ds)?,
        ci: match boot {
            Some(b) => Some(bootstrap_ci(&statistic(TREAT_ALL, all), ds, b)?.ci),
            None => None,
        },
    });
    Ok(DemoTable {
        name: "statins".into(),
        unit: "true positives".into(),
        rows,
    })
}

/// Runs the demo pipeline. Statins and lifestyle are reported as separate
/// components.
pub fn run_demo(cfg: &DemoConfig) -> Result<DemoReport> {
    if !(cfg.epsilon > 0.0) || cfg.validation_n == 0 {
        return Err(Error::InvalidArgument(
            "demo needs a positive epsilon and a validation cohort".into(),
        ));
    }
    let dev = generate_cohort(&cfg.cohort, 1)?;
    let val = generate_cohort(
        &CohortConfig {
            n: cfg.validation_n,
            ..cfg.cohort.clone()
        },
        2,
    )?;
    let procedures = [
        (COMPACT, LogisticProcedure { columns: dev.core, options: cfg.fit }),
        (FULL, LogisticProcedure { columns: dev.features.ncols(), options: cfg.fit }),
    ];
    let mut models = Vec::new();
    let mut scores = Vec::new();
    for (name, proc_) in &procedures {
        let m = proc_.fit(&dev)?;
        scores.push(proc_.score(&m, &val)?);
        models.push((name.to_string(), m));
    }
    let ds = EvaluationDataset::new(
        vec![COMPACT.into(), FULL.into()],
        scores,
        val.outcomes.clone(),
        None,
    )?;

    let qc = QuadConfig::default().with_epsilon(cfg.epsilon);
    let presets = example_weights(true, &qc)?;
    let lifestyle_cw = cumulative(&presets.lifestyle, &qc)?;
    let expected_cw = cumulative(&presets.threshold_density, &QuadConfig::default())?;
    let boot = cfg.bootstrap.as_ref();

    let statins = statins_table(&ds, boot)?;
    let lifestyle = cnb_table(
        "lifestyle",
        &ds,
        &lifestyle_cw,
        CnbUnit::CombinedTruePositives,
        boot,
    )?;
    let expected_nb = cnb_table(
        "expected_nb",
        &ds,
        &expected_cw,
        CnbUnit::AveragedTruePositives,
        boot,
    )?;

    let mut optimism = Vec::new();
    if let Some(ob) = &cfg.optimism {
        let eval = |c: &Cohort, s: &[f64]| {
            let d = EvaluationDataset::single("m", s.to_vec(), c.outcomes.clone())?;
            cnb_value(&d, "m", &lifestyle_cw)
        };
        for (name, proc_) in &procedures {
            optimism.push((name.to_string(), optimism_correct(proc_, &eval, &dev, ob)?));
        }
    }

    Ok(DemoReport {
        config: cfg.clone(),
        development_prevalence: dev.prevalence(),
        validation_prevalence: val.prevalence(),
        models,
        statins,
        lifestyle,
        expected_nb,
        optimism,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cohort_is_deterministic_with_target_prevalence() {
        let cfg = CohortConfig {
            n: 20_000,
            ..CohortConfig::default()
        };
        let a = generate_cohort(&cfg, 1).unwrap();
        assert_eq!(a, generate_cohort(&cfg, 1).unwrap());
        assert_ne!(a.outcomes, generate_cohort(&cfg, 2).unwrap().outcomes);
        let pi = a.prevalence();
        assert!((0.12..0.18).contains(&pi), "{pi}");
    }

    #[test]
    fn resample_picks_rows() {
        let c = generate_cohort(&CohortConfig { n: 5, ..CohortConfig::default() }, 1).unwrap();
        let r = c.resample(&[4, 4, 0]).unwrap();
        assert_eq!(r.features.row(1), c.features.row(4));
        assert_eq!(r.outcomes[2], c.outcomes[0]);
    }

    #[test]
    fn demo_without_resampling() {
        let cfg = DemoConfig {
            bootstrap: None,
            optimism: None,
            ..DemoConfig::default()
        };
        let r = run_demo(&cfg).unwrap();
        for table in [&r.statins, &r.lifestyle, &r.expected_nb] {
            assert_eq!(table.rows.len(), 3);
            assert!(table.rows.iter().all(|row| row.value.is_finite() && row.ci.is_none()));
        }
        assert!(r.expected_nb.value(FULL).unwrap() > r.expected_nb.value(TREAT_ALL).unwrap());
        assert_eq!(r.models[0].1.coefficients.len(), 2);
        assert_eq!(r.models[1].1.coefficients.len(), 4);
    }
}
