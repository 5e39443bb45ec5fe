//! Continuous net benefit and the scores it is tied to.
//!
//! ```text
//! CNB = ∫ ω(t) [TP(t)/t - FP(t)/(1-t)] dt
//!     = (1/Σw) Σ wᵢ [yᵢ·W1(fᵢ) - (1-yᵢ)·W0(fᵢ)]
//! ```
//!
//! The second form swaps the order of integration over the strict indicator
//! `fᵢ > t` and is what [`continuous_net_benefit`] computes; point masses of
//! ω are read straight off the classification curve. The first form is
//! available as [`cnb_by_threshold_quadrature`] for cross-checking.

use serde::{Deserialize, Serialize};

use crate::confusion::{sweep, ClassificationCurve};
use crate::dataset::EvaluationDataset;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};
use crate::resample::ConfidenceInterval;
use crate::sum::CompensatedSum;
use crate::weighting::{
    cumulative, Atom, CumulativeMethod, CumulativeWeights, TabulatedCurve, WeightSpec,
};

/// Tolerance on W1(1) for treating a weight as normalized.
const NORMALIZED_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CnbUnit {
    /// ∫ ω/t = 1: benefit of one true positive across all decisions.
    CombinedTruePositives,
    /// Normalized expected net benefit over a threshold distribution.
    AveragedTruePositives,
    Unnormalized,
}

impl CnbUnit {
    pub fn label(&self) -> &'static str {
        match self {
            CnbUnit::CombinedTruePositives => "combined true positives",
            CnbUnit::AveragedTruePositives => "averaged true positives",
            CnbUnit::Unnormalized => "unnormalized units",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnbEstimate {
    pub model: String,
    /// Per-capita value.
    pub value: f64,
    pub unit: CnbUnit,
    pub weight_spec: WeightSpec,
    pub method: CumulativeMethod,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ci: Option<ConfidenceInterval>,
}

impl CnbEstimate {
    pub fn with_ci(mut self, ci: ConfidenceInterval) -> Self {
        self.ci = Some(ci);
        self
    }

    pub fn per_100(&self) -> f64 {
        self.value * 100.0
    }
}

fn weighted_mean(ds: &EvaluationDataset, values: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for (v, w) in values.iter().zip(ds.weights()) {
        if *w != 0.0 {
            acc.add(w * v);
        }
    }
    acc.value() / ds.total_weight()
}

fn atoms_on_curve(curve: &ClassificationCurve, atoms: &[Atom]) -> f64 {
    atoms
        .iter()
        .map(|a| {
            let (tp, fp) = curve.rates_at(a.t);
            a.mass * (tp / a.t - fp / (1.0 - a.t))
        })
        .collect::<CompensatedSum>()
        .value()
}

/// `yᵢ·W1(fᵢ) - (1-yᵢ)·W0(fᵢ)` per subject, point masses included.
pub fn cnb_contributions(
    ds: &EvaluationDataset,
    model: &str,
    spec: &WeightSpec,
    cfg: &QuadConfig,
) -> Result<Vec<f64>> {
    let cw = cumulative(spec, cfg)?;
    contributions(ds, model, &cw, true)
}

fn contributions(
    ds: &EvaluationDataset,
    model: &str,
    cw: &CumulativeWeights,
    with_atoms: bool,
) -> Result<Vec<f64>> {
    let scores = ds.scores(model)?;
    scores
        .iter()
        .zip(ds.outcomes())
        .map(|(&f, &y)| {
            let v = match (y, with_atoms) {
                (true, true) => cw.w1(f)?,
                (false, true) => -cw.w0(f)?,
                (true, false) => cw.continuous_w1_between(0.0, f)?,
                (false, false) => -cw.continuous_w0_between(0.0, f)?,
            };
            Ok(v)
        })
        .collect()
}

fn unit_for(cw: &CumulativeWeights) -> Result<CnbUnit> {
    let total = cw.total_w1()?;
    Ok(if (total - 1.0).abs() < NORMALIZED_TOL {
        CnbUnit::CombinedTruePositives
    } else {
        CnbUnit::Unnormalized
    })
}

/// CNB of `model` under `spec`. Errors with [`Error::Divergent`] when
/// ∫ ω/t diverges at 0 (e.g. a uniform weight without cutoff); compare two
/// models with [`cnb_difference`] in that case.
pub fn continuous_net_benefit(
    ds: &EvaluationDataset,
    model: &str,
    spec: &WeightSpec,
    cfg: &QuadConfig,
) -> Result<CnbEstimate> {
    let cw = cumulative(spec, cfg)?;
    let value = cnb_value(ds, model, &cw)?;
    Ok(CnbEstimate {
        model: model.to_string(),
        value,
        unit: unit_for(&cw)?,
        weight_spec: spec.clone(),
        method: cw.method(),
        ci: None,
    })
}

/// CNB value from prebuilt cumulative weights, for repeated evaluation
/// under one weight (bootstrap replicates).
pub fn cnb_value(ds: &EvaluationDataset, model: &str, cw: &CumulativeWeights) -> Result<f64> {
    let continuous = if cw.atoms().is_empty() {
        weighted_mean(ds, &contributions(ds, model, cw, true)?)
    } else {
        weighted_mean(ds, &contributions(ds, model, cw, false)?)
    };
    if cw.atoms().is_empty() {
        return Ok(continuous);
    }
    let curve = sweep(ds, model)?;
    Ok(continuous + atoms_on_curve(&curve, cw.atoms()))
}

/// CNB of flagging everyone: π·W1(1) - (1-π)·W0(1).
pub fn treat_all_cnb(prevalence: f64, spec: &WeightSpec, cfg: &QuadConfig) -> Result<f64> {
    let cw = cumulative(spec, cfg)?;
    let w1 = if prevalence > 0.0 { cw.w1(1.0)? } else { 0.0 };
    let w0 = if prevalence < 1.0 { cw.w0(1.0)? } else { 0.0 };
    Ok(prevalence * w1 - (1.0 - prevalence) * w0)
}

/// Same quantity as [`continuous_net_benefit`], integrated over thresholds
/// piece by piece between the score jump points.
pub fn cnb_by_threshold_quadrature(
    ds: &EvaluationDataset,
    model: &str,
    spec: &WeightSpec,
    cfg: &QuadConfig,
) -> Result<f64> {
    let cw = cumulative(spec, cfg)?;
    let curve = sweep(ds, model)?;
    let (lo, hi) = cw.domain();
    let mut acc = CompensatedSum::new();
    acc.add(atoms_on_curve(&curve, cw.atoms()));
    if spec.has_density() {
        let mut cuts = vec![lo];
        cuts.extend(curve.jump_points().iter().copied().filter(|&s| s > lo && s < hi));
        cuts.push(hi);
        let breaks = spec.breakpoints();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (tp, fp) = curve.rates_at(0.5 * (a + b));
            if tp == 0.0 && fp == 0.0 {
                continue;
            }
            let f = |t: f64| {
                let t = t.clamp(1e-300, 1.0 - f64::EPSILON / 2.0);
                spec.density(t) * (tp / t - fp / (1.0 - t))
            };
            acc.add(integrate(&f, a, b, &breaks, cfg)?);
        }
    }
    Ok(acc.value())
}

fn check_open_score(f: f64, index: usize, which: &str) -> Result<()> {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(Error::LogOfZero {
            index,
            message: format!("{which} score {f} must lie strictly inside (0, 1)"),
        })
    }
}

/// CNB(model1) - CNB(model2). Also defined for weights whose W1 or W0
/// diverge, since the divergent parts cancel. A uniform weight without
/// cutoff gives the per-capita log-likelihood difference (times the level).
pub fn cnb_difference(
    ds: &EvaluationDataset,
    model1: &str,
    model2: &str,
    spec: &WeightSpec,
    cfg: &QuadConfig,
) -> Result<f64> {
    let f1 = ds.scores(model1)?;
    let f2 = ds.scores(model2)?;
    if let (WeightSpec::Uniform { level }, None) = (spec, cfg.epsilon) {
        spec.validate()?;
        let mut terms = Vec::with_capacity(ds.len());
        for (i, ((&a, &b), &y)) in f1.iter().zip(f2).zip(ds.outcomes()).enumerate() {
            check_open_score(a, i, model1)?;
            check_open_score(b, i, model2)?;
            terms.push(if y {
                (a / b).ln()
            } else {
                ((1.0 - a) / (1.0 - b)).ln()
            });
        }
        return Ok(level * weighted_mean(ds, &terms));
    }
    if model1 == model2 {
        return Ok(0.0);
    }
    let cw = CumulativeWeights::build(spec, cfg)?;
    let terms = f1
        .iter()
        .zip(f2)
        .zip(ds.outcomes())
        .map(|((&a, &b), &y)| {
            if y {
                cw.w1_between(b, a)
            } else {
                cw.w0_between(b, a).map(|v| -v)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(weighted_mean(ds, &terms))
}

/// Per-capita weighted log-likelihood.
pub fn log_likelihood(ds: &EvaluationDataset, model: &str) -> Result<f64> {
    let scores = ds.scores(model)?;
    let mut terms = Vec::with_capacity(scores.len());
    for (i, (&f, &y)) in scores.iter().zip(ds.outcomes()).enumerate() {
        let p = if y { f } else { 1.0 - f };
        if p <= 0.0 && ds.weights()[i] > 0.0 {
            return Err(Error::LogOfZero {
                index: i,
                message: format!("score {f} gives zero probability to the observed outcome"),
            });
        }
        terms.push(if p > 0.0 { p.ln() } else { 0.0 });
    }
    Ok(weighted_mean(ds, &terms))
}

/// Per-capita weighted Brier score.
pub fn brier(ds: &EvaluationDataset, model: &str) -> Result<f64> {
    let scores = ds.scores(model)?;
    let terms: Vec<f64> = scores
        .iter()
        .zip(ds.outcomes())
        .map(|(&f, &y)| {
            let d = if y { 1.0 - f } else { f };
            d * d
        })
        .collect();
    Ok(weighted_mean(ds, &terms))
}

/// Expected net benefit over a threshold distribution `density` with
/// threshold-dependent utilities: ω(t) = p(t) / (1/tp_benefit(t) + 1/fp_harm(t)).
pub fn expected_net_benefit(
    ds: &EvaluationDataset,
    model: &str,
    density: &WeightSpec,
    tp_benefit: &TabulatedCurve,
    fp_harm: &TabulatedCurve,
    cfg: &QuadConfig,
) -> Result<CnbEstimate> {
    let spec = expected_net_benefit_weight(density, tp_benefit, fp_harm, cfg)?;
    let mut est = continuous_net_benefit(ds, model, &spec, cfg)?;
    if est.unit == CnbUnit::CombinedTruePositives {
        est.unit = CnbUnit::AveragedTruePositives;
    }
    Ok(est)
}

/// The weight used by [`expected_net_benefit`].
pub fn expected_net_benefit_weight(
    density: &WeightSpec,
    tp_benefit: &TabulatedCurve,
    fp_harm: &TabulatedCurve,
    cfg: &QuadConfig,
) -> Result<WeightSpec> {
    density.check_density(&QuadConfig {
        epsilon: None,
        ..*cfg
    })?;
    let spec = WeightSpec::HarmonicUtilities {
        tp_benefit: tp_benefit.clone(),
        fp_harm: fp_harm.clone(),
        density: Some(Box::new(density.clone())),
    };
    spec.validate()?;
    Ok(spec)
}

fn density_transform(
    ds: &EvaluationDataset,
    model: &str,
    density: &WeightSpec,
    cfg: &QuadConfig,
    wrap: fn(Box<WeightSpec>) -> WeightSpec,
) -> Result<f64> {
    density.check_density(&QuadConfig {
        epsilon: None,
        ..*cfg
    })?;
    let spec = wrap(Box::new(density.clone()));
    Ok(continuous_net_benefit(ds, model, &spec, cfg)?.value)
}

/// ∫ p(t) [TP(t) - t/(1-t)·FP(t)] dt: net benefit averaged over a threshold
/// density with constant true-positive benefit.
pub fn aunb(
    ds: &EvaluationDataset,
    model: &str,
    density: &WeightSpec,
    cfg: &QuadConfig,
) -> Result<f64> {
    density_transform(ds, model, density, cfg, |density| {
        WeightSpec::ThresholdDensityConstantTpBenefit { density }
    })
}

/// ∫ p(t) [(1-t)/t·TP(t) - FP(t)] dt: the same average with constant
/// false-positive harm.
pub fn aunb_alt(
    ds: &EvaluationDataset,
    model: &str,
    density: &WeightSpec,
    cfg: &QuadConfig,
) -> Result<f64> {
    density_transform(ds, model, density, cfg, |density| {
        WeightSpec::ThresholdDensityConstantFpHarm { density }
    })
}
