//! Binary net benefit, decision curves and their baselines.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::confusion::{check_threshold, sweep, ClassificationCurve};
use crate::dataset::EvaluationDataset;
use crate::error::{Error, Result};

pub const TREAT_ALL: &str = "treat_all";
pub const TREAT_NONE: &str = "treat_none";

/// TP(t)/t - FP(t)/(1-t): the net benefit divided by the threshold.
pub fn rescaled_net_benefit(curve: &ClassificationCurve, t: f64) -> Result<f64> {
    check_threshold(t)?;
    let (tp, fp) = curve.rates_at(t);
    Ok(tp / t - fp / (1.0 - t))
}

/// TP(t) - t/(1-t) FP(t), in true positives per capita.
///
/// Computed as `t * rescaled_net_benefit(t)` so the two agree exactly.
pub fn net_benefit(curve: &ClassificationCurve, t: f64) -> Result<f64> {
    Ok(t * rescaled_net_benefit(curve, t)?)
}

/// Closed-form net benefit of flagging everyone.
pub fn treat_all_net_benefit(prevalence: f64, t: f64) -> f64 {
    prevalence - t * (1.0 - prevalence) / (1.0 - t)
}

/// Net benefit of two decisions informed by the same score, in units of the
/// first decision's true positives. `effect_ratio` is (a2 - c2) / (a1 - c1).
pub fn combine_decisions(nb1: f64, nb2: f64, effect_ratio: f64) -> Result<f64> {
    if !(effect_ratio >= 0.0) || !effect_ratio.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "effect ratio must be finite and nonnegative, got {effect_ratio}"
        )));
    }
    Ok(nb1 + effect_ratio * nb2)
}

/// 0.01, 0.02, ..., 0.99.
pub fn default_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("threshold grid is empty".into()));
    }
    for &t in grid {
        check_threshold(t)?;
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "threshold grid must be strictly ascending".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyColumn {
    pub policy: String,
    pub net_benefit: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rescaled: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionCurveTable {
    pub grid: Vec<f64>,
    pub prevalence: f64,
    pub columns: Vec<PolicyColumn>,
}

pub fn decision_curve(
    ds: &EvaluationDataset,
    models: &[&str],
    grid: &[f64],
    include_rescaled: bool,
) -> Result<DecisionCurveTable> {
    validate_grid(grid)?;
    let prevalence = ds.prevalence();
    let mut columns = Vec::with_capacity(models.len() + 2);
    for model in models {
        let curve = sweep(ds, model)?;
        let rescaled = grid
            .iter()
            .map(|&t| rescaled_net_benefit(&curve, t))
            .collect::<Result<Vec<_>>>()?;
        let nb = grid.iter().zip(&rescaled).map(|(t, r)| t * r).collect();
        columns.push(PolicyColumn {
            policy: model.to_string(),
            net_benefit: nb,
            rescaled: include_rescaled.then_some(rescaled),
        });
    }
    let all: Vec<f64> = grid
        .iter()
        .map(|&t| treat_all_net_benefit(prevalence, t))
        .collect();
    columns.push(PolicyColumn {
        policy: TREAT_ALL.into(),
        rescaled: include_rescaled
            .then(|| all.iter().zip(grid).map(|(nb, t)| nb / t).collect()),
        net_benefit: all,
    });
    columns.push(PolicyColumn {
        policy: TREAT_NONE.into(),
        net_benefit: vec![0.0; grid.len()],
        rescaled: include_rescaled.then(|| vec![0.0; grid.len()]),
    });
    Ok(DecisionCurveTable {
        grid: grid.to_vec(),
        prevalence,
        columns,
    })
}

impl DecisionCurveTable {
    pub fn column(&self, policy: &str) -> Option<&PolicyColumn> {
        self.columns.iter().find(|c| c.policy == policy)
    }

    /// One row per threshold; values multiplied by `scale` (100 gives
    /// "per 100 people").
    pub fn write_csv<W: Write>(&self, writer: W, scale: f64) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["threshold".to_string()];
        for c in &self.columns {
            header.push(c.policy.clone());
        }
        for c in &self.columns {
            if c.rescaled.is_some() {
                header.push(format!("{}_rescaled", c.policy));
            }
        }
        wtr.write_record(&header)?;
        for (i, t) in self.grid.iter().enumerate() {
            let mut row = vec![t.to_string()];
            for c in &self.columns {
                row.push((c.net_benefit[i] * scale).to_string());
            }
            for c in &self.columns {
                if let Some(r) = &c.rescaled {
                    row.push((r[i] * scale).to_string());
                }
            }
            wtr.write_record(&row)?;
        }
        wtr.flush().map_err(|source| Error::Io {
            path: "<writer>".into(),
            source,
        })?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn demo_ds() -> EvaluationDataset {
        EvaluationDataset::single(
            "m",
            vec![0.9, 0.2, 0.8, 0.1],
            vec![true, false, true, false],
        )
        .unwrap()
    }

    #[test]
    fn demo_net_benefit() {
        let curve = sweep(&demo_ds(), "m").unwrap();
        assert_eq!(net_benefit(&curve, 0.5).unwrap(), 0.5);
        let expected = 0.5 - (0.15 / 0.85) * 0.25;
        assert!((net_benefit(&curve, 0.15).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.455882).abs() < 1e-6);
        assert_eq!(net_benefit(&curve, 0.95).unwrap(), 0.0);
    }

    #[test]
    fn rescaled_relation() {
        let curve = sweep(&demo_ds(), "m").unwrap();
        assert_eq!(rescaled_net_benefit(&curve, 0.5).unwrap(), 1.0);
        let r = rescaled_net_benefit(&curve, 0.15).unwrap();
        assert_eq!(0.15 * r, net_benefit(&curve, 0.15).unwrap());
        let all = ClassificationCurve::treat_all(0.3);
        let r = rescaled_net_benefit(&all, 0.2).unwrap();
        assert!((r - 0.625).abs() < 1e-15);
    }

    #[test]
    fn baselines() {
        assert!((treat_all_net_benefit(0.3, 0.2) - 0.125).abs() < 1e-15);
        assert!((treat_all_net_benefit(0.3, 1e-12) - 0.3).abs() < 1e-11);
        let table = decision_curve(&demo_ds(), &["m"], &default_grid(), true).unwrap();
        assert_eq!(table.grid.len(), 99);
        assert!(table.column(TREAT_NONE).unwrap().net_benefit.iter().all(|v| *v == 0.0));
        let all = table.column(TREAT_ALL).unwrap();
        for (t, nb) in table.grid.iter().zip(&all.net_benefit) {
            assert_eq!(*nb, treat_all_net_benefit(0.5, *t));
        }
    }

    #[test]
    fn grid_validation() {
        let ds = demo_ds();
        assert!(decision_curve(&ds, &["m"], &[], false).is_err());
        assert!(decision_curve(&ds, &["m"], &[0.0, 0.5], false).is_err());
        assert!(decision_curve(&ds, &["m"], &[0.5, 1.0], false).is_err());
        assert!(decision_curve(&ds, &["m"], &[0.5, 0.4], false).is_err());
    }

    #[test]
    fn combining_two_decisions() {
        assert!((combine_decisions(0.10, 0.06, 0.5).unwrap() - 0.13).abs() < 1e-15);
        assert_eq!(combine_decisions(0.10, 0.06, 0.0).unwrap(), 0.10);
        assert_eq!(combine_decisions(0.10, 0.06, 1.0).unwrap(), 0.10 + 0.06);
        assert!(combine_decisions(0.1, 0.1, -0.5).is_err());
    }

    #[test]
    fn perfect_model_net_benefit_is_prevalence() {
        let y = vec![true, false, false, true, false];
        let scores = y.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect();
        let ds = EvaluationDataset::single("m", scores, y).unwrap();
        let curve = sweep(&ds, "m").unwrap();
        for t in default_grid() {
            assert!((net_benefit(&curve, t).unwrap() - 0.4).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn monotone_rescaling_preserves_net_benefit(
            scores in prop::collection::vec(0.0f64..1.0, 2..30),
            seed in any::<u64>(),
            t in 0.05f64..0.95,
        ) {
            let outcomes: Vec<bool> = scores.iter().enumerate().map(|(i, _)| (seed >> (i % 64)) & 1 == 1).collect();
            let ds = EvaluationDataset::single("m", scores.clone(), outcomes.clone()).unwrap();
            // strictly increasing map fixing t, so the flagged set at t is unchanged
            let warp = |x: f64| if x <= t { t * (x / t).powi(2) } else { t + (1.0 - t) * ((x - t) / (1.0 - t)).sqrt() };
            let warped = EvaluationDataset::single("m", scores.iter().map(|&s| warp(s)).collect(), outcomes).unwrap();
            let a = net_benefit(&sweep(&ds, "m").unwrap(), t).unwrap();
            let b = net_benefit(&sweep(&warped, "m").unwrap(), t).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn csv_output_has_one_row_per_threshold() {
        let table = decision_curve(&demo_ds(), &["m"], &[0.15], false).unwrap();
        let mut out = Vec::new();
        table.write_csv(&mut out, 1.0).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "threshold,m,treat_all,treat_none");
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("0.15,0.4558823529"));
    }
}
