//! Per-capita weighted classification quantities as step functions of the
//! decision threshold.
//!
//! A subject is flagged at threshold `t` only when its score is strictly
//! greater than `t`. A score equal to the threshold is *not* flagged. Some
//! decision-curve tools use `>=`; the integral identities relating
//! continuous net benefit to the log-likelihood and Brier score are derived
//! under the strict convention, so it is used everywhere in this crate.

use serde::{Deserialize, Serialize};

use crate::dataset::EvaluationDataset;
use crate::error::{Error, Result};

/// Per-capita confusion cells at one threshold. The four values sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
    pub tn: f64,
}

/// TP(t) and FP(t) as right-continuous step functions.
///
/// `tp_levels[j]` is the value on `[jump_points[j-1], jump_points[j])`, with
/// `tp_levels[0]` covering everything below the smallest score and the last
/// level (always 0) covering everything at or above the largest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationCurve {
    jump_points: Vec<f64>,
    tp_levels: Vec<f64>,
    fp_levels: Vec<f64>,
    prevalence: f64,
}

pub fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::ThresholdOutOfRange(t))
    }
}

/// Builds the classification curve of `model` over `ds`. Tied scores share a
/// single jump point carrying their summed weight.
pub fn sweep(ds: &EvaluationDataset, model: &str) -> Result<ClassificationCurve> {
    let scores = ds.scores(model)?;
    let total = ds.total_weight();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut jump_points: Vec<f64> = Vec::new();
    let mut tp_mass: Vec<f64> = Vec::new();
    let mut fp_mass: Vec<f64> = Vec::new();
    for &i in &order {
        let s = scores[i];
        if jump_points.last() != Some(&s) {
            jump_points.push(s);
            tp_mass.push(0.0);
            fp_mass.push(0.0);
        }
        let w = ds.weights()[i];
        if ds.outcomes()[i] {
            *tp_mass.last_mut().unwrap() += w;
        } else {
            *fp_mass.last_mut().unwrap() += w;
        }
    }

    let k = jump_points.len();
    let mut tp_levels = vec![0.0; k + 1];
    let mut fp_levels = vec![0.0; k + 1];
    let (mut tp_acc, mut fp_acc) = (0.0, 0.0);
    for j in (0..k).rev() {
        tp_acc += tp_mass[j];
        fp_acc += fp_mass[j];
        tp_levels[j] = tp_acc / total;
        fp_levels[j] = fp_acc / total;
    }
    Ok(ClassificationCurve {
        jump_points,
        tp_levels,
        fp_levels,
        prevalence: ds.prevalence(),
    })
}

impl ClassificationCurve {
    /// Policy flagging every subject at every threshold in (0, 1).
    pub fn treat_all(prevalence: f64) -> Self {
        Self {
            jump_points: vec![1.0],
            tp_levels: vec![prevalence, 0.0],
            fp_levels: vec![1.0 - prevalence, 0.0],
            prevalence,
        }
    }

    /// Policy flagging nobody.
    pub fn treat_none(prevalence: f64) -> Self {
        Self {
            jump_points: vec![0.0],
            tp_levels: vec![prevalence, 0.0],
            fp_levels: vec![1.0 - prevalence, 0.0],
            prevalence,
        }
    }

    pub fn jump_points(&self) -> &[f64] {
        &self.jump_points
    }

    pub fn tp_levels(&self) -> &[f64] {
        &self.tp_levels
    }

    pub fn fp_levels(&self) -> &[f64] {
        &self.fp_levels
    }

    pub fn prevalence(&self) -> f64 {
        self.prevalence
    }

    /// Index of the level in force at `t`: the number of jump points `<= t`.
    pub fn level_index(&self, t: f64) -> usize {
        self.jump_points.partition_point(|&s| s <= t)
    }

    /// (TP(t), FP(t)) without range checking.
    pub fn rates_at(&self, t: f64) -> (f64, f64) {
        let j = self.level_index(t);
        (self.tp_levels[j], self.fp_levels[j])
    }

    pub fn confusion_at(&self, t: f64) -> Result<Confusion> {
        check_threshold(t)?;
        let (tp, fp) = self.rates_at(t);
        Ok(Confusion {
            tp,
            fp,
            fn_: self.prevalence - tp,
            tn: 1.0 - self.prevalence - fp,
        })
    }
}
