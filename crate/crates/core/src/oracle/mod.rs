//! Brute-force utility oracle over synthetic populations in which every
//! individual carries their own utilities `(a, b, c, d)` and optimal
//! threshold `t* = (d - b) / ((a - c) + (d - b))`.
//!
//! Utilities: `a` treated with the event, `b` treated without, `c`
//! untreated with, `d` untreated without.

mod population;
mod scenario;
mod verify;
mod witness;

pub use population::{
    generate_population, GeneratorConfig, ScoreModel, ThresholdDistribution, UtilityModel,
};
pub use scenario::{two_group_scenario, GroupSummary, TwoGroupConfig, TwoGroupReport};
pub use verify::{verify_expected_nb, VerificationReport, VerifyMode, MAX_EXHAUSTIVE};
pub use witness::{
    aunb_disagreement_witness, check_witness, Witness, WitnessMargins, WitnessSearch,
};

use serde::{Deserialize, Serialize};

use crate::dataset::EvaluationDataset;
use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Tolerance for the stored `t_star` against the threshold formula.
const T_STAR_TOL: f64 = 1e-12;

pub fn optimal_threshold(a: f64, b: f64, c: f64, d: f64) -> f64 {
    (d - b) / ((a - c) + (d - b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    /// One score per model of the population, in model order.
    pub scores: Vec<f64>,
    pub outcome: bool,
    pub weight: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub t_star: f64,
}

impl Individual {
    /// Utility of a decision for this individual's utilities and an outcome.
    pub fn utility(&self, flagged: bool, outcome: bool) -> f64 {
        match (flagged, outcome) {
            (true, true) => self.a,
            (true, false) => self.b,
            (false, true) => self.c,
            (false, false) => self.d,
        }
    }

    /// `a - c`, the benefit of treating an individual with the event.
    pub fn tp_benefit(&self) -> f64 {
        self.a - self.c
    }

    /// `d - b`, the benefit of not treating an individual without it.
    pub fn fp_harm(&self) -> f64 {
        self.d - self.b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityPopulation {
    models: Vec<String>,
    individuals: Vec<Individual>,
}

impl UtilityPopulation {
    pub fn new(models: Vec<String>, individuals: Vec<Individual>) -> Result<Self> {
        if individuals.is_empty() {
            return Err(Error::EmptyInput);
        }
        if models.is_empty() {
            return Err(Error::InvalidDataset("population needs a model".into()));
        }
        let mut total = 0.0;
        for (i, ind) in individuals.iter().enumerate() {
            let bad = |msg: String| Err(Error::InvalidDataset(format!("individual {i}: {msg}")));
            if ind.scores.len() != models.len() {
                return bad(format!("{} scores for {} models", ind.scores.len(), models.len()));
            }
            if ind.scores.iter().any(|s| !(0.0..=1.0).contains(s)) {
                return bad("scores must lie in [0, 1]".into());
            }
            if !(ind.weight >= 0.0) || !ind.weight.is_finite() {
                return bad(format!("weight {} must be finite and nonnegative", ind.weight));
            }
            if !(ind.a > ind.c) || !(ind.d > ind.b) {
                return bad("utilities must satisfy a > c and d > b".into());
            }
            let t = optimal_threshold(ind.a, ind.b, ind.c, ind.d);
            if (t - ind.t_star).abs() > T_STAR_TOL {
                return bad(format!("t_star {} disagrees with utilities ({t})", ind.t_star));
            }
            total += ind.weight;
        }
        if !(total > 0.0) {
            return Err(Error::InvalidDataset("total weight must be positive".into()));
        }
        Ok(Self {
            models,
            individuals,
        })
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn individuals(&self) -> &[Individual] {
        &self.individuals
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn model_index(&self, model: &str) -> Result<usize> {
        self.models
            .iter()
            .position(|m| m == model)
            .ok_or_else(|| Error::UnknownModel(model.to_string()))
    }

    pub fn total_weight(&self) -> f64 {
        self.individuals.iter().map(|i| i.weight).collect::<CompensatedSum>().value()
    }

    /// Scores, outcomes and weights, without the utilities.
    pub fn to_dataset(&self) -> Result<EvaluationDataset> {
        let scores = (0..self.models.len())
            .map(|k| self.individuals.iter().map(|i| i.scores[k]).collect())
            .collect();
        EvaluationDataset::new(
            self.models.clone(),
            scores,
            self.individuals.iter().map(|i| i.outcome).collect(),
            Some(self.individuals.iter().map(|i| i.weight).collect()),
        )
    }

    /// Weighted mean utility when the record (scores, outcome, weight) of
    /// individual `assignment[i]` meets the utilities of individual `i`.
    fn assigned_utility(&self, model: usize, assignment: &[usize], total: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for (i, &r) in assignment.iter().enumerate() {
            let rec = &self.individuals[r];
            let me = &self.individuals[i];
            let flagged = rec.scores[model] > me.t_star;
            acc.add(rec.weight * me.utility(flagged, rec.outcome));
        }
        acc.value() / total
    }
}

/// Weighted mean utility when each individual is treated iff their score
/// is strictly above their own threshold.
pub fn brute_force_utility(pop: &UtilityPopulation, model: &str) -> Result<f64> {
    let k = pop.model_index(model)?;
    let identity: Vec<usize> = (0..pop.len()).collect();
    Ok(pop.assigned_utility(k, &identity, pop.total_weight()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn person(score: f64, outcome: bool, t: f64, a: f64, b: f64) -> Individual {
        Individual {
            scores: vec![score],
            outcome,
            weight: 1.0,
            a,
            b,
            c: 0.0,
            d: 0.0,
            t_star: t,
        }
    }

    #[test]
    fn single_individual_utilities() {
        let flagged = person(0.6, true, 0.5, 1.0, -1.0);
        let pop = UtilityPopulation::new(vec!["m".into()], vec![flagged.clone()]).unwrap();
        assert_eq!(brute_force_utility(&pop, "m").unwrap(), 1.0);
        let missed = person(0.4, true, 0.5, 1.0, -1.0);
        let pop = UtilityPopulation::new(vec!["m".into()], vec![missed.clone()]).unwrap();
        assert_eq!(brute_force_utility(&pop, "m").unwrap(), 0.0);
        let pop = UtilityPopulation::new(vec!["m".into()], vec![flagged, missed]).unwrap();
        assert_eq!(brute_force_utility(&pop, "m").unwrap(), 0.5);
    }

    #[test]
    fn rejects_inconsistent_threshold() {
        let p = person(0.6, true, 0.4, 1.0, -1.0);
        assert!(UtilityPopulation::new(vec!["m".into()], vec![p]).is_err());
        let p = person(0.6, true, 0.5, -1.0, 1.0);
        assert!(UtilityPopulation::new(vec!["m".into()], vec![p]).is_err());
    }

    #[test]
    fn order_does_not_matter() {
        let people = vec![
            person(0.6, true, 0.5, 1.0, -1.0),
            person(0.2, false, 0.25, 3.0, -1.0),
            person(0.9, false, 0.5, 2.0, -2.0),
        ];
        let pop = UtilityPopulation::new(vec!["m".into()], people.clone()).unwrap();
        let mut reversed = people;
        reversed.reverse();
        let rev = UtilityPopulation::new(vec!["m".into()], reversed).unwrap();
        assert_eq!(
            brute_force_utility(&pop, "m").unwrap(),
            brute_force_utility(&rev, "m").unwrap()
        );
    }
}
