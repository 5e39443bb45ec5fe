use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{optimal_threshold, Individual, UtilityPopulation};
use crate::error::{Error, Result};
use crate::models::sigmoid;
use crate::weighting::{lognormal_parameters, TabulatedCurve};

/// Distribution of the individual optimal thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThresholdDistribution {
    Constant { t: f64 },
    Uniform { lower: f64, upper: f64 },
    /// Mean and sd of the variable itself; draws outside (0, 1) are redrawn.
    LogNormal { mean: f64, sd: f64 },
    Discrete { values: Vec<f64>, probabilities: Vec<f64> },
}

impl ThresholdDistribution {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidGenerator(m.to_string()));
        let inside = |t: f64| t > 0.0 && t < 1.0;
        match self {
            ThresholdDistribution::Constant { t } if !inside(*t) => bad("constant threshold outside (0, 1)"),
            ThresholdDistribution::Uniform { lower, upper }
                if !(*lower >= 0.0 && lower < upper && *upper <= 1.0) =>
            {
                bad("uniform thresholds need 0 <= lower < upper <= 1")
            }
            ThresholdDistribution::LogNormal { mean, sd }
                if !(*sd > 0.0) || !inside(*mean) =>
            {
                bad("log-normal thresholds need a mean in (0, 1) and a positive sd")
            }
            ThresholdDistribution::Discrete {
                values,
                probabilities,
            } => {
                if values.is_empty() || values.len() != probabilities.len() {
                    return bad("discrete thresholds need matching values and probabilities");
                }
                if !values.iter().all(|&t| inside(t)) {
                    return bad("discrete thresholds must lie in (0, 1)");
                }
                let total: f64 = probabilities.iter().sum();
                if probabilities.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                    return bad("discrete probabilities must be nonnegative and sum to 1");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn sample(&self, rng: &mut ChaCha20Rng) -> Result<f64> {
        Ok(match self {
            ThresholdDistribution::Constant { t } => *t,
            ThresholdDistribution::Uniform { lower, upper } => {
                let mut t = rng.random_range(*lower..*upper);
                while t <= 0.0 {
                    t = rng.random_range(*lower..*upper);
                }
                t
            }
            ThresholdDistribution::LogNormal { mean, sd } => {
                let (mu, sigma) = lognormal_parameters(*mean, *sd);
                let dist = LogNormal::new(mu, sigma)
                    .map_err(|e| Error::InvalidGenerator(e.to_string()))?;
                (0..10_000)
                    .map(|_| dist.sample(rng))
                    .find(|t| *t < 1.0)
                    .ok_or_else(|| {
                        Error::InvalidGenerator("log-normal thresholds almost never below 1".into())
                    })?
            }
            ThresholdDistribution::Discrete {
                values,
                probabilities,
            } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = values[values.len() - 1];
                for (v, p) in values.iter().zip(probabilities) {
                    acc += p;
                    if u < acc {
                        pick = *v;
                        break;
                    }
                }
                pick
            }
        })
    }
}

/// How utilities follow from a draw of the threshold distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilityModel {
    /// `a - c = h(t)/t` and `d - b = h(t)/(1-t)` with constant `c` and `d`,
    /// so the optimal threshold is the draw `t` and the harmonic weight is
    /// `h(t)`.
    ThresholdScaled {
        scale: TabulatedCurve,
        c: f64,
        d: f64,
    },
    /// Utilities `g(u)` at the draw `u`; the threshold follows from them.
    Tabulated {
        a: TabulatedCurve,
        b: TabulatedCurve,
        c: TabulatedCurve,
        d: TabulatedCurve,
    },
}

impl UtilityModel {
    pub fn constant_scale(scale: f64) -> Self {
        UtilityModel::ThresholdScaled {
            scale: TabulatedCurve::constant(scale),
            c: 0.0,
            d: 0.0,
        }
    }

    /// (a, b, c, d) at draw `u`.
    pub fn utilities(&self, u: f64) -> Result<[f64; 4]> {
        let out = match self {
            UtilityModel::ThresholdScaled { scale, c, d } => {
                let h = scale.eval(u);
                if !(h > 0.0) {
                    return Err(Error::InvalidGenerator(format!(
                        "utility scale must be positive, got {h} at {u}"
                    )));
                }
                [c + h / u, d - h / (1.0 - u), *c, *d]
            }
            UtilityModel::Tabulated { a, b, c, d } => [a.eval(u), b.eval(u), c.eval(u), d.eval(u)],
        };
        if !(out[0] > out[2]) || !(out[3] > out[1]) {
            return Err(Error::InvalidGenerator(format!(
                "utilities {out:?} at {u} violate a > c and d > b"
            )));
        }
        Ok(out)
    }
}

/// A logistic score over the synthetic features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreModel {
    pub name: String,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl ScoreModel {
    fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.intercept + x.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum::<f64>())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorConfig {
    pub n: usize,
    pub thresholds: ThresholdDistribution,
    pub utilities: UtilityModel,
    /// Outcome model: `y ~ Bernoulli(sigmoid(intercept + coefficients·x))`
    /// with standard normal features; 1 to 3 features.
    pub outcome_intercept: f64,
    pub outcome_coefficients: Vec<f64>,
    pub models: Vec<ScoreModel>,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n: 6,
            thresholds: ThresholdDistribution::Uniform {
                lower: 0.05,
                upper: 0.6,
            },
            utilities: UtilityModel::ThresholdScaled {
                scale: TabulatedCurve {
                    grid: vec![0.05, 0.6],
                    values: vec![0.5, 2.0],
                },
                c: 0.0,
                d: 1.0,
            },
            outcome_intercept: -0.5,
            outcome_coefficients: vec![1.2, 0.8],
            models: vec![
                ScoreModel {
                    name: "full".into(),
                    intercept: -0.5,
                    coefficients: vec![1.2, 0.8],
                },
                ScoreModel {
                    name: "partial".into(),
                    intercept: -0.5,
                    coefficients: vec![1.2, 0.0],
                },
            ],
            seed: 1,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidGenerator("n must be positive".into()));
        }
        let k = self.outcome_coefficients.len();
        if !(1..=3).contains(&k) {
            return Err(Error::InvalidGenerator(format!(
                "between 1 and 3 features are supported, got {k}"
            )));
        }
        if self.models.is_empty() {
            return Err(Error::InvalidGenerator("at least one score model is needed".into()));
        }
        for m in &self.models {
            if m.coefficients.len() != k {
                return Err(Error::InvalidGenerator(format!(
                    "model '{}' has {} coefficients for {k} features",
                    m.name,
                    m.coefficients.len()
                )));
            }
        }
        self.thresholds.validate()
    }
}

/// Draws features, outcomes and scores. Uses its own random stream so the
/// records do not depend on how thresholds are drawn.
pub(crate) fn draw_records(cfg: &GeneratorConfig) -> Vec<(Vec<f64>, bool)> {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let k = cfg.outcome_coefficients.len();
    (0..cfg.n)
        .map(|_| {
            let x: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
            let eta = cfg.outcome_intercept
                + x.iter().zip(&cfg.outcome_coefficients).map(|(a, b)| a * b).sum::<f64>();
            let y = rng.random::<f64>() < sigmoid(eta);
            let scores = cfg.models.iter().map(|m| m.score(&x)).collect();
            (scores, y)
        })
        .collect()
}

/// A population whose thresholds and utilities are drawn independently of
/// scores and outcomes.
pub fn generate_population(cfg: &GeneratorConfig) -> Result<UtilityPopulation> {
    cfg.validate()?;
    let records = draw_records(cfg);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream(2);
    let individuals = records
        .into_iter()
        .map(|(scores, outcome)| {
            let u = cfg.thresholds.sample(&mut rng)?;
            let [a, b, c, d] = cfg.utilities.utilities(u)?;
            Ok(Individual {
                scores,
                outcome,
                weight: 1.0,
                a,
                b,
                c,
                d,
                t_star: optimal_threshold(a, b, c, d),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    UtilityPopulation::new(cfg.models.iter().map(|m| m.name.clone()).collect(), individuals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let cfg = GeneratorConfig::default();
        assert_eq!(generate_population(&cfg).unwrap(), generate_population(&cfg).unwrap());
        let other = GeneratorConfig { seed: 2, ..cfg.clone() };
        assert_ne!(generate_population(&cfg).unwrap(), generate_population(&other).unwrap());
    }

    #[test]
    fn constant_utilities_give_one_threshold() {
        let cfg = GeneratorConfig {
            n: 50,
            utilities: UtilityModel::Tabulated {
                a: TabulatedCurve::constant(3.0),
                b: TabulatedCurve::constant(-1.0),
                c: TabulatedCurve::constant(0.0),
                d: TabulatedCurve::constant(0.0),
            },
            ..GeneratorConfig::default()
        };
        let pop = generate_population(&cfg).unwrap();
        assert!(pop.individuals().iter().all(|i| i.t_star == 0.25));
    }

    #[test]
    fn thresholds_match_utilities() {
        let cfg = GeneratorConfig {
            n: 500,
            thresholds: ThresholdDistribution::LogNormal { mean: 0.1, sd: 0.03 },
            ..GeneratorConfig::default()
        };
        let pop = generate_population(&cfg).unwrap();
        for i in pop.individuals() {
            assert!((optimal_threshold(i.a, i.b, i.c, i.d) - i.t_star).abs() < 1e-12);
            assert!(i.t_star > 0.0 && i.t_star < 1.0);
        }
    }

    #[test]
    fn invalid_configs() {
        let bad = GeneratorConfig {
            thresholds: ThresholdDistribution::Constant { t: 1.5 },
            ..GeneratorConfig::default()
        };
        assert!(matches!(generate_population(&bad), Err(Error::InvalidGenerator(_))));
        let bad = GeneratorConfig {
            outcome_coefficients: vec![1.0; 4],
            ..GeneratorConfig::default()
        };
        assert!(generate_population(&bad).is_err());
    }
}
