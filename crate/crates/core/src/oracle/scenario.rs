use serde::{Deserialize, Serialize};

use super::population::draw_records;
use super::{optimal_threshold, GeneratorConfig, Individual, UtilityPopulation};
use crate::cnb::expected_net_benefit;
use crate::error::{Error, Result};
use crate::quadrature::QuadConfig;
use crate::sum::CompensatedSum;
use crate::weighting::{harmonic_weight, TabulatedCurve, WeightSpec};

/// Two groups with fixed thresholds and utility magnitudes. A group with
/// scale `h` and threshold `t` has `a - c = h/t` and `d - b = h/(1-t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoGroupConfig {
    pub n_per_group: usize,
    pub g1_threshold: f64,
    pub g1_scale: f64,
    pub g2_threshold: f64,
    pub g2_scale: f64,
    pub seed: u64,
}

impl Default for TwoGroupConfig {
    fn default() -> Self {
        Self {
            n_per_group: 500,
            g1_threshold: 0.10,
            g1_scale: 0.01,
            g2_threshold: 0.11,
            g2_scale: 100.0,
            seed: 11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub name: String,
    pub threshold: f64,
    pub tp_benefit: f64,
    pub fp_harm: f64,
    /// Share of the population in the group.
    pub density: f64,
    pub harmonic_weight: f64,
    /// density × harmonic weight.
    pub weight: f64,
    /// The group's part of the brute-force U(model1) - U(model2).
    pub delta_utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoGroupReport {
    pub config: TwoGroupConfig,
    pub models: [String; 2],
    pub groups: [GroupSummary; 2],
    /// ω(G2) / ω(G1).
    pub weight_ratio: f64,
    pub delta_utility: f64,
    /// |ΔU(G2)| / (|ΔU(G1)| + |ΔU(G2)|).
    pub g2_share: f64,
    /// Expected net benefit of both models; `None` when the thresholds coincide.
    pub expected_nb: Option<[f64; 2]>,
    pub population: UtilityPopulation,
}

/// A population of two groups with nearby thresholds but utilities of very
/// different size, with the group decomposition of the weight and of the
/// brute-force utility difference between the two default score models.
pub fn two_group_scenario(cfg: &TwoGroupConfig) -> Result<TwoGroupReport> {
    let inside = |t: f64| t > 0.0 && t < 1.0;
    if cfg.n_per_group == 0
        || !inside(cfg.g1_threshold)
        || !inside(cfg.g2_threshold)
        || !(cfg.g1_scale > 0.0 && cfg.g2_scale > 0.0)
    {
        return Err(Error::InvalidGenerator(
            "two groups need members, thresholds in (0, 1) and positive scales".into(),
        ));
    }
    let gen = GeneratorConfig {
        n: 2 * cfg.n_per_group,
        seed: cfg.seed,
        ..GeneratorConfig::default()
    };
    let models = [gen.models[0].name.clone(), gen.models[1].name.clone()];
    let groups = [(cfg.g1_threshold, cfg.g1_scale), (cfg.g2_threshold, cfg.g2_scale)];
    let individuals: Vec<Individual> = draw_records(&gen)
        .into_iter()
        .enumerate()
        .map(|(i, (scores, outcome))| {
            let (t, h) = groups[i / cfg.n_per_group];
            let (a, b, c, d) = (h / t, -h / (1.0 - t), 0.0, 0.0);
            Individual {
                scores,
                outcome,
                weight: 1.0,
                a,
                b,
                c,
                d,
                t_star: optimal_threshold(a, b, c, d),
            }
        })
        .collect();
    let population = UtilityPopulation::new(models.to_vec(), individuals)?;

    let n = population.len() as f64;
    let mut delta = [CompensatedSum::new(), CompensatedSum::new()];
    for (i, p) in population.individuals().iter().enumerate() {
        let f1 = p.scores[0] > p.t_star;
        let f2 = p.scores[1] > p.t_star;
        delta[i / cfg.n_per_group].add((p.utility(f1, p.outcome) - p.utility(f2, p.outcome)) / n);
    }
    let summaries = [0, 1].map(|g| {
        let p = &population.individuals()[g * cfg.n_per_group];
        let hw = harmonic_weight(p.tp_benefit(), p.fp_harm()).unwrap_or(0.0);
        GroupSummary {
            name: format!("G{}", g + 1),
            threshold: p.t_star,
            tp_benefit: p.tp_benefit(),
            fp_harm: p.fp_harm(),
            density: 0.5,
            harmonic_weight: hw,
            weight: 0.5 * hw,
            delta_utility: delta[g].value(),
        }
    });
    let [d1, d2] = [summaries[0].delta_utility, summaries[1].delta_utility];
    let g2_share = if d1 == 0.0 && d2 == 0.0 {
        0.0
    } else {
        d2.abs() / (d1.abs() + d2.abs())
    };

    let expected_nb = if cfg.g1_threshold == cfg.g2_threshold {
        None
    } else {
        let mut sorted = summaries.clone();
        sorted.sort_by(|a, b| a.threshold.total_cmp(&b.threshold));
        let grid: Vec<f64> = sorted.iter().map(|s| s.threshold).collect();
        let tp = TabulatedCurve::new(grid.clone(), sorted.iter().map(|s| s.tp_benefit).collect())?;
        let fp = TabulatedCurve::new(grid, sorted.iter().map(|s| s.fp_harm).collect())?;
        let density = WeightSpec::Sum {
            parts: sorted
                .iter()
                .map(|s| WeightSpec::PointMass {
                    t_star: s.threshold,
                    mass: s.density,
                })
                .collect(),
        };
        let ds = population.to_dataset()?;
        let qc = QuadConfig::default();
        Some([
            expected_net_benefit(&ds, &models[0], &density, &tp, &fp, &qc)?.value,
            expected_net_benefit(&ds, &models[1], &density, &tp, &fp, &qc)?.value,
        ])
    };

    Ok(TwoGroupReport {
        config: cfg.clone(),
        models,
        weight_ratio: summaries[1].weight / summaries[0].weight,
        groups: summaries,
        delta_utility: d1 + d2,
        g2_share,
        expected_nb,
        population,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_concentrates_on_second_group() {
        let r = two_group_scenario(&TwoGroupConfig::default()).unwrap();
        // Harmonic weight of (h/t, h/(1-t)) is h, so the ratio is the scale ratio.
        assert!((r.weight_ratio - 1e4).abs() < 1e-6, "{}", r.weight_ratio);
        assert!((r.groups[0].harmonic_weight - 0.01).abs() < 1e-15);
        assert!(r.g2_share > 0.99, "{r:?}");
        let ratio_from_utilities = harmonic_weight(r.groups[1].tp_benefit, r.groups[1].fp_harm).unwrap()
            / harmonic_weight(r.groups[0].tp_benefit, r.groups[0].fp_harm).unwrap();
        assert!((ratio_from_utilities - r.weight_ratio).abs() < 1e-9);
    }

    #[test]
    fn equal_scales_give_equal_weights() {
        let cfg = TwoGroupConfig {
            g1_scale: 3.0,
            g2_scale: 3.0,
            ..TwoGroupConfig::default()
        };
        let r = two_group_scenario(&cfg).unwrap();
        assert!((r.weight_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_serializes() {
        let r = two_group_scenario(&TwoGroupConfig {
            n_per_group: 3,
            ..TwoGroupConfig::default()
        })
        .unwrap();
        let json = serde_json::to_string(&r).unwrap();
        let back: TwoGroupReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.population, r.population);
    }
}
