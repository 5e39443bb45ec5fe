use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::UtilityPopulation;
use crate::cnb::{continuous_net_benefit, expected_net_benefit};
use crate::error::{Error, Result};
use crate::quadrature::QuadConfig;
use crate::sum::CompensatedSum;
use crate::weighting::{TabulatedCurve, WeightSpec};

/// Largest population enumerated exhaustively (8! = 40320 permutations).
pub const MAX_EXHAUSTIVE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum VerifyMode {
    /// Every permutation of the records against the fixed utilities.
    Exhaustive,
    /// `draws` seeded random permutations; passes when the gap is within
    /// `tolerance + z · standard error`.
    MonteCarlo { draws: usize, seed: u64, z: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub mode: VerifyMode,
    pub model1: String,
    pub model2: String,
    pub n: usize,
    pub permutations: u64,
    /// Mean over permutations of U(model1) - U(model2).
    pub mean_delta_utility: f64,
    /// Difference of expected net benefits under the empirical threshold
    /// distribution.
    pub delta_expected_nb: f64,
    /// `"harmonic_utilities"` when every threshold has a single pair of
    /// utilities, `"atoms"` otherwise.
    pub route: String,
    pub abs_diff: f64,
    pub standard_error: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares the permutation-averaged brute-force utility difference of two
/// models with the expected net benefit difference under the empirical
/// distribution of thresholds and utilities.
pub fn verify_expected_nb(
    pop: &UtilityPopulation,
    model1: &str,
    model2: &str,
    mode: VerifyMode,
    tolerance: f64,
) -> Result<VerificationReport> {
    let k1 = pop.model_index(model1)?;
    let k2 = pop.model_index(model2)?;
    if !(tolerance >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tolerance} must be >= 0")));
    }
    let n = pop.len();
    let (route, delta_expected_nb) = expected_difference(pop, model1, model2)?;

    let (mean, permutations, se) = match mode {
        VerifyMode::Exhaustive => {
            if n > MAX_EXHAUSTIVE {
                return Err(Error::ExhaustiveTooLarge(n));
            }
            let (sum, count) = exhaustive_sum(pop, k1, k2);
            (sum / count as f64, count, None)
        }
        VerifyMode::MonteCarlo { draws, seed, z } => {
            if draws < 2 || !(z >= 0.0) {
                return Err(Error::InvalidArgument(
                    "Monte-Carlo mode needs at least 2 draws and z >= 0".into(),
                ));
            }
            let values = monte_carlo(pop, k1, k2, draws, seed);
            let mean = values.iter().copied().collect::<CompensatedSum>().value() / draws as f64;
            let var = values
                .iter()
                .map(|v| (v - mean).powi(2))
                .collect::<CompensatedSum>()
                .value()
                / (draws - 1) as f64;
            let se = (var / draws as f64).sqrt();
            (mean, draws as u64, Some(se))
        }
    };
    let abs_diff = (mean - delta_expected_nb).abs();
    let allowed = match (mode, se) {
        (VerifyMode::MonteCarlo { z, .. }, Some(se)) => tolerance + z * se,
        _ => tolerance,
    };
    Ok(VerificationReport {
        mode,
        model1: model1.to_string(),
        model2: model2.to_string(),
        n,
        permutations,
        mean_delta_utility: mean,
        delta_expected_nb,
        route: route.to_string(),
        abs_diff,
        standard_error: se,
        tolerance,
        pass: abs_diff <= allowed,
    })
}

fn delta_utility(pop: &UtilityPopulation, k1: usize, k2: usize, assignment: &[usize]) -> f64 {
    let people = pop.individuals();
    let mut acc = CompensatedSum::new();
    for (i, &r) in assignment.iter().enumerate() {
        let rec = &people[r];
        let me = &people[i];
        let f1 = rec.scores[k1] > me.t_star;
        let f2 = rec.scores[k2] > me.t_star;
        if f1 != f2 {
            acc.add(rec.weight * (me.utility(f1, rec.outcome) - me.utility(f2, rec.outcome)));
        }
    }
    acc.value() / pop.total_weight()
}

/// Sum of ΔU over all n! permutations, split into n chunks by the record
/// assigned to the first individual.
fn exhaustive_sum(pop: &UtilityPopulation, k1: usize, k2: usize) -> (f64, u64) {
    let n = pop.len();
    let chunks: Vec<(CompensatedSum, u64)> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut rest: Vec<usize> = (0..n).filter(|&r| r != first).collect();
            let mut acc = CompensatedSum::new();
            let mut count = 0u64;
            let mut assignment = Vec::with_capacity(n);
            heap_permutations(&mut rest, |perm| {
                assignment.clear();
                assignment.push(first);
                assignment.extend_from_slice(perm);
                acc.add(delta_utility(pop, k1, k2, &assignment));
                count += 1;
            });
            (acc, count)
        })
        .collect();
    let mut total = CompensatedSum::new();
    let mut count = 0;
    for (acc, c) in chunks {
        total.merge(&acc);
        count += c;
    }
    (total.value(), count)
}

/// Heap's algorithm; calls `visit` once per permutation of `items`.
fn heap_permutations<F: FnMut(&[usize])>(items: &mut [usize], mut visit: F) {
    let n = items.len();
    let mut c = vec![0usize; n];
    visit(items);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn monte_carlo(pop: &UtilityPopulation, k1: usize, k2: usize, draws: usize, seed: u64) -> Vec<f64> {
    let n = pop.len();
    (0..draws)
        .into_par_iter()
        .map(|d| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(d as u64);
            let mut assignment: Vec<usize> = (0..n).collect();
            assignment.shuffle(&mut rng);
            delta_utility(pop, k1, k2, &assignment)
        })
        .collect()
}

/// Threshold groups: distinct t* with their count and utility differences.
struct ThresholdGroup {
    t: f64,
    count: usize,
    tp_benefit: f64,
    fp_harm: f64,
    consistent: bool,
    harmonic_mass: CompensatedSum,
}

fn expected_difference(
    pop: &UtilityPopulation,
    model1: &str,
    model2: &str,
) -> Result<(&'static str, f64)> {
    let n = pop.len() as f64;
    let mut sorted: Vec<_> = pop.individuals().iter().collect();
    sorted.sort_by(|a, b| a.t_star.total_cmp(&b.t_star));
    let mut groups: Vec<ThresholdGroup> = Vec::new();
    for ind in sorted {
        let h = 1.0 / (1.0 / ind.tp_benefit() + 1.0 / ind.fp_harm());
        match groups.last_mut() {
            Some(g) if g.t == ind.t_star => {
                g.count += 1;
                g.consistent &= g.tp_benefit == ind.tp_benefit() && g.fp_harm == ind.fp_harm();
                g.harmonic_mass.add(h / n);
            }
            _ => {
                let mut harmonic_mass = CompensatedSum::new();
                harmonic_mass.add(h / n);
                groups.push(ThresholdGroup {
                    t: ind.t_star,
                    count: 1,
                    tp_benefit: ind.tp_benefit(),
                    fp_harm: ind.fp_harm(),
                    consistent: true,
                    harmonic_mass,
                });
            }
        }
    }

    let ds = pop.to_dataset()?;
    let cfg = QuadConfig::default();
    if groups.iter().all(|g| g.consistent) {
        let density = point_masses(groups.iter().map(|g| (g.t, g.count as f64 / n)));
        let grid: Vec<f64> = groups.iter().map(|g| g.t).collect();
        let tp = TabulatedCurve::new(grid.clone(), groups.iter().map(|g| g.tp_benefit).collect())?;
        let fp = TabulatedCurve::new(grid, groups.iter().map(|g| g.fp_harm).collect())?;
        let e1 = expected_net_benefit(&ds, model1, &density, &tp, &fp, &cfg)?.value;
        let e2 = expected_net_benefit(&ds, model2, &density, &tp, &fp, &cfg)?.value;
        Ok(("harmonic_utilities", e1 - e2))
    } else {
        let spec = point_masses(groups.iter().map(|g| (g.t, g.harmonic_mass.value())));
        let e1 = continuous_net_benefit(&ds, model1, &spec, &cfg)?.value;
        let e2 = continuous_net_benefit(&ds, model2, &spec, &cfg)?.value;
        Ok(("atoms", e1 - e2))
    }
}

fn point_masses(atoms: impl Iterator<Item = (f64, f64)>) -> WeightSpec {
    WeightSpec::Sum {
        parts: atoms
            .map(|(t_star, mass)| WeightSpec::PointMass { t_star, mass })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{generate_population, GeneratorConfig, Individual, UtilityModel};
    use super::*;
    use crate::weighting::TabulatedCurve;

    #[test]
    fn heap_visits_every_permutation_once() {
        let mut items: Vec<usize> = (0..5).collect();
        let mut seen = std::collections::BTreeSet::new();
        heap_permutations(&mut items, |p| {
            assert!(seen.insert(p.to_vec()));
        });
        assert_eq!(seen.len(), 120);
    }

    #[test]
    fn exhaustive_n6_matches() {
        let pop = generate_population(&GeneratorConfig::default()).unwrap();
        let r = verify_expected_nb(&pop, "full", "partial", VerifyMode::Exhaustive, 1e-9).unwrap();
        assert_eq!(r.permutations, 720);
        assert_eq!(r.route, "harmonic_utilities");
        assert!(r.abs_diff < 1e-9, "{r:?}");
        assert!(r.pass);
    }

    #[test]
    fn exhaustive_with_mixed_utilities() {
        let cfg = GeneratorConfig {
            n: 7,
            thresholds: super::super::ThresholdDistribution::Discrete {
                values: vec![0.2, 0.4],
                probabilities: vec![0.5, 0.5],
            },
            utilities: UtilityModel::Tabulated {
                a: TabulatedCurve::new(vec![0.2, 0.4], vec![4.0, 3.0]).unwrap(),
                b: TabulatedCurve::constant(-1.0),
                c: TabulatedCurve::constant(0.0),
                d: TabulatedCurve::new(vec![0.2, 0.4], vec![0.0, 1.0]).unwrap(),
            },
            seed: 9,
            ..GeneratorConfig::default()
        };
        let pop = generate_population(&cfg).unwrap();
        let r = verify_expected_nb(&pop, "full", "partial", VerifyMode::Exhaustive, 1e-9).unwrap();
        assert!(r.pass, "{r:?}");
        // Same thresholds with different utilities need the atom route.
        let mut people = pop.individuals().to_vec();
        let p0 = &mut people[0];
        p0.a = p0.c + 2.0 * p0.tp_benefit();
        p0.b = p0.d - 2.0 * p0.fp_harm();
        let pop = UtilityPopulation::new(pop.models().to_vec(), people).unwrap();
        let r = verify_expected_nb(&pop, "full", "partial", VerifyMode::Exhaustive, 1e-9).unwrap();
        assert_eq!(r.route, "atoms");
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn shared_threshold_has_no_permutation_dependence() {
        let people: Vec<Individual> = [(0.3, true, 0.6), (0.7, false, 0.1), (0.55, true, 0.45)]
            .iter()
            .map(|&(s1, y, s2)| Individual {
                scores: vec![s1, s2],
                outcome: y,
                weight: 1.0,
                a: 3.0,
                b: -1.0,
                c: 0.0,
                d: 0.0,
                t_star: 0.25,
            })
            .collect();
        let pop = UtilityPopulation::new(vec!["m1".into(), "m2".into()], people).unwrap();
        let r = verify_expected_nb(&pop, "m1", "m2", VerifyMode::Exhaustive, 1e-15).unwrap();
        assert!(r.pass, "{r:?}");
        let ids: Vec<usize> = (0..3).collect();
        assert_eq!(r.mean_delta_utility, delta_utility(&pop, 0, 1, &ids));
    }

    #[test]
    fn exhaustive_refuses_large_population() {
        let pop = generate_population(&GeneratorConfig {
            n: 9,
            ..GeneratorConfig::default()
        })
        .unwrap();
        let err = verify_expected_nb(&pop, "full", "partial", VerifyMode::Exhaustive, 1e-9);
        assert!(matches!(err, Err(Error::ExhaustiveTooLarge(9))));
    }

    #[test]
    fn monte_carlo_small() {
        let pop = generate_population(&GeneratorConfig {
            n: 300,
            ..GeneratorConfig::default()
        })
        .unwrap();
        let mode = VerifyMode::MonteCarlo {
            draws: 100,
            seed: 3,
            z: 3.0,
        };
        let r = verify_expected_nb(&pop, "full", "partial", mode, 0.0).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.standard_error.unwrap() > 0.0);
        let again = verify_expected_nb(&pop, "full", "partial", mode, 0.0).unwrap();
        assert_eq!(r, again);
    }
}
