use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::cnb::{aunb, aunb_alt};
use crate::dataset::EvaluationDataset;
use crate::error::{Error, Result};
use crate::quadrature::QuadConfig;
use crate::weighting::WeightSpec;

/// Bounded search space: 4-subject datasets with outcomes (1, 1, 0, 0),
/// scores from `score_grid`, and two-atom threshold densities with atoms
/// from `threshold_grid` and masses from `mass_grid`; then `random_draws`
/// random instances of up to 8 subjects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WitnessSearch {
    pub score_grid: Vec<f64>,
    pub threshold_grid: Vec<f64>,
    pub mass_grid: Vec<f64>,
    pub random_draws: usize,
    pub seed: u64,
    /// Both differences must exceed this in absolute value.
    pub min_margin: f64,
}

impl Default for WitnessSearch {
    fn default() -> Self {
        Self {
            score_grid: vec![0.05, 0.15, 0.3, 0.5, 0.7, 0.9],
            threshold_grid: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
            mass_grid: vec![0.1, 0.25, 0.5, 0.75, 0.9],
            random_draws: 100_000,
            seed: 7,
            min_margin: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessMargins {
    /// AUNB(model1) - AUNB(model2), positive.
    pub aunb: f64,
    /// AUNB_alt(model1) - AUNB_alt(model2), negative.
    pub aunb_alt: f64,
}

/// An instance on which AUNB ranks `model1` first and AUNB_alt ranks
/// `model2` first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub models: [String; 2],
    pub scores: [Vec<f64>; 2],
    pub outcomes: Vec<bool>,
    pub density: WeightSpec,
    pub aunb: [f64; 2],
    pub aunb_alt: [f64; 2],
    pub margins: WitnessMargins,
    /// `"grid"` or `"random"`.
    pub stage: String,
    pub candidates_examined: u64,
}

impl Witness {
    pub fn dataset(&self) -> Result<EvaluationDataset> {
        EvaluationDataset::new(
            self.models.to_vec(),
            self.scores.to_vec(),
            self.outcomes.clone(),
            None,
        )
    }
}

fn two_atoms(t1: f64, m1: f64, t2: f64) -> WeightSpec {
    WeightSpec::Sum {
        parts: vec![
            WeightSpec::PointMass { t_star: t1, mass: m1 },
            WeightSpec::PointMass {
                t_star: t2,
                mass: 1.0 - m1,
            },
        ],
    }
}

/// Net benefit at `t` with strict flagging, unit weights.
fn nb(scores: &[f64], outcomes: &[bool], t: f64) -> f64 {
    let n = scores.len() as f64;
    let (mut tp, mut fp) = (0.0, 0.0);
    for (&s, &y) in scores.iter().zip(outcomes) {
        if s > t {
            if y {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
        }
    }
    (tp - t / (1.0 - t) * fp) / n
}

/// `(ΔAUNB, ΔAUNB_alt)` for a density of atoms `(t, mass)`, by direct sums.
fn direct_margins(
    s1: &[f64],
    s2: &[f64],
    outcomes: &[bool],
    atoms: &[(f64, f64)],
) -> (f64, f64) {
    atoms.iter().fold((0.0, 0.0), |(a, alt), &(t, m)| {
        let d = nb(s1, outcomes, t) - nb(s2, outcomes, t);
        (a + m * d, alt + m * (1.0 - t) / t * d)
    })
}

fn opposite(d: (f64, f64), min_margin: f64) -> bool {
    d.0 > min_margin && d.1 < -min_margin
}

/// Library values `(AUNB, AUNB_alt)` of both models and whether they rank
/// the models in opposite directions with both gaps above `min_margin`.
pub fn check_witness(
    ds: &EvaluationDataset,
    model1: &str,
    model2: &str,
    density: &WeightSpec,
    min_margin: f64,
) -> Result<([f64; 2], [f64; 2], bool)> {
    let cfg = QuadConfig::default();
    let a = [aunb(ds, model1, density, &cfg)?, aunb(ds, model2, density, &cfg)?];
    let alt = [aunb_alt(ds, model1, density, &cfg)?, aunb_alt(ds, model2, density, &cfg)?];
    let (da, dalt) = (a[0] - a[1], alt[0] - alt[1]);
    let found = da.abs() > min_margin
        && dalt.abs() > min_margin
        && da.signum() != dalt.signum();
    Ok((a, alt, found))
}

fn finish(
    s1: Vec<f64>,
    s2: Vec<f64>,
    outcomes: Vec<bool>,
    atoms: [(f64, f64); 2],
    stage: &str,
    examined: u64,
    min_margin: f64,
) -> Result<Option<Witness>> {
    let density = two_atoms(atoms[0].0, atoms[0].1, atoms[1].0);
    let models = ["model1".to_string(), "model2".to_string()];
    let ds = EvaluationDataset::new(models.to_vec(), vec![s1.clone(), s2.clone()], outcomes.clone(), None)?;
    let (a, alt, found) = check_witness(&ds, &models[0], &models[1], &density, min_margin)?;
    let direct = direct_margins(&s1, &s2, &outcomes, &atoms);
    let margins = WitnessMargins {
        aunb: a[0] - a[1],
        aunb_alt: alt[0] - alt[1],
    };
    let agree = (margins.aunb - direct.0).abs() < 1e-12 && (margins.aunb_alt - direct.1).abs() < 1e-12;
    if !found || !agree || !opposite((margins.aunb, margins.aunb_alt), min_margin) {
        return Ok(None);
    }
    Ok(Some(Witness {
        models,
        scores: [s1, s2],
        outcomes,
        density,
        aunb: a,
        aunb_alt: alt,
        margins,
        stage: stage.to_string(),
        candidates_examined: examined,
    }))
}

/// Searches for a dataset and a two-atom threshold density on which AUNB
/// and AUNB_alt disagree about which of two models is better. `Ok(None)`
/// when the budget is exhausted.
pub fn aunb_disagreement_witness(search: &WitnessSearch) -> Result<Option<Witness>> {
    let inside = |v: &f64| *v > 0.0 && *v < 1.0;
    if !search.threshold_grid.iter().all(inside)
        || !search.mass_grid.iter().all(inside)
        || !search.score_grid.iter().all(|s| (0.0..=1.0).contains(s))
        || !(search.min_margin > 0.0)
    {
        return Err(Error::InvalidArgument(
            "witness grids must lie in (0, 1) and the margin must be positive".into(),
        ));
    }
    let outcomes = vec![true, true, false, false];
    let g = &search.score_grid;
    let k = g.len();
    let vectors: Vec<Vec<f64>> = (0..k.pow(4))
        .map(|mut code| {
            (0..4)
                .map(|_| {
                    let v = g[code % k];
                    code /= k;
                    v
                })
                .collect()
        })
        .collect();
    let mut examined = 0u64;
    let ts = &search.threshold_grid;
    for (i, &t1) in ts.iter().enumerate() {
        for &t2 in &ts[i + 1..] {
            let nb1: Vec<[f64; 2]> = vectors
                .iter()
                .map(|s| [nb(s, &outcomes, t1), nb(s, &outcomes, t2)])
                .collect();
            for &m1 in &search.mass_grid {
                let atoms = [(t1, m1), (t2, 1.0 - m1)];
                for (a, na) in nb1.iter().enumerate() {
                    for (b, nbv) in nb1.iter().enumerate() {
                        examined += 1;
                        let d = [na[0] - nbv[0], na[1] - nbv[1]];
                        let da = m1 * d[0] + (1.0 - m1) * d[1];
                        let dalt = m1 * (1.0 - t1) / t1 * d[0] + (1.0 - m1) * (1.0 - t2) / t2 * d[1];
                        if opposite((da, dalt), search.min_margin) {
                            let w = finish(
                                vectors[a].clone(),
                                vectors[b].clone(),
                                outcomes.clone(),
                                atoms,
                                "grid",
                                examined,
                                search.min_margin,
                            )?;
                            if w.is_some() {
                                return Ok(w);
                            }
                        }
                    }
                }
            }
        }
    }

    let mut rng = ChaCha20Rng::seed_from_u64(search.seed);
    for _ in 0..search.random_draws {
        examined += 1;
        let n = rng.random_range(4..=8);
        let outcomes: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let s1: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let s2: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let mut t = [rng.random_range(0.01..0.99), rng.random_range(0.01..0.99)];
        t.sort_by(f64::total_cmp);
        let m1 = rng.random_range(0.01..0.99);
        let atoms = [(t[0], m1), (t[1], 1.0 - m1)];
        if t[0] < t[1] && opposite(direct_margins(&s1, &s2, &outcomes, &atoms), search.min_margin) {
            if let Some(w) = finish(s1, s2, outcomes, atoms, "random", examined, search.min_margin)? {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Uniform};

    #[test]
    fn finds_verified_witness() {
        let w = aunb_disagreement_witness(&WitnessSearch::default()).unwrap().unwrap();
        assert_eq!(w.stage, "grid");
        assert!(w.margins.aunb > 1e-6 && w.margins.aunb_alt < -1e-6);
        let ds = w.dataset().unwrap();
        let (_, _, found) = check_witness(&ds, "model1", "model2", &w.density, 1e-6).unwrap();
        assert!(found);
        let json = serde_json::to_string(&w).unwrap();
        let back: Witness = serde_json::from_str(&json).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn identical_models_never_witness() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let density = two_atoms(0.2, 0.4, 0.6);
        for _ in 0..50 {
            let s: Vec<f64> = (0..6).map(|_| rng.random()).collect();
            let y: Vec<bool> = (0..6).map(|_| rng.random()).collect();
            let ds = EvaluationDataset::new(vec!["a".into(), "b".into()], vec![s.clone(), s], y, None)
                .unwrap();
            assert!(!check_witness(&ds, "a", "b", &density, 1e-6).unwrap().2);
        }
    }

    #[test]
    fn point_mass_never_witness() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let u = Uniform::new(0.02, 0.98).unwrap();
        for _ in 0..200 {
            let s1: Vec<f64> = (0..6).map(|_| rng.random()).collect();
            let s2: Vec<f64> = (0..6).map(|_| rng.random()).collect();
            let y: Vec<bool> = (0..6).map(|_| rng.random()).collect();
            let ds = EvaluationDataset::new(vec!["a".into(), "b".into()], vec![s1, s2], y, None).unwrap();
            let density = WeightSpec::PointMass {
                t_star: u.sample(&mut rng),
                mass: 1.0,
            };
            assert!(!check_witness(&ds, "a", "b", &density, 0.0).unwrap().2);
        }
    }
}
