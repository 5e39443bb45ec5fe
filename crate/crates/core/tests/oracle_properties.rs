use netbenefit::oracle::{
    brute_force_utility, generate_population, optimal_threshold, verify_expected_nb,
    GeneratorConfig, Individual, ThresholdDistribution, UtilityModel, UtilityPopulation,
    VerifyMode,
};
use netbenefit::TabulatedCurve;
use proptest::prelude::*;

fn config() -> impl Strategy<Value = GeneratorConfig> {
    (
        2usize..=6,
        any::<u64>(),
        0.02f64..0.3,
        0.35f64..0.9,
        0.1f64..5.0,
        0.1f64..5.0,
        -2.0f64..2.0,
    )
        .prop_map(|(n, seed, lower, upper, h_lo, h_hi, d)| GeneratorConfig {
            n,
            seed,
            thresholds: ThresholdDistribution::Uniform { lower, upper },
            utilities: UtilityModel::ThresholdScaled {
                scale: TabulatedCurve::new(vec![lower, upper], vec![h_lo, h_hi]).unwrap(),
                c: 0.0,
                d,
            },
            ..GeneratorConfig::default()
        })
}

fn shifted(pop: &UtilityPopulation, k: f64) -> UtilityPopulation {
    let people = pop
        .individuals()
        .iter()
        .map(|p| Individual {
            a: p.a + k,
            b: p.b + k,
            c: p.c + k,
            d: p.d + k,
            ..p.clone()
        })
        .map(|p| Individual {
            t_star: optimal_threshold(p.a, p.b, p.c, p.d),
            ..p
        })
        .collect();
    UtilityPopulation::new(pop.models().to_vec(), people).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exhaustive_verification_passes(cfg in config()) {
        let pop = generate_population(&cfg).unwrap();
        let r = verify_expected_nb(&pop, "full", "partial", VerifyMode::Exhaustive, 1e-9).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn individual_order_is_irrelevant(cfg in config(), rot in 0usize..6) {
        let pop = generate_population(&cfg).unwrap();
        let mut people = pop.individuals().to_vec();
        let r = rot % people.len();
        people.rotate_left(r);
        let rotated = UtilityPopulation::new(pop.models().to_vec(), people).unwrap();
        let a = brute_force_utility(&pop, "full").unwrap();
        let b = brute_force_utility(&rotated, "full").unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn common_utility_shift_keeps_differences(cfg in config(), k in -10.0f64..10.0) {
        let pop = generate_population(&cfg).unwrap();
        let moved = shifted(&pop, k);
        let delta = |p: &UtilityPopulation| {
            brute_force_utility(p, "full").unwrap() - brute_force_utility(p, "partial").unwrap()
        };
        prop_assert!((delta(&pop) - delta(&moved)).abs() < 1e-9);
    }
}

#[test]
fn population_round_trips_through_json() {
    let pop = generate_population(&GeneratorConfig::default()).unwrap();
    let json = serde_json::to_string(&pop).unwrap();
    assert_eq!(serde_json::from_str::<UtilityPopulation>(&json).unwrap(), pop);
    let cfg: GeneratorConfig = serde_json::from_str(r#"{"n": 4, "seed": 3}"#).unwrap();
    assert_eq!(cfg.n, 4);
    assert!(serde_json::from_str::<GeneratorConfig>(r#"{"size": 4}"#).is_err());
}
