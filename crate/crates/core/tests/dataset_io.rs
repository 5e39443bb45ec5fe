use netbenefit::{decision_curve, EvaluationDataset, Schema};
use proptest::prelude::*;

fn dataset() -> impl Strategy<Value = EvaluationDataset> {
    prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0, any::<bool>(), 0.01f64..50.0), 1..40)
        .prop_map(|rows| {
            EvaluationDataset::new(
                vec!["first".into(), "second".into()],
                vec![
                    rows.iter().map(|r| r.0).collect(),
                    rows.iter().map(|r| r.1).collect(),
                ],
                rows.iter().map(|r| r.2).collect(),
                Some(rows.iter().map(|r| r.3).collect()),
            )
            .unwrap()
        })
}

proptest! {
    #[test]
    fn written_csv_reloads_bit_identically(ds in dataset()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        ds.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
        let back = EvaluationDataset::load_csv(&path, &ds.written_schema()).unwrap();
        prop_assert_eq!(&back, &ds);
        for m in ds.models() {
            let a: Vec<u64> = ds.scores(m).unwrap().iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = back.scores(m).unwrap().iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn prevalence_ignores_weight_scale(ds in dataset(), k in 0.001f64..1000.0) {
        let scaled = ds.rescale_weights(k).unwrap();
        prop_assert!((scaled.prevalence() - ds.prevalence()).abs() < 1e-12);
    }

    #[test]
    fn perfect_model_earns_prevalence(y in prop::collection::vec(any::<bool>(), 1..40)) {
        let f = y.iter().map(|&o| o as u8 as f64).collect();
        let ds = EvaluationDataset::single("perfect", f, y).unwrap();
        let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let table = decision_curve(&ds, &["perfect"], &grid, false).unwrap();
        let pi = ds.prevalence();
        for nb in &table.column("perfect").unwrap().net_benefit {
            prop_assert!((nb - pi).abs() < 1e-12);
        }
    }
}

#[test]
fn schema_with_reordered_columns_and_default_weights() {
    let csv = "id,p_b,death,p_a\n1,0.3,1,0.9\n2,0.8,0,0.2\n";
    let schema: Schema = "outcome=death,scores=p_a:p_b".parse().unwrap();
    let ds = EvaluationDataset::read_csv(csv.as_bytes(), &schema).unwrap();
    assert_eq!(ds.models(), ["p_a", "p_b"]);
    assert_eq!(ds.scores("p_a").unwrap(), [0.9, 0.2]);
    assert_eq!(ds.weights(), [1.0, 1.0]);
    assert_eq!(ds.outcomes(), [true, false]);
}

#[test]
fn bad_cells_name_their_position() {
    let schema: Schema = "outcome=y,scores=p".parse().unwrap();
    let err = EvaluationDataset::read_csv("y,p\n1,0.5\n0,1.5\n".as_bytes(), &schema).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains('2') || msg.contains('3'), "{msg}");
    assert!(EvaluationDataset::read_csv("y,q\n1,0.5\n".as_bytes(), &schema).is_err());
    assert!(EvaluationDataset::read_csv("y,p\n".as_bytes(), &schema).is_err());
}
