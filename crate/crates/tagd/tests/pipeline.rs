//! End-to-end flows through the public API plus property tests for the
//! preprocessing invariants.

use proptest::prelude::*;
use tagd::cli::{feature_split, sequence_split};
use tagd::data::{GestureSample, SplitSpec, FIXED_LEN, NUM_FEATURES};
use tagd::ingest::{load_dataset, save_dataset, synth_dataset, SynthProfile};
use tagd::metrics::{confusion, metrics};
use tagd::preprocess::{features_all, resample, Standardizer};
use tagd::svm::{predict_all, train_multiclass, SvmParams};

#[test]
fn corpus_roundtrip_to_svm_metrics() {
    let ds = synth_dataset(&SynthProfile {
        num_users: 5,
        samples_per_user: 20,
        seed: 21,
        ..Default::default()
    })
    .unwrap();

    let mut buf = Vec::new();
    save_dataset(&ds, &mut buf).unwrap();
    let ds = load_dataset(buf.as_slice()).unwrap();

    let (train_x, train_y, test_x, test_y, _) = feature_split(&ds, &SplitSpec::default()).unwrap();
    assert_eq!(train_x.len(), 80);
    assert_eq!(test_x.len(), 20);
    assert!(train_x.iter().all(|r| r.len() == NUM_FEATURES));

    let active: Vec<usize> = (0..NUM_FEATURES).collect();
    let model = train_multiclass(&train_x, &train_y, &active, &SvmParams::default(), 0).unwrap();
    let preds = predict_all(&model, &test_x);
    let m = metrics(&confusion(&test_y, &preds, ds.num_users).unwrap()).unwrap();
    assert!(m.accuracy >= 0.9, "accuracy {}", m.accuracy);
    assert!(m.far <= 0.1 && m.frr.is_finite());
}

#[test]
fn sequence_split_is_standardized_per_channel() {
    let ds = synth_dataset(&SynthProfile::default()).unwrap();
    let (train, _, _) = sequence_split(&ds, &SplitSpec::default()).unwrap();
    for c in 0..3 {
        let vals: Vec<f64> = train.iter().flat_map(|s| s.data.iter().map(move |r| r[c])).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
        assert!(mean.abs() < 1e-9, "channel {c} mean {mean}");
        assert!((var.sqrt() - 1.0).abs() < 1e-9, "channel {c} std {}", var.sqrt());
    }
}

#[test]
fn features_are_deterministic_across_calls() {
    let ds = synth_dataset(&SynthProfile::default()).unwrap();
    assert_eq!(features_all(&ds).unwrap(), features_all(&ds).unwrap());
}

fn arb_axis() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 2..900)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resample_is_endpoint_exact_and_bounded(xs in arb_axis()) {
        let data: Vec<[f64; 3]> = xs.iter().map(|&v| [v, -v, 0.5 * v]).collect();
        let sample = GestureSample::new(0, data.clone(), 100.0).unwrap();
        let seq = resample(&sample).unwrap();
        prop_assert_eq!(seq.data.len(), FIXED_LEN);
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // linear interpolation never overshoots the sample range
        for row in &seq.data {
            prop_assert!(row[0] >= lo - 1e-12 && row[0] <= hi + 1e-12);
        }
        prop_assert!((seq.data[0][0] - xs[0]).abs() < 1e-12);
        prop_assert!((seq.data[FIXED_LEN - 1][0] - xs[xs.len() - 1]).abs() < 1e-12);
    }

    #[test]
    fn standardizer_roundtrips(rows in prop::collection::vec(
        prop::array::uniform4(-100.0f64..100.0), 3..40))
    {
        let cols: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        let st = Standardizer::fit_columns(&cols).unwrap();
        for row in &cols {
            let z = st.apply(row).unwrap();
            let back = st.inverse(&z).unwrap();
            for (orig, rec) in row.iter().zip(&back) {
                prop_assert!((orig - rec).abs() < 1e-8 * orig.abs().max(1.0));
            }
        }
    }

    #[test]
    fn split_partitions_every_sample(users in 2usize..6, per_user in 2usize..12, seed in 0u64..50) {
        let ds = synth_dataset(&SynthProfile {
            num_users: users,
            samples_per_user: per_user,
            length_range: (40, 60),
            seed,
            ..Default::default()
        }).unwrap();
        let (train, test) = tagd::data::split(&ds, &SplitSpec { train_fraction: 0.8, seed }).unwrap();
        prop_assert_eq!(train.len() + test.len(), ds.len());
        for user in 0..users {
            prop_assert!(train.per_user_counts()[user] >= 1);
            prop_assert!(test.per_user_counts()[user] >= 1);
        }
    }
}
