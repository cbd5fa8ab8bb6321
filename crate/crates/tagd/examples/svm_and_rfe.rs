//! Train the one-vs-rest linear SVM on statistical features, report
//! accuracy/FAR/FRR, then rank the features by recursive elimination.

use tagd::cli::feature_split;
use tagd::data::{SplitSpec, FEATURE_NAMES, NUM_FEATURES};
use tagd::ingest::{synth_dataset, SynthProfile};
use tagd::metrics::{confusion, metrics};
use tagd::svm::{predict_all, rfe, train_multiclass, SvmParams};

fn main() -> tagd::Result<()> {
    let ds = synth_dataset(&SynthProfile::default())?;
    let (train_x, train_y, test_x, test_y, _) = feature_split(&ds, &SplitSpec::default())?;

    let params = SvmParams::default();
    let active: Vec<usize> = (0..NUM_FEATURES).collect();
    let model = train_multiclass(&train_x, &train_y, &active, &params, 0)?;
    let preds = predict_all(&model, &test_x);
    let m = metrics(&confusion(&test_y, &preds, ds.num_users)?)?;
    println!(
        "svm: accuracy {:.4}  FAR {:.4}  FRR {:.4}",
        m.accuracy, m.far, m.frr
    );

    let ranking = rfe(&train_x, &train_y, &test_x, &test_y, NUM_FEATURES, &params, 0)?;
    println!("elimination order (weakest first):");
    for (i, step) in ranking.steps.iter().enumerate() {
        println!(
            "  {:2}. drop {:>9}  accuracy with remainder {:.4}",
            i + 1,
            FEATURE_NAMES[step.eliminated],
            step.accuracy
        );
    }
    println!(
        "strongest feature: {}",
        FEATURE_NAMES[*ranking.elimination_order.last().unwrap()]
    );
    Ok(())
}
