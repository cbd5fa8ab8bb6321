//! Train the 1D-CNN authenticator on raw resampled sequences.
//!
//! Uses a narrow network and few epochs so the example finishes in
//! seconds; the defaults in `CnnConfig` match the full-size model.

use tagd::cli::sequence_split;
use tagd::cnn::{plan_shapes, train_and_evaluate, CnnConfig};
use tagd::data::SplitSpec;
use tagd::ingest::{synth_dataset, SynthProfile};

fn main() -> tagd::Result<()> {
    let ds = synth_dataset(&SynthProfile::default())?;
    let (train, test, _) = sequence_split(&ds, &SplitSpec::default())?;

    let cfg = CnnConfig {
        filters: (32, 64),
        hidden_dense_units: 64,
        epochs: 8,
        ..Default::default()
    };
    let shapes = plan_shapes(&cfg)?;
    println!(
        "shapes: 400 -> conv {} -> conv {} -> pool {} -> flat {}",
        shapes.conv1_len, shapes.conv2_len, shapes.pool_len, shapes.flat_dim
    );

    let (_, report) = train_and_evaluate(&cfg, &train, &test, ds.num_users)?;
    for (i, e) in report.per_epoch.iter().enumerate() {
        println!("epoch {:2}: loss {:.4}  train accuracy {:.4}", i + 1, e.loss, e.accuracy);
    }
    println!(
        "test: accuracy {:.4}  FAR {:.4}  FRR {:.4}  ({:.1}s)",
        report.test_accuracy, report.test_far, report.test_frr, report.wall_secs
    );
    Ok(())
}
