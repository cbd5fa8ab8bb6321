//! Sweep the CNN kernel size and stride and print the accuracy grid.

use tagd::cli::sequence_split;
use tagd::cnn::{sweep, sweep_csv, CnnConfig};
use tagd::data::SplitSpec;
use tagd::ingest::{synth_dataset, SynthProfile};

fn main() -> tagd::Result<()> {
    let ds = synth_dataset(&SynthProfile::default())?;
    let (train, test, _) = sequence_split(&ds, &SplitSpec::default())?;

    let base = CnnConfig {
        filters: (16, 32),
        hidden_dense_units: 32,
        epochs: 5,
        ..Default::default()
    };
    let kernels = [5, 10, 25];
    let strides = [3, 6];
    let reports = sweep(&train, &test, &kernels, &strides, &base, ds.num_users)?;
    print!("{}", sweep_csv(&kernels, &strides, &reports));
    Ok(())
}
