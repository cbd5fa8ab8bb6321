//! Resample a gesture to 400x3 and print its 16 statistical features.

use tagd::data::FEATURE_NAMES;
use tagd::ingest::{synth_dataset, SynthProfile};
use tagd::preprocess::{features, resample};

fn main() -> tagd::Result<()> {
    let ds = synth_dataset(&SynthProfile {
        num_users: 2,
        samples_per_user: 1,
        ..Default::default()
    })?;
    let sample = &ds.samples[0];
    println!("raw length {} -> fixed length 400", sample.len());

    let seq = resample(sample)?;
    println!("first resampled row: {:?}", seq.data[0]);

    let f = features(sample)?;
    for (name, value) in FEATURE_NAMES.iter().zip(&f.values) {
        println!("{name:>9} = {value:+.5}");
    }
    Ok(())
}
