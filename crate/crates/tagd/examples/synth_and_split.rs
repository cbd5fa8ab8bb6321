//! Generate a synthetic gesture corpus and split it per user.

use tagd::data::{split, SplitSpec};
use tagd::ingest::{synth_dataset, SynthProfile};

fn main() -> tagd::Result<()> {
    let ds = synth_dataset(&SynthProfile::default())?;
    println!(
        "corpus: {} samples, {} users, lengths {}..{}",
        ds.len(),
        ds.num_users,
        ds.samples.iter().map(|s| s.len()).min().unwrap(),
        ds.samples.iter().map(|s| s.len()).max().unwrap(),
    );

    let (train, test) = split(&ds, &SplitSpec::default())?;
    println!("split: {} train / {} test", train.len(), test.len());
    for user in 0..ds.num_users {
        println!(
            "  user {user}: {} train, {} test",
            train.per_user_counts()[user],
            test.per_user_counts()[user]
        );
    }
    Ok(())
}
