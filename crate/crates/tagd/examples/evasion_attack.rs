//! Present GAN fakes to a trained authenticator and report how often
//! they are accepted as any enrolled user above a confidence threshold.

use tagd::cli::sequence_split;
use tagd::cnn::{train_and_evaluate, CnnConfig};
use tagd::data::SplitSpec;
use tagd::gan::{evasion_attack, generate, train_gan, GanConfig};
use tagd::ingest::{synth_dataset, SynthProfile};
use tagd::rng::RandomStream;

fn main() -> tagd::Result<()> {
    let ds = synth_dataset(&SynthProfile::default())?;
    let (train, test, _) = sequence_split(&ds, &SplitSpec::default())?;

    let cnn_cfg = CnnConfig {
        filters: (32, 64),
        hidden_dense_units: 64,
        epochs: 8,
        ..Default::default()
    };
    let (model, report) = train_and_evaluate(&cnn_cfg, &train, &test, ds.num_users)?;
    println!("authenticator accuracy on real gestures: {:.4}", report.test_accuracy);

    let (gen, _, _) = train_gan(
        &train,
        &GanConfig {
            epochs: 10,
            ..Default::default()
        },
        &mut RandomStream::new(11),
    )?;
    let fakes = generate(&gen, 200, &mut RandomStream::new(12))?;
    let ev = evasion_attack(&model, &fakes, 0.5)?;
    for (user, rate) in ev.acceptance.iter().enumerate() {
        if *rate > 0.0 {
            println!("  fakes claimed as user {user}: {:.1}%", rate * 100.0);
        }
    }
    println!(
        "max confident acceptance at threshold {}: {:.4}",
        ev.threshold, ev.max_confident_acceptance
    );
    Ok(())
}
