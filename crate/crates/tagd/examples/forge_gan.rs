//! Train the DC-GAN forger on one user's gestures and compare the
//! spectral flatness of its fakes against the real signals.

use tagd::cli::sequence_split;
use tagd::data::SplitSpec;
use tagd::gan::{generate, mean_spectral_flatness, train_gan, GanConfig};
use tagd::ingest::{synth_dataset, SynthProfile};
use tagd::rng::RandomStream;

fn main() -> tagd::Result<()> {
    let ds = synth_dataset(&SynthProfile::default())?;
    let (mut train, _, _) = sequence_split(&ds, &SplitSpec::default())?;
    train.retain(|s| s.user_id == 0); // attacker observed a single victim

    let cfg = GanConfig {
        epochs: 20,
        ..Default::default()
    };
    let mut stream = RandomStream::new(3);
    let (gen, _, curves) = train_gan(&train, &cfg, &mut stream)?;
    for (i, (d, g)) in curves.iter().enumerate().step_by(5) {
        println!("epoch {:3}: d_loss {d:.4}  g_loss {g:.4}", i + 1);
    }

    let fakes = generate(&gen, 32, &mut stream)?;
    println!(
        "spectral flatness: real {:.4}  fake {:.4}  (lower = more structured)",
        mean_spectral_flatness(&train),
        mean_spectral_flatness(&fakes)
    );
    Ok(())
}
