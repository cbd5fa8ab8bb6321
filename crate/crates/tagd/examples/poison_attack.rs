//! Mix GAN fakes into the CNN training set and measure the accuracy
//! drop relative to a clean baseline trained on the same split.

use tagd::cli::sequence_split;
use tagd::cnn::CnnConfig;
use tagd::data::SplitSpec;
use tagd::gan::{poison_attack, train_gan, GanConfig, LabelPolicy, PoisonSpec};
use tagd::ingest::{synth_dataset, SynthProfile};
use tagd::rng::RandomStream;

fn main() -> tagd::Result<()> {
    let ds = synth_dataset(&SynthProfile::default())?;
    let (train, test, _) = sequence_split(&ds, &SplitSpec::default())?;

    let gan_cfg = GanConfig {
        epochs: 10,
        ..Default::default()
    };
    let (gen, _, _) = train_gan(&train, &gan_cfg, &mut RandomStream::new(5))?;

    let cnn_cfg = CnnConfig {
        filters: (32, 64),
        hidden_dense_units: 64,
        epochs: 8,
        ..Default::default()
    };
    for n in [0, 20, 100, 400] {
        let spec = PoisonSpec {
            n_adversarial: n,
            gan_epochs: gan_cfg.epochs,
            label_policy: LabelPolicy::UniformRandom,
            seed: 0,
        };
        let report = poison_attack(&train, &test, &gen, &spec, &cnn_cfg, ds.num_users)?;
        println!(
            "n={n:4}: baseline {:.4} -> poisoned {:.4}",
            report.baseline_accuracy, report.poisoned_accuracy
        );
    }
    Ok(())
}
