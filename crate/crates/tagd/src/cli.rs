//! Subcommand CLI orchestrating the pipeline. Flags override the
//! optional TOML config file, which overrides built-in defaults; the
//! fully resolved configuration is echoed into the output directory as
//! `run.toml` so every run is reproducible from its artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::cnn::{self, CnnConfig};
use crate::data::{split, Dataset, FeatureVector, FixedSequence, SplitSpec, FEATURE_NAMES};
use crate::error::{Error, Result};
use crate::gan::{self, GanConfig, LabelPolicy, PoisonSpec};
use crate::ingest::{self, CsvLayout, SynthProfile};
use crate::metrics::{confusion, metrics};
use crate::preprocess::{features_all, resample_all, Standardizer};
use crate::rng::RandomStream;
use crate::svm::{self, SvmParams};

pub const OUT_ROOT_ENV: &str = "TAGD_OUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSettings {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSettings {
    fn default() -> Self {
        SplitSettings {
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmSettings {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SvmSettings {
    fn default() -> Self {
        let p = SvmParams::default();
        SvmSettings {
            c: p.c,
            tol: p.tol,
            max_iter: p.max_iter,
            seed: 0,
        }
    }
}

impl SvmSettings {
    fn params(&self) -> SvmParams {
        SvmParams {
            c: self.c,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

/// Everything a run needs, resolved from defaults ← config file ← flags.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub split: SplitSettings,
    pub svm: SvmSettings,
    pub cnn: CnnConfig,
    pub gan: GanConfig,
}

impl RunConfig {
    fn load(path: Option<&Path>) -> Result<RunConfig> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", p.display())))?;
                toml::from_str(&text)
                    .map_err(|e| Error::Usage(format!("bad config {}: {e}", p.display())))
            }
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "tagd", version, about = "Accelerometer gesture authentication pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Output directory for artifacts (defaults to $TAGD_OUT_ROOT or ./out)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML config file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SplitArgs {
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct CnnArgs {
    #[arg(long)]
    pub kernel: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub filters1: Option<usize>,
    #[arg(long)]
    pub filters2: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic multi-user corpus
    Synth {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 10)]
        users: usize,
        #[arg(long, default_value_t = 50)]
        per_user: usize,
        #[arg(long, default_value_t = 300)]
        min_len: usize,
        #[arg(long, default_value_t = 700)]
        max_len: usize,
        #[arg(long, default_value_t = 3)]
        harmonics: usize,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Load accelerometer CSVs from root/<user>/*.csv into a dataset file
    Ingest {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        root: PathBuf,
        #[arg(long, default_value = "time")]
        time_col: String,
        #[arg(long, default_value = "gFx")]
        x_col: String,
        #[arg(long, default_value = "gFy")]
        y_col: String,
        #[arg(long, default_value = "gFz")]
        z_col: String,
        #[arg(long, default_value_t = ',')]
        delimiter: char,
    },
    /// Export the 16 statistical features of every sample as CSV
    Features {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        data: PathBuf,
    },
    /// Train the one-vs-rest linear SVM on the 16 features
    TrainSvm {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        split_args: SplitArgs,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// SVM recursive feature elimination with a per-step metrics report
    Rfe {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        split_args: SplitArgs,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Train the 1D-CNN classifier
    TrainCnn {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        split_args: SplitArgs,
        #[command(flatten)]
        cnn_args: CnnArgs,
        #[arg(long)]
        data: PathBuf,
    },
    /// Kernel-size × stride sweep of the 1D-CNN
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        split_args: SplitArgs,
        #[command(flatten)]
        cnn_args: CnnArgs,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "3,5,10,25")]
        kernels: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,3,6")]
        strides: Vec<usize>,
        /// Worker threads for concurrent cells (0 = rayon default)
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Train the DC-GAN forger, saving checkpoints along the way
    TrainGan {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        split_args: SplitArgs,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long, value_delimiter = ',', default_value = "10,25,50,100")]
        checkpoints: Vec<usize>,
        /// Train on a single user's samples (attacker-knows-victim mode)
        #[arg(long)]
        victim: Option<usize>,
        /// Also export this many generated samples in the ingest CSV schema
        #[arg(long, default_value_t = 0)]
        export_fakes: usize,
    },
    /// Poison the CNN training set with GAN fakes and retrain
    Poison {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        split_args: SplitArgs,
        #[command(flatten)]
        cnn_args: CnnArgs,
        #[arg(long)]
        data: PathBuf,
        /// Generator checkpoint produced by train-gan
        #[arg(long)]
        gan: PathBuf,
        /// Number of adversarial samples mixed into training
        #[arg(long)]
        n: usize,
        /// GAN training epochs of the checkpoint (recorded in the report)
        #[arg(long, default_value_t = 50)]
        gan_epochs: usize,
        /// Label all fakes as one victim user instead of uniform-random
        #[arg(long)]
        victim: Option<usize>,
    },
    /// Present GAN fakes to a trained authenticator
    Evade {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        split_args: SplitArgs,
        #[command(flatten)]
        cnn_args: CnnArgs,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        gan: PathBuf,
        /// Trained CNN checkpoint; trains from scratch when omitted
        #[arg(long)]
        cnn: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
    /// Join poison reports into an adversarial-attack grid CSV
    Report {
        #[command(flatten)]
        common: CommonArgs,
        /// poison.csv files produced by the poison subcommand
        #[arg(long, num_args = 1.., required = true)]
        poison: Vec<PathBuf>,
    },
}

fn out_dir(common: &CommonArgs) -> Result<PathBuf> {
    let dir = common
        .out
        .clone()
        .or_else(|| std::env::var(OUT_ROOT_ENV).ok().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_run_config(dir: &Path, cfg: &RunConfig) -> Result<()> {
    let text = toml::to_string_pretty(cfg)
        .map_err(|e| Error::Usage(format!("cannot serialize config: {e}")))?;
    fs::write(dir.join("run.toml"), text)?;
    Ok(())
}

fn resolve_split(cfg: &mut RunConfig, args: &SplitArgs) {
    if let Some(f) = args.train_fraction {
        cfg.split.train_fraction = f;
    }
    if let Some(s) = args.seed {
        cfg.split.seed = s;
        cfg.svm.seed = s;
        cfg.cnn.seed = s;
        cfg.gan.seed = s;
    }
}

fn resolve_cnn(cfg: &mut RunConfig, args: &CnnArgs) {
    let c = &mut cfg.cnn;
    if let Some(v) = args.kernel {
        c.kernel_size = v;
    }
    if let Some(v) = args.stride {
        c.stride = v;
    }
    if let Some(v) = args.epochs {
        c.epochs = v;
    }
    if let Some(v) = args.batch_size {
        c.batch_size = v;
    }
    if let Some(v) = args.lr {
        c.lr = v;
    }
    if let Some(v) = args.dropout {
        c.dropout_rate = v;
    }
    if let Some(v) = args.filters1 {
        c.filters.0 = v;
    }
    if let Some(v) = args.filters2 {
        c.filters.1 = v;
    }
    if let Some(v) = args.hidden {
        c.hidden_dense_units = v;
    }
}

fn split_spec(cfg: &RunConfig) -> SplitSpec {
    SplitSpec {
        train_fraction: cfg.split.train_fraction,
        seed: cfg.split.seed,
    }
}

/// Features of both partitions, standardized with statistics fit on the
/// training partition only.
pub fn feature_split(
    ds: &Dataset,
    spec: &SplitSpec,
) -> Result<(Vec<Vec<f64>>, Vec<usize>, Vec<Vec<f64>>, Vec<usize>, Standardizer)> {
    let (train, test) = split(ds, spec)?;
    let train_f = features_all(&train)?;
    let test_f = features_all(&test)?;
    let st = Standardizer::fit_features(&train_f)?;
    let project = |rows: &[FeatureVector]| -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
        let mut xs = Vec::with_capacity(rows.len());
        let mut ys = Vec::with_capacity(rows.len());
        for r in rows {
            xs.push(st.apply(&r.values)?);
            ys.push(r.user_id);
        }
        Ok((xs, ys))
    };
    let (train_x, train_y) = project(&train_f)?;
    let (test_x, test_y) = project(&test_f)?;
    Ok((train_x, train_y, test_x, test_y, st))
}

/// Resampled and channel-standardized sequences of both partitions.
pub fn sequence_split(
    ds: &Dataset,
    spec: &SplitSpec,
) -> Result<(Vec<FixedSequence>, Vec<FixedSequence>, Standardizer)> {
    let (train, test) = split(ds, spec)?;
    let train_seqs = resample_all(&train)?;
    let test_seqs = resample_all(&test)?;
    let st = Standardizer::fit_sequences(&train_seqs)?;
    let train_std = train_seqs
        .iter()
        .map(|s| st.apply_sequence(s))
        .collect::<Result<Vec<_>>>()?;
    let test_std = test_seqs
        .iter()
        .map(|s| st.apply_sequence(s))
        .collect::<Result<Vec<_>>>()?;
    Ok((train_std, test_std, st))
}

fn write_metrics_csv(path: &Path, accuracy: f64, far: f64, frr: f64) -> Result<()> {
    fs::write(
        path,
        format!("accuracy,far,frr\n{accuracy:.6},{far:.6},{frr:.6}\n"),
    )?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            common,
            users,
            per_user,
            min_len,
            max_len,
            harmonics,
            noise,
            seed,
        } => {
            let dir = out_dir(&common)?;
            let profile = SynthProfile {
                num_users: users,
                samples_per_user: per_user,
                length_range: (min_len, max_len),
                harmonics_per_axis: harmonics,
                noise_sigma: noise,
                seed,
            };
            let ds = ingest::synth_dataset(&profile)?;
            ingest::save_dataset_file(&ds, &dir.join("dataset.tagd"))?;
            write_run_config(&dir, &RunConfig::load(common.config.as_deref())?)?;
            println!(
                "synth: {} users x {} samples -> {}",
                users,
                per_user,
                dir.join("dataset.tagd").display()
            );
            Ok(())
        }
        Command::Ingest {
            common,
            root,
            time_col,
            x_col,
            y_col,
            z_col,
            delimiter,
        } => {
            let dir = out_dir(&common)?;
            let layout = CsvLayout {
                time_column: time_col,
                axis_columns: [x_col, y_col, z_col],
                delimiter: delimiter as u8,
            };
            let ds = ingest::load_dir(&root, &layout)?;
            ingest::save_dataset_file(&ds, &dir.join("dataset.tagd"))?;
            println!(
                "ingest: {} samples, {} users -> {}",
                ds.len(),
                ds.num_users,
                dir.join("dataset.tagd").display()
            );
            Ok(())
        }
        Command::Features { common, data } => {
            let dir = out_dir(&common)?;
            let ds = ingest::load_dataset_file(&data)?;
            let feats = features_all(&ds)?;
            let mut out = FEATURE_NAMES.join(",");
            out.push_str(",user_id\n");
            for f in &feats {
                for v in &f.values {
                    out.push_str(&format!("{v},"));
                }
                out.push_str(&format!("{}\n", f.user_id));
            }
            fs::write(dir.join("features.csv"), out)?;
            println!("features: {} rows -> {}", feats.len(), dir.join("features.csv").display());
            Ok(())
        }
        Command::TrainSvm {
            common,
            split_args,
            data,
            c,
            tol,
            max_iter,
        } => {
            let dir = out_dir(&common)?;
            let mut cfg = RunConfig::load(common.config.as_deref())?;
            resolve_split(&mut cfg, &split_args);
            if let Some(v) = c {
                cfg.svm.c = v;
            }
            if let Some(v) = tol {
                cfg.svm.tol = v;
            }
            if let Some(v) = max_iter {
                cfg.svm.max_iter = v;
            }
            write_run_config(&dir, &cfg)?;

            let ds = ingest::load_dataset_file(&data)?;
            let (train_x, train_y, test_x, test_y, _) = feature_split(&ds, &split_spec(&cfg))?;
            let active: Vec<usize> = (0..crate::data::NUM_FEATURES).collect();
            let model =
                svm::train_multiclass(&train_x, &train_y, &active, &cfg.svm.params(), cfg.svm.seed)?;
            let preds = svm::predict_all(&model, &test_x);
            let cm = confusion(&test_y, &preds, ds.num_users)?;
            let m = metrics(&cm)?;
            let f = fs::File::create(dir.join("svm_model.txt"))?;
            model.save(std::io::BufWriter::new(f))?;
            write_metrics_csv(&dir.join("metrics.csv"), m.accuracy, m.far, m.frr)?;
            println!(
                "train-svm: accuracy {:.4} FAR {:.4} FRR {:.4}",
                m.accuracy, m.far, m.frr
            );
            Ok(())
        }
        Command::Rfe {
            common,
            split_args,
            data,
            c,
            tol,
            max_iter,
        } => {
            let dir = out_dir(&common)?;
            let mut cfg = RunConfig::load(common.config.as_deref())?;
            resolve_split(&mut cfg, &split_args);
            if let Some(v) = c {
                cfg.svm.c = v;
            }
            if let Some(v) = tol {
                cfg.svm.tol = v;
            }
            if let Some(v) = max_iter {
                cfg.svm.max_iter = v;
            }
            write_run_config(&dir, &cfg)?;

            let ds = ingest::load_dataset_file(&data)?;
            let (train_x, train_y, test_x, test_y, _) = feature_split(&ds, &split_spec(&cfg))?;
            let ranking = svm::rfe(
                &train_x,
                &train_y,
                &test_x,
                &test_y,
                crate::data::NUM_FEATURES,
                &cfg.svm.params(),
                cfg.svm.seed,
            )?;
            let mut out = String::from("step,eliminated_feature,accuracy,far,frr\n");
            for (i, step) in ranking.steps.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{:.6},{:.6},{:.6}\n",
                    i + 1,
                    FEATURE_NAMES[step.eliminated],
                    step.accuracy,
                    step.far,
                    step.frr
                ));
            }
            fs::write(dir.join("rfe.csv"), out)?;
            println!(
                "rfe: survivor feature {} -> {}",
                FEATURE_NAMES[*ranking.elimination_order.last().unwrap()],
                dir.join("rfe.csv").display()
            );
            Ok(())
        }
        Command::TrainCnn {
            common,
            split_args,
            cnn_args,
            data,
        } => {
            let dir = out_dir(&common)?;
            let mut cfg = RunConfig::load(common.config.as_deref())?;
            resolve_split(&mut cfg, &split_args);
            resolve_cnn(&mut cfg, &cnn_args);
            write_run_config(&dir, &cfg)?;

            let ds = ingest::load_dataset_file(&data)?;
            let (train_std, test_std, _) = sequence_split(&ds, &split_spec(&cfg))?;
            let (model, report) =
                cnn::train_and_evaluate(&cfg.cnn, &train_std, &test_std, ds.num_users)?;
            let f = fs::File::create(dir.join("cnn_model.bin"))?;
            model.save(std::io::BufWriter::new(f))?;
            let mut epochs_csv = String::from("epoch,loss,accuracy\n");
            for (i, e) in report.per_epoch.iter().enumerate() {
                epochs_csv.push_str(&format!("{},{:.6},{:.6}\n", i + 1, e.loss, e.accuracy));
            }
            fs::write(dir.join("epochs.csv"), epochs_csv)?;
            write_metrics_csv(
                &dir.join("metrics.csv"),
                report.test_accuracy,
                report.test_far,
                report.test_frr,
            )?;
            println!(
                "train-cnn: accuracy {:.4} FAR {:.4} FRR {:.4} ({:.1}s)",
                report.test_accuracy, report.test_far, report.test_frr, report.wall_secs
            );
            Ok(())
        }
        Command::Sweep {
            common,
            split_args,
            cnn_args,
            data,
            kernels,
            strides,
            jobs,
        } => {
            let dir = out_dir(&common)?;
            if jobs > 0 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build_global()
                    .ok();
            }
            let mut cfg = RunConfig::load(common.config.as_deref())?;
            resolve_split(&mut cfg, &split_args);
            resolve_cnn(&mut cfg, &cnn_args);
            write_run_config(&dir, &cfg)?;

            let ds = ingest::load_dataset_file(&data)?;
            let (train_std, test_std, _) = sequence_split(&ds, &split_spec(&cfg))?;
            let reports =
                cnn::sweep(&train_std, &test_std, &kernels, &strides, &cfg.cnn, ds.num_users)?;
            fs::write(dir.join("sweep.csv"), cnn::sweep_csv(&kernels, &strides, &reports))?;
            println!(
                "sweep: {} cells -> {}",
                reports.len(),
                dir.join("sweep.csv").display()
            );
            Ok(())
        }
        Command::TrainGan {
            common,
            split_args,
            data,
            epochs,
            batch_size,
            lr,
            checkpoints,
            victim,
            export_fakes,
        } => {
            let dir = out_dir(&common)?;
            let mut cfg = RunConfig::load(common.config.as_deref())?;
            resolve_split(&mut cfg, &split_args);
            if let Some(v) = epochs {
                cfg.gan.epochs = v;
            }
            if let Some(v) = batch_size {
                cfg.gan.batch_size = v;
            }
            if let Some(v) = lr {
                cfg.gan.lr = v;
            }
            write_run_config(&dir, &cfg)?;

            let ds = ingest::load_dataset_file(&data)?;
            let (mut train_std, _, st) = sequence_split(&ds, &split_spec(&cfg))?;
            if let Some(u) = victim {
                if u >= ds.num_users {
                    return Err(Error::Usage(format!(
                        "victim user {u} out of range for {} users",
                        ds.num_users
                    )));
                }
                train_std.retain(|s| s.user_id == u);
            }
            let mut stream = RandomStream::new(cfg.gan.seed);
            let wanted: Vec<usize> = checkpoints
                .iter()
                .copied()
                .filter(|&e| e < cfg.gan.epochs)
                .collect();
            let (gen, _, curves, snapshots) =
                gan::train_gan_with_checkpoints(&train_std, &cfg.gan, &mut stream, &wanted)?;
            for (epoch, snapshot) in &snapshots {
                let f = fs::File::create(dir.join(format!("gan_epoch{epoch}.bin")))?;
                snapshot.save(std::io::BufWriter::new(f))?;
            }
            let f = fs::File::create(dir.join(format!("gan_epoch{}.bin", cfg.gan.epochs)))?;
            gen.save(std::io::BufWriter::new(f))?;
            let mut losses = String::from("epoch,d_loss,g_loss\n");
            for (i, (d, g)) in curves.iter().enumerate() {
                losses.push_str(&format!("{},{:.6},{:.6}\n", i + 1, d, g));
            }
            fs::write(dir.join("gan_losses.csv"), losses)?;
            if export_fakes > 0 {
                let fakes = gan::generate(&gen, export_fakes, &mut stream.fork(99))?;
                let fakes = gan::destandardize(&fakes, &st)?;
                let fake_dir = dir.join("fakes").join("gan");
                fs::create_dir_all(&fake_dir)?;
                for (i, fake) in fakes.iter().enumerate() {
                    let mut csv = String::from("time,gFx,gFy,gFz\n");
                    for (t, row) in fake.data.iter().enumerate() {
                        csv.push_str(&format!(
                            "{},{},{},{}\n",
                            t as f64 / 100.0,
                            row[0],
                            row[1],
                            row[2]
                        ));
                    }
                    fs::write(fake_dir.join(format!("fake{i:04}.csv")), csv)?;
                }
            }
            println!(
                "train-gan: {} epochs, final d_loss {:.4} g_loss {:.4}",
                cfg.gan.epochs,
                curves.last().map(|c| c.0).unwrap_or(f64::NAN),
                curves.last().map(|c| c.1).unwrap_or(f64::NAN)
            );
            Ok(())
        }
        Command::Poison {
            common,
            split_args,
            cnn_args,
            data,
            gan,
            n,
            gan_epochs,
            victim,
        } => {
            let dir = out_dir(&common)?;
            let mut cfg = RunConfig::load(common.config.as_deref())?;
            resolve_split(&mut cfg, &split_args);
            resolve_cnn(&mut cfg, &cnn_args);
            write_run_config(&dir, &cfg)?;

            let ds = ingest::load_dataset_file(&data)?;
            let (train_std, test_std, _) = sequence_split(&ds, &split_spec(&cfg))?;
            let f = fs::File::open(&gan)
                .map_err(|e| Error::Data(format!("cannot open {}: {e}", gan.display())))?;
            let generator = gan::Generator::load(std::io::BufReader::new(f))?;
            let spec = PoisonSpec {
                n_adversarial: n,
                gan_epochs,
                label_policy: victim.map_or(LabelPolicy::UniformRandom, LabelPolicy::SingleVictim),
                seed: cfg.split.seed,
            };
            let report = gan::poison_attack(
                &train_std,
                &test_std,
                &generator,
                &spec,
                &cfg.cnn,
                ds.num_users,
            )?;
            fs::write(
                dir.join("poison.csv"),
                format!(
                    "n_adversarial,gan_epochs,baseline_accuracy,poisoned_accuracy\n{},{},{:.6},{:.6}\n",
                    report.n_adversarial,
                    report.gan_epochs,
                    report.baseline_accuracy,
                    report.poisoned_accuracy
                ),
            )?;
            println!(
                "poison: n={} baseline {:.4} poisoned {:.4}",
                n, report.baseline_accuracy, report.poisoned_accuracy
            );
            Ok(())
        }
        Command::Evade {
            common,
            split_args,
            cnn_args,
            data,
            gan,
            cnn,
            n,
            threshold,
        } => {
            let dir = out_dir(&common)?;
            let mut cfg = RunConfig::load(common.config.as_deref())?;
            resolve_split(&mut cfg, &split_args);
            resolve_cnn(&mut cfg, &cnn_args);
            write_run_config(&dir, &cfg)?;

            let ds = ingest::load_dataset_file(&data)?;
            let (train_std, test_std, _) = sequence_split(&ds, &split_spec(&cfg))?;
            let model = match cnn {
                Some(path) => {
                    let f = fs::File::open(&path)
                        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
                    crate::cnn::Cnn::load(std::io::BufReader::new(f))?
                }
                None => {
                    let (model, _) =
                        cnn::train_and_evaluate(&cfg.cnn, &train_std, &test_std, ds.num_users)?;
                    model
                }
            };
            let f = fs::File::open(&gan)
                .map_err(|e| Error::Data(format!("cannot open {}: {e}", gan.display())))?;
            let generator = gan::Generator::load(std::io::BufReader::new(f))?;
            let mut stream = RandomStream::new(cfg.split.seed);
            let fakes = gan::generate(&generator, n, &mut stream)?;
            let report = gan::evasion_attack(&model, &fakes, threshold)?;
            let mut out = String::from("user,acceptance\n");
            for (u, a) in report.acceptance.iter().enumerate() {
                out.push_str(&format!("{u},{a:.6}\n"));
            }
            out.push_str(&format!(
                "max_confident_acceptance,{:.6}\n",
                report.max_confident_acceptance
            ));
            fs::write(dir.join("evasion.csv"), out)?;
            println!(
                "evade: max confident acceptance {:.4} at threshold {}",
                report.max_confident_acceptance, threshold
            );
            Ok(())
        }
        Command::Report { common, poison } => {
            let dir = out_dir(&common)?;
            // collect (n, epochs) -> poisoned accuracy
            let mut cells: Vec<(usize, usize, f64)> = Vec::new();
            for path in &poison {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
                for line in text.lines().skip(1) {
                    let parts: Vec<&str> = line.split(',').collect();
                    if parts.len() != 4 {
                        return Err(Error::Data(format!(
                            "{}: bad poison row `{line}`",
                            path.display()
                        )));
                    }
                    let n: usize = parts[0]
                        .parse()
                        .map_err(|_| Error::Data(format!("bad n in `{line}`")))?;
                    let e: usize = parts[1]
                        .parse()
                        .map_err(|_| Error::Data(format!("bad epochs in `{line}`")))?;
                    let acc: f64 = parts[3]
                        .parse()
                        .map_err(|_| Error::Data(format!("bad accuracy in `{line}`")))?;
                    cells.push((n, e, acc));
                }
            }
            let mut ns: Vec<usize> = cells.iter().map(|c| c.0).collect();
            ns.sort_unstable();
            ns.dedup();
            let mut epochs: Vec<usize> = cells.iter().map(|c| c.1).collect();
            epochs.sort_unstable();
            epochs.dedup();
            let mut out = String::from("adversarial_samples");
            for e in &epochs {
                out.push_str(&format!(",epochs_{e}"));
            }
            out.push('\n');
            for n in &ns {
                out.push_str(&n.to_string());
                for e in &epochs {
                    match cells.iter().find(|c| c.0 == *n && c.1 == *e) {
                        Some(c) => out.push_str(&format!(",{:.5}", c.2)),
                        None => out.push(','),
                    }
                }
                out.push('\n');
            }
            fs::write(dir.join("attack_grid.csv"), out)?;
            println!(
                "report: {} cells -> {}",
                cells.len(),
                dir.join("attack_grid.csv").display()
            );
            Ok(())
        }
    }
}
