//! DC-GAN forger: noise-100 generator built from a dense stage and three
//! transposed-conv layers producing exactly 400×3, a convolutional
//! discriminator with a sigmoid scalar head, and the poisoning/evasion
//! attack harnesses.

use std::io::{Read, Write};

use rustfft::{num_complex::Complex, FftPlanner};

use crate::data::{FixedSequence, AXES, FIXED_LEN};
use crate::error::{Error, Result};
use crate::nn::{
    bce, io as nn_io, relu_bwd, relu_fwd, sigmoid_fwd, tanh_bwd, tanh_fwd, AdamHyper, AdamState,
    Conv1d, ConvTranspose1d, Dense, Matrix, Tensor3,
};
use crate::preprocess::Standardizer;
use crate::rng::RandomStream;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct GanConfig {
    pub noise_dim: usize,
    /// Channel width at the generator's dense stage; halved by each of
    /// the first two transposed convs.
    pub gen_base_channels: usize,
    /// Generated sequence length; must be divisible by 8 (three ×2
    /// upsampling stages).
    pub target_len: usize,
    pub disc_kernel: usize,
    pub disc_stride: usize,
    pub disc_filters: (usize, usize),
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for GanConfig {
    fn default() -> Self {
        GanConfig {
            noise_dim: 100,
            gen_base_channels: 64,
            target_len: FIXED_LEN,
            disc_kernel: 10,
            disc_stride: 6,
            disc_filters: (32, 64),
            epochs: 50,
            batch_size: 32,
            lr: 2e-4,
            seed: 0,
        }
    }
}

/// Drop one element from each end of the time axis. Each transposed
/// conv (k=4, s=2) maps L to 2L+2; the symmetric crop brings it back to
/// exactly 2L, keeping the 50→100→200→400 ladder exact.
fn crop_ends(x: &Tensor3) -> Tensor3 {
    let mut y = Tensor3::zeros(x.batch, x.len - 2, x.channels);
    for b in 0..x.batch {
        for t in 0..y.len {
            for c in 0..x.channels {
                *y.at_mut(b, t, c) = x.at(b, t + 1, c);
            }
        }
    }
    y
}

/// Adjoint of [`crop_ends`]: zero-pad the gradient at both ends.
fn pad_ends(g: &Tensor3) -> Tensor3 {
    let mut y = Tensor3::zeros(g.batch, g.len + 2, g.channels);
    for b in 0..g.batch {
        for t in 0..g.len {
            for c in 0..g.channels {
                *y.at_mut(b, t + 1, c) = g.at(b, t, c);
            }
        }
    }
    y
}

/// Noise → dense → reshape (L/8 × C) → three transposed convs (k=4,
/// s=2, channels C → C/2 → C/4 → 3), ReLU between stages, tanh head
/// scaled by `amp` so the output range covers the real data's range
/// (standardized signals exceed ±1, which bare tanh cannot reach).
#[derive(Clone)]
pub struct Generator {
    pub noise_dim: usize,
    pub base_len: usize,
    pub base_ch: usize,
    pub amp: f64,
    dense: Dense,
    t1: ConvTranspose1d,
    t2: ConvTranspose1d,
    t3: ConvTranspose1d,
}

pub struct GenCache {
    noise: Matrix,
    z0: Matrix,
    a0: Tensor3,
    c1: Tensor3,
    a1: Tensor3,
    c2: Tensor3,
    a2: Tensor3,
    x3: Tensor3,
    c3: Tensor3,
    out: Tensor3,
}

impl Generator {
    pub fn new(cfg: &GanConfig, stream: &mut RandomStream) -> Result<Generator> {
        if cfg.target_len % 8 != 0 || cfg.target_len == 0 {
            return Err(Error::Usage(format!(
                "generator target length must be a positive multiple of 8, got {}",
                cfg.target_len
            )));
        }
        if cfg.gen_base_channels % 4 != 0 {
            return Err(Error::Usage(
                "gen_base_channels must be divisible by 4".into(),
            ));
        }
        let base_len = cfg.target_len / 8;
        let base_ch = cfg.gen_base_channels;
        Ok(Generator {
            noise_dim: cfg.noise_dim,
            base_len,
            base_ch,
            amp: 1.0,
            dense: Dense::new(cfg.noise_dim, base_len * base_ch, stream),
            t1: ConvTranspose1d::new(4, 2, base_ch, base_ch / 2, stream),
            t2: ConvTranspose1d::new(4, 2, base_ch / 2, base_ch / 4, stream),
            t3: ConvTranspose1d::new(4, 2, base_ch / 4, AXES, stream),
        })
    }

    pub fn forward(&self, noise: Matrix) -> Result<(Tensor3, GenCache)> {
        let z0 = self.dense.forward(&noise)?;
        let a0 = Matrix {
            data: relu_fwd(&z0.data),
            ..z0.clone()
        }
        .unflatten(self.base_len, self.base_ch)?;
        let x1 = self.t1.forward(&a0)?;
        let c1 = crop_ends(&x1);
        let a1 = Tensor3 {
            data: relu_fwd(&c1.data),
            ..c1.clone()
        };
        let x2 = self.t2.forward(&a1)?;
        let c2 = crop_ends(&x2);
        let a2 = Tensor3 {
            data: relu_fwd(&c2.data),
            ..c2.clone()
        };
        let x3 = self.t3.forward(&a2)?;
        let c3 = crop_ends(&x3);
        // cache holds the raw tanh output; the returned tensor is scaled
        let out = Tensor3 {
            data: tanh_fwd(&c3.data),
            ..c3.clone()
        };
        let scaled = Tensor3 {
            data: out.data.iter().map(|v| v * self.amp).collect(),
            ..out.clone()
        };
        Ok((
            scaled,
            GenCache {
                noise,
                z0,
                a0,
                c1,
                a1,
                c2,
                a2,
                x3,
                c3,
                out,
            },
        ))
    }

    pub fn backward(&mut self, cache: &GenCache, gout: &Tensor3) -> Result<()> {
        let gscaled: Vec<f64> = gout.data.iter().map(|v| v * self.amp).collect();
        let gc3 = Tensor3 {
            data: tanh_bwd(&cache.out.data, &gscaled),
            ..cache.c3.clone()
        };
        let gx3 = pad_ends(&gc3);
        debug_assert_eq!(gx3.len, cache.x3.len);
        let ga2 = self.t3.backward(&cache.a2, &gx3)?;
        let gc2 = Tensor3 {
            data: relu_bwd(&cache.c2.data, &ga2.data),
            ..ga2
        };
        let gx2 = pad_ends(&gc2);
        let ga1 = self.t2.backward(&cache.a1, &gx2)?;
        let gc1 = Tensor3 {
            data: relu_bwd(&cache.c1.data, &ga1.data),
            ..ga1
        };
        let gx1 = pad_ends(&gc1);
        let ga0 = self.t1.backward(&cache.a0, &gx1)?;
        let gz0 = Matrix {
            rows: cache.z0.rows,
            cols: cache.z0.cols,
            data: relu_bwd(&cache.z0.data, &ga0.data),
        };
        let _gnoise = self.dense.backward(&cache.noise, &gz0)?;
        Ok(())
    }

    pub fn zero_grads(&mut self) {
        self.dense.zero_grads();
        self.t1.zero_grads();
        self.t2.zero_grads();
        self.t3.zero_grads();
    }

    fn param_buffer_lens(&self) -> Vec<usize> {
        vec![
            self.dense.w.len(),
            self.dense.b.len(),
            self.t1.w.len(),
            self.t1.b.len(),
            self.t2.w.len(),
            self.t2.b.len(),
            self.t3.w.len(),
            self.t3.b.len(),
        ]
    }

    fn apply_adam(&mut self, opt: &mut [AdamState]) -> Result<()> {
        let pairs: Vec<(&mut [f64], &[f64])> = vec![
            (&mut self.dense.w[..], &self.dense.gw[..]),
            (&mut self.dense.b[..], &self.dense.gb[..]),
            (&mut self.t1.w[..], &self.t1.gw[..]),
            (&mut self.t1.b[..], &self.t1.gb[..]),
            (&mut self.t2.w[..], &self.t2.gw[..]),
            (&mut self.t2.b[..], &self.t2.gb[..]),
            (&mut self.t3.w[..], &self.t3.gw[..]),
            (&mut self.t3.b[..], &self.t3.gb[..]),
        ];
        for (state, (p, g)) in opt.iter_mut().zip(pairs) {
            state.step(p, g)?;
        }
        Ok(())
    }

    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        let meta = vec![
            self.noise_dim as f64,
            self.base_len as f64,
            self.base_ch as f64,
            self.amp,
        ];
        nn_io::save_params(
            &mut w,
            &[
                ("meta", &meta),
                ("dense.w", &self.dense.w),
                ("dense.b", &self.dense.b),
                ("t1.w", &self.t1.w),
                ("t1.b", &self.t1.b),
                ("t2.w", &self.t2.w),
                ("t2.b", &self.t2.b),
                ("t3.w", &self.t3.w),
                ("t3.b", &self.t3.b),
            ],
        )
    }

    pub fn load<R: Read>(r: R) -> Result<Generator> {
        let buffers = nn_io::load_params(r)?;
        let meta = nn_io::take_buffer(&buffers, "meta", 4)?;
        let cfg = GanConfig {
            noise_dim: meta[0] as usize,
            target_len: meta[1] as usize * 8,
            gen_base_channels: meta[2] as usize,
            ..Default::default()
        };
        let mut stream = RandomStream::new(0);
        let mut g = Generator::new(&cfg, &mut stream)?;
        g.amp = meta[3];
        g.dense.w = nn_io::take_buffer(&buffers, "dense.w", g.dense.w.len())?;
        g.dense.b = nn_io::take_buffer(&buffers, "dense.b", g.dense.b.len())?;
        g.t1.w = nn_io::take_buffer(&buffers, "t1.w", g.t1.w.len())?;
        g.t1.b = nn_io::take_buffer(&buffers, "t1.b", g.t1.b.len())?;
        g.t2.w = nn_io::take_buffer(&buffers, "t2.w", g.t2.w.len())?;
        g.t2.b = nn_io::take_buffer(&buffers, "t2.b", g.t2.b.len())?;
        g.t3.w = nn_io::take_buffer(&buffers, "t3.w", g.t3.w.len())?;
        g.t3.b = nn_io::take_buffer(&buffers, "t3.b", g.t3.b.len())?;
        Ok(g)
    }
}

/// Conv stack mirroring the classifier with a sigmoid scalar head.
pub struct Discriminator {
    pub in_len: usize,
    conv1: Conv1d,
    conv2: Conv1d,
    dense: Dense,
    flat_dim: usize,
}

pub struct DiscCache {
    x: Tensor3,
    z1: Tensor3,
    a1: Tensor3,
    z2: Tensor3,
    a2: Tensor3,
    flat: Matrix,
    logits: Matrix,
    probs: Vec<f64>,
}

impl Discriminator {
    pub fn new(cfg: &GanConfig, stream: &mut RandomStream) -> Result<Discriminator> {
        let conv1 = Conv1d::new(cfg.disc_kernel, cfg.disc_stride, AXES, cfg.disc_filters.0, stream);
        let conv2 = Conv1d::new(
            cfg.disc_kernel,
            cfg.disc_stride,
            cfg.disc_filters.0,
            cfg.disc_filters.1,
            stream,
        );
        let l1 = conv1.out_len(cfg.target_len)?;
        let l2 = conv2.out_len(l1)?;
        let flat_dim = l2 * cfg.disc_filters.1;
        let dense = Dense::new(flat_dim, 1, stream);
        Ok(Discriminator {
            in_len: cfg.target_len,
            conv1,
            conv2,
            dense,
            flat_dim,
        })
    }

    /// Probability each batch element is real, in (0,1).
    pub fn forward(&self, x: Tensor3) -> Result<(Vec<f64>, DiscCache)> {
        let z1 = self.conv1.forward(&x)?;
        let a1 = Tensor3 {
            data: relu_fwd(&z1.data),
            ..z1.clone()
        };
        let z2 = self.conv2.forward(&a1)?;
        let a2 = Tensor3 {
            data: relu_fwd(&z2.data),
            ..z2.clone()
        };
        let flat = a2.flatten();
        let logits = self.dense.forward(&flat)?;
        let probs = sigmoid_fwd(&logits.data);
        Ok((
            probs.clone(),
            DiscCache {
                x,
                z1,
                a1,
                z2,
                a2,
                flat,
                logits,
                probs,
            },
        ))
    }

    /// Backward from a gradient on the probabilities; returns the
    /// gradient with respect to the input sequences.
    pub fn backward(&mut self, cache: &DiscCache, gprobs: &[f64]) -> Result<Tensor3> {
        let glogits_data: Vec<f64> = cache
            .probs
            .iter()
            .zip(gprobs)
            .map(|(&p, &g)| p * (1.0 - p) * g)
            .collect();
        let glogits = Matrix {
            rows: cache.logits.rows,
            cols: 1,
            data: glogits_data,
        };
        let gflat = self.dense.backward(&cache.flat, &glogits)?;
        let ga2 = gflat.unflatten(cache.a2.len, cache.a2.channels)?;
        let gz2 = Tensor3 {
            data: relu_bwd(&cache.z2.data, &ga2.data),
            ..ga2
        };
        let ga1 = self.conv2.backward(&cache.a1, &gz2)?;
        let gz1 = Tensor3 {
            data: relu_bwd(&cache.z1.data, &ga1.data),
            ..ga1
        };
        self.conv1.backward(&cache.x, &gz1)
    }

    pub fn zero_grads(&mut self) {
        self.conv1.zero_grads();
        self.conv2.zero_grads();
        self.dense.zero_grads();
    }

    fn param_buffer_lens(&self) -> Vec<usize> {
        vec![
            self.conv1.w.len(),
            self.conv1.b.len(),
            self.conv2.w.len(),
            self.conv2.b.len(),
            self.dense.w.len(),
            self.dense.b.len(),
        ]
    }

    fn apply_adam(&mut self, opt: &mut [AdamState]) -> Result<()> {
        let pairs: Vec<(&mut [f64], &[f64])> = vec![
            (&mut self.conv1.w[..], &self.conv1.gw[..]),
            (&mut self.conv1.b[..], &self.conv1.gb[..]),
            (&mut self.conv2.w[..], &self.conv2.gw[..]),
            (&mut self.conv2.b[..], &self.conv2.gb[..]),
            (&mut self.dense.w[..], &self.dense.gw[..]),
            (&mut self.dense.b[..], &self.dense.gb[..]),
        ];
        for (state, (p, g)) in opt.iter_mut().zip(pairs) {
            state.step(p, g)?;
        }
        Ok(())
    }

    pub fn flat_dim(&self) -> usize {
        self.flat_dim
    }
}

/// One (discriminator loss, generator loss) pair per epoch.
pub type LossCurves = Vec<(f64, f64)>;

fn seqs_to_tensor(seqs: &[&FixedSequence], target_len: usize) -> Result<Tensor3> {
    let mut t = Tensor3::zeros(seqs.len(), target_len, AXES);
    for (b, s) in seqs.iter().enumerate() {
        if s.data.len() != target_len {
            return Err(Error::Usage(format!(
                "GAN expects sequences of length {target_len}, got {}",
                s.data.len()
            )));
        }
        for (ti, row) in s.data.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                *t.at_mut(b, ti, c) = v;
            }
        }
    }
    Ok(t)
}

/// Alternating BCE training: the discriminator sees real→1 and fake→0,
/// then the generator is updated through the discriminator toward
/// fake→1. Inputs are expected in standardized (roughly unit) scale to
/// match the tanh head.
pub fn train_gan(
    real: &[FixedSequence],
    cfg: &GanConfig,
    stream: &mut RandomStream,
) -> Result<(Generator, Discriminator, LossCurves)> {
    let (gen, disc, curves, _) = train_gan_with_checkpoints(real, cfg, stream, &[])?;
    Ok((gen, disc, curves))
}

/// As [`train_gan`], additionally snapshotting the generator after each
/// listed epoch count (so one run yields the 10/25/50/100-epoch
/// progression).
pub fn train_gan_with_checkpoints(
    real: &[FixedSequence],
    cfg: &GanConfig,
    stream: &mut RandomStream,
    checkpoints: &[usize],
) -> Result<(Generator, Discriminator, LossCurves, Vec<(usize, Generator)>)> {
    if real.len() < cfg.batch_size {
        return Err(Error::Data(format!(
            "GAN training needs at least one full batch ({} samples), got {}",
            cfg.batch_size,
            real.len()
        )));
    }
    let mut init_stream = stream.fork(0);
    let mut gen = Generator::new(cfg, &mut init_stream)?;
    // tanh head must be able to reach the extremes of the real signals
    let max_abs = real
        .iter()
        .flat_map(|s| s.data.iter().flatten())
        .fold(0.0f64, |a, &v| a.max(v.abs()));
    gen.amp = (max_abs * 1.05).max(1.0);
    let mut disc = Discriminator::new(cfg, &mut init_stream)?;
    let mut shuffle_stream = stream.fork(1);
    let mut noise_stream = stream.fork(2);

    let g_hyper = AdamHyper {
        lr: cfg.lr,
        ..AdamHyper::gan()
    };
    // handicap the discriminator: on a corpus this small it otherwise
    // wins outright and the generator's gradients turn into noise
    let d_hyper = AdamHyper {
        lr: cfg.lr * 0.25,
        ..AdamHyper::gan()
    };
    let mut g_opt: Vec<AdamState> = gen
        .param_buffer_lens()
        .into_iter()
        .map(|len| AdamState::new(len, g_hyper))
        .collect();
    let mut d_opt: Vec<AdamState> = disc
        .param_buffer_lens()
        .into_iter()
        .map(|len| AdamState::new(len, d_hyper))
        .collect();

    let mut curves = Vec::with_capacity(cfg.epochs);
    let mut snapshots = Vec::new();
    let mut order: Vec<usize> = (0..real.len()).collect();
    for epoch in 0..cfg.epochs {
        shuffle_stream.shuffle(&mut order);
        let mut d_loss_sum = 0.0;
        let mut g_loss_sum = 0.0;
        let mut batches = 0usize;
        for batch_idx in order.chunks(cfg.batch_size) {
            if batch_idx.len() < cfg.batch_size {
                continue; // keep batch statistics uniform
            }
            let n = batch_idx.len();
            let real_batch: Vec<&FixedSequence> =
                batch_idx.iter().map(|&i| &real[i]).collect();
            let real_x = seqs_to_tensor(&real_batch, cfg.target_len)?;

            let mut noise = Matrix::zeros(n, cfg.noise_dim);
            noise_stream.fill_normal(&mut noise.data);
            let (fake_x, gen_cache) = gen.forward(noise)?;

            // discriminator step
            disc.zero_grads();
            let (p_real, cache_real) = disc.forward(real_x)?;
            let ones = vec![1.0; n];
            let smooth = vec![0.9; n]; // one-sided label smoothing
            let zeros = vec![0.0; n];
            let (loss_real, grad_real) = bce(&p_real, &smooth)?;
            disc.backward(&cache_real, &grad_real)?;
            let (p_fake, cache_fake) = disc.forward(fake_x.clone())?;
            let (loss_fake, grad_fake) = bce(&p_fake, &zeros)?;
            disc.backward(&cache_fake, &grad_fake)?;
            let d_loss = loss_real + loss_fake;
            if !d_loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite discriminator loss after {} epochs; curves: {curves:?}",
                    curves.len()
                )));
            }
            disc.apply_adam(&mut d_opt)?;

            // generator steps: fake → 1 through the (frozen)
            // discriminator, twice per discriminator update to keep the
            // race balanced on small corpora
            let mut g_loss = 0.0;
            let mut step_cache = Some(gen_cache);
            let mut step_fake = fake_x;
            for g_step in 0..2 {
                disc.zero_grads();
                let (p_gen, cache_gen) = disc.forward(step_fake.clone())?;
                let (loss, grad_gen) = bce(&p_gen, &ones)?;
                g_loss = loss;
                if !g_loss.is_finite() {
                    return Err(Error::Numeric(format!(
                        "non-finite generator loss after {} epochs; curves: {curves:?}",
                        curves.len()
                    )));
                }
                let gfake = disc.backward(&cache_gen, &grad_gen)?;
                disc.zero_grads();
                gen.zero_grads();
                gen.backward(&step_cache.take().unwrap(), &gfake)?;
                gen.apply_adam(&mut g_opt)?;
                if g_step == 0 {
                    let mut noise = Matrix::zeros(n, cfg.noise_dim);
                    noise_stream.fill_normal(&mut noise.data);
                    let (fx, gc) = gen.forward(noise)?;
                    step_fake = fx;
                    step_cache = Some(gc);
                }
            }

            d_loss_sum += d_loss;
            g_loss_sum += g_loss;
            batches += 1;
        }
        if batches == 0 {
            return Err(Error::Data("no full batch available".into()));
        }
        curves.push((d_loss_sum / batches as f64, g_loss_sum / batches as f64));
        if checkpoints.contains(&(epoch + 1)) {
            snapshots.push((epoch + 1, gen.clone()));
        }
    }
    Ok((gen, disc, curves, snapshots))
}

/// Draw n fakes from n independent noise vectors. Outputs live in the
/// standardized space the GAN was trained in; `user_id` is 0 and only a
/// placeholder until a label policy assigns one.
pub fn generate(gen: &Generator, n: usize, stream: &mut RandomStream) -> Result<Vec<FixedSequence>> {
    let mut out = Vec::with_capacity(n);
    for chunk in 0..n.div_ceil(64) {
        let batch = (n - chunk * 64).min(64);
        let mut noise = Matrix::zeros(batch, gen.noise_dim);
        stream.fill_normal(&mut noise.data);
        let (fake, _) = gen.forward(noise)?;
        for b in 0..batch {
            let data: Vec<[f64; AXES]> = (0..fake.len)
                .map(|t| [fake.at(b, t, 0), fake.at(b, t, 1), fake.at(b, t, 2)])
                .collect();
            out.push(FixedSequence::new(data, 0)?);
        }
    }
    Ok(out)
}

/// Map generated samples from standardized space back to g-units.
pub fn destandardize(fakes: &[FixedSequence], st: &Standardizer) -> Result<Vec<FixedSequence>> {
    fakes.iter().map(|f| st.inverse_sequence(f)).collect()
}

/// How poisoned samples are labeled.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum LabelPolicy {
    UniformRandom,
    SingleVictim(usize),
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PoisonSpec {
    pub n_adversarial: usize,
    pub gan_epochs: usize,
    pub label_policy: LabelPolicy,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoisonReport {
    pub baseline_accuracy: f64,
    pub poisoned_accuracy: f64,
    pub n_adversarial: usize,
    pub gan_epochs: usize,
}

/// Poison the training set with `n_adversarial` generated samples (all
/// real samples always retained), retrain the classifier from scratch,
/// and compare against the clean baseline trained with the same seed.
pub fn poison_attack(
    train: &[FixedSequence],
    test: &[FixedSequence],
    gen: &Generator,
    spec: &PoisonSpec,
    cnn_cfg: &crate::cnn::CnnConfig,
    num_users: usize,
) -> Result<PoisonReport> {
    let (_, baseline) = crate::cnn::train_and_evaluate(cnn_cfg, train, test, num_users)?;

    let mut stream = RandomStream::new(spec.seed);
    let mut fakes = generate(gen, spec.n_adversarial, &mut stream)?;
    for f in &mut fakes {
        f.user_id = match spec.label_policy {
            LabelPolicy::UniformRandom => stream.index(num_users),
            LabelPolicy::SingleVictim(u) => {
                if u >= num_users {
                    return Err(Error::Usage(format!(
                        "victim user {u} out of range for {num_users} users"
                    )));
                }
                u
            }
        };
    }
    let mut poisoned = train.to_vec();
    poisoned.extend(fakes);
    let (_, attacked) = crate::cnn::train_and_evaluate(cnn_cfg, &poisoned, test, num_users)?;
    Ok(PoisonReport {
        baseline_accuracy: baseline.test_accuracy,
        poisoned_accuracy: attacked.test_accuracy,
        n_adversarial: spec.n_adversarial,
        gan_epochs: spec.gan_epochs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvasionReport {
    /// Fraction of fakes classified as each user.
    pub acceptance: Vec<f64>,
    /// Predicted-class counts over all fakes; sums to the fake count.
    pub histogram: Vec<usize>,
    /// Max per-user acceptance counting only predictions whose softmax
    /// confidence clears the threshold.
    pub max_confident_acceptance: f64,
    pub threshold: f64,
}

/// Present fakes to a trained classifier and measure how often each user
/// would accept them.
pub fn evasion_attack(
    model: &crate::cnn::Cnn,
    fakes: &[FixedSequence],
    threshold: f64,
) -> Result<EvasionReport> {
    let n = fakes.len();
    let mut histogram = vec![0usize; model.num_users];
    let mut confident = vec![0usize; model.num_users];
    for f in fakes {
        let (label, scores) = model.predict(f)?;
        histogram[label] += 1;
        if scores[label] > threshold {
            confident[label] += 1;
        }
    }
    let acceptance: Vec<f64> = histogram
        .iter()
        .map(|&c| if n > 0 { c as f64 / n as f64 } else { 0.0 })
        .collect();
    let max_confident_acceptance = confident
        .iter()
        .map(|&c| if n > 0 { c as f64 / n as f64 } else { 0.0 })
        .fold(0.0, f64::max);
    Ok(EvasionReport {
        acceptance,
        histogram,
        max_confident_acceptance,
        threshold,
    })
}

/// Mean spectral flatness (geometric mean / arithmetic mean of the
/// power spectrum, DC excluded) over samples and axes. White noise
/// scores near 1, a pure tone near 0; used as the visual-realism proxy
/// for generated sequences.
pub fn mean_spectral_flatness(seqs: &[FixedSequence]) -> f64 {
    if seqs.is_empty() {
        return 0.0;
    }
    let len = seqs[0].data.len();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(len);
    let mut total = 0.0;
    let mut count = 0usize;
    for s in seqs {
        for a in 0..AXES {
            let mut buf: Vec<Complex<f64>> = s
                .data
                .iter()
                .map(|row| Complex::new(row[a], 0.0))
                .collect();
            fft.process(&mut buf);
            let bins = len / 2;
            let mut log_sum = 0.0;
            let mut lin_sum = 0.0;
            for item in buf.iter().take(bins + 1).skip(1) {
                let p = item.norm_sqr().max(1e-30);
                log_sum += p.ln();
                lin_sum += p;
            }
            let geo = (log_sum / bins as f64).exp();
            let arith = lin_sum / bins as f64;
            total += geo / arith;
            count += 1;
        }
    }
    total / count as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::check::{finite_diff_grad, max_rel_error};

    fn tiny_cfg() -> GanConfig {
        GanConfig {
            noise_dim: 4,
            gen_base_channels: 8,
            target_len: 16,
            disc_kernel: 3,
            disc_stride: 2,
            disc_filters: (3, 4),
            batch_size: 4,
            epochs: 2,
            ..Default::default()
        }
    }

    #[test]
    fn generator_output_shape() {
        let mut stream = RandomStream::new(1);
        let gen = Generator::new(&GanConfig::default(), &mut stream).unwrap();
        let mut noise = Matrix::zeros(3, 100);
        stream.fill_normal(&mut noise.data);
        let (out, _) = gen.forward(noise).unwrap();
        assert_eq!((out.batch, out.len, out.channels), (3, 400, 3));
        assert!(out.data.iter().all(|v| v.is_finite() && v.abs() <= gen.amp));
    }

    #[test]
    fn generate_contracts() {
        let mut stream = RandomStream::new(2);
        let gen = Generator::new(&GanConfig::default(), &mut stream).unwrap();
        let empty = generate(&gen, 0, &mut RandomStream::new(5)).unwrap();
        assert!(empty.is_empty());
        let a = generate(&gen, 3, &mut RandomStream::new(5)).unwrap();
        let b = generate(&gen, 3, &mut RandomStream::new(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generator_gradients_match_finite_differences_tiny() {
        let mut stream = RandomStream::new(3);
        let cfg = tiny_cfg();
        let mut gen = Generator::new(&cfg, &mut stream).unwrap();
        let mut noise = Matrix::zeros(2, cfg.noise_dim);
        stream.fill_normal(&mut noise.data);
        let (out, cache) = gen.forward(noise.clone()).unwrap();
        let coeffs: Vec<f64> = (0..out.data.len()).map(|_| stream.normal()).collect();
        let gout = Tensor3::from_vec(out.batch, out.len, out.channels, coeffs.clone()).unwrap();
        gen.zero_grads();
        gen.backward(&cache, &gout).unwrap();

        let loss = |g: &Generator| -> f64 {
            let (y, _) = g.forward(noise.clone()).unwrap();
            y.data.iter().zip(&coeffs).map(|(a, b)| a * b).sum()
        };
        let num_gw = finite_diff_grad(
            |w| {
                let mut g = Generator::new(&cfg, &mut RandomStream::new(3)).unwrap();
                g.dense.w = gen.dense.w.clone();
                g.dense.b = gen.dense.b.clone();
                g.t1.w = gen.t1.w.clone();
                g.t1.b = gen.t1.b.clone();
                g.t2.w = gen.t2.w.clone();
                g.t2.b = gen.t2.b.clone();
                g.t3.w = w.to_vec();
                g.t3.b = gen.t3.b.clone();
                loss(&g)
            },
            &gen.t3.w,
            1e-4,
        );
        assert!(max_rel_error(&gen.t3.gw, &num_gw) < 1e-4);
        let num_gdense = finite_diff_grad(
            |w| {
                let mut g = Generator::new(&cfg, &mut RandomStream::new(3)).unwrap();
                g.dense.w = w.to_vec();
                g.dense.b = gen.dense.b.clone();
                g.t1.w = gen.t1.w.clone();
                g.t1.b = gen.t1.b.clone();
                g.t2.w = gen.t2.w.clone();
                g.t2.b = gen.t2.b.clone();
                g.t3.w = gen.t3.w.clone();
                g.t3.b = gen.t3.b.clone();
                loss(&g)
            },
            &gen.dense.w,
            1e-4,
        );
        assert!(max_rel_error(&gen.dense.gw, &num_gdense) < 1e-4);
    }

    #[test]
    fn discriminator_input_gradient_matches_finite_differences_tiny() {
        let mut stream = RandomStream::new(4);
        let cfg = tiny_cfg();
        let mut disc = Discriminator::new(&cfg, &mut stream).unwrap();
        let mut x = Tensor3::zeros(2, cfg.target_len, AXES);
        stream.fill_normal(&mut x.data);
        let (probs, cache) = disc.forward(x.clone()).unwrap();
        let coeffs: Vec<f64> = (0..probs.len()).map(|_| stream.normal()).collect();
        disc.zero_grads();
        let gx = disc.backward(&cache, &coeffs).unwrap();
        let num_gx = finite_diff_grad(
            |data| {
                let xt =
                    Tensor3::from_vec(x.batch, x.len, x.channels, data.to_vec()).unwrap();
                let (p, _) = disc.forward(xt).unwrap();
                p.iter().zip(&coeffs).map(|(a, b)| a * b).sum()
            },
            &x.data,
            1e-4,
        );
        assert!(max_rel_error(&gx.data, &num_gx) < 1e-4);
    }

    #[test]
    fn untrained_discriminator_near_chance() {
        let mut stream = RandomStream::new(6);
        let cfg = GanConfig::default();
        let disc = Discriminator::new(&cfg, &mut stream).unwrap();
        // real-ish sequences vs pure noise, scored by a fresh (epoch-0) model
        let mut correct = 0usize;
        let n = 100;
        for i in 0..n {
            let mut x = Tensor3::zeros(1, cfg.target_len, AXES);
            if i % 2 == 0 {
                for t in 0..cfg.target_len {
                    for c in 0..AXES {
                        *x.at_mut(0, t, c) = (t as f64 * 0.05 + c as f64).sin();
                    }
                }
            } else {
                stream.fill_normal(&mut x.data);
            }
            let (p, _) = disc.forward(x).unwrap();
            let says_real = p[0] > 0.5;
            if says_real == (i % 2 == 0) {
                correct += 1;
            }
        }
        let acc = correct as f64 / n as f64;
        assert!((acc - 0.5).abs() <= 0.1 + 0.1, "untrained accuracy {acc}");
    }

    #[test]
    fn spectral_flatness_orders_noise_and_tone() {
        let mut stream = RandomStream::new(7);
        let tone: Vec<[f64; 3]> = (0..400)
            .map(|t| {
                let v = (2.0 * std::f64::consts::PI * 5.0 * t as f64 / 400.0).sin();
                [v, v, v]
            })
            .collect();
        let noise: Vec<[f64; 3]> = (0..400)
            .map(|_| [stream.normal(), stream.normal(), stream.normal()])
            .collect();
        let f_tone = mean_spectral_flatness(&[FixedSequence::new(tone, 0).unwrap()]);
        let f_noise = mean_spectral_flatness(&[FixedSequence::new(noise, 0).unwrap()]);
        assert!(f_tone < 0.1, "tone flatness {f_tone}");
        assert!(f_noise > 0.3, "noise flatness {f_noise}");
    }

    #[test]
    fn generator_save_load_round_trip() {
        let mut stream = RandomStream::new(8);
        let gen = Generator::new(&tiny_cfg(), &mut stream).unwrap();
        let mut buf = Vec::new();
        gen.save(&mut buf).unwrap();
        let loaded = Generator::load(buf.as_slice()).unwrap();
        let mut noise = Matrix {
            rows: 2,
            cols: gen.noise_dim,
            data: vec![0.0; 2 * gen.noise_dim],
        };
        RandomStream::new(1).fill_normal(&mut noise.data);
        let (a, _) = gen.forward(noise.clone()).unwrap();
        let (b, _) = loaded.forward(noise).unwrap();
        assert_eq!(a.data, b.data);
    }

    #[test]
    fn evasion_histogram_partitions() {
        let mut stream = RandomStream::new(9);
        let cnn_cfg = crate::cnn::CnnConfig {
            filters: (4, 8),
            hidden_dense_units: 8,
            ..Default::default()
        };
        let model = crate::cnn::Cnn::build(cnn_cfg, 3, &mut stream).unwrap();
        let fakes: Vec<FixedSequence> = (0..17)
            .map(|i| {
                let data = (0..FIXED_LEN)
                    .map(|t| {
                        let v = ((t + i) as f64 * 0.01).sin();
                        [v, -v, 0.5 * v]
                    })
                    .collect();
                FixedSequence::new(data, 0).unwrap()
            })
            .collect();
        let report = evasion_attack(&model, &fakes, 0.5).unwrap();
        assert_eq!(report.histogram.iter().sum::<usize>(), 17);
        assert!(report.acceptance.iter().all(|&a| (0.0..=1.0).contains(&a)));
    }
}
