//! 1D-CNN authentication model: conv → ReLU → conv → ReLU → dropout →
//! maxpool → flatten → dense → dense, trained with mini-batch Adam on
//! softmax cross-entropy, plus the kernel/stride sweep harness.

use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;

use crate::data::{FixedSequence, AXES, FIXED_LEN};
use crate::error::{Error, Result};
use crate::metrics::{confusion, metrics, ConfusionMatrix};
use crate::nn::{
    dropout_bwd, dropout_fwd, io as nn_io, relu_bwd, relu_fwd, softmax_xent, AdamHyper,
    AdamState, Conv1d, Dense, Matrix, MaxPool1d, Tensor3,
};
use crate::rng::{derive_seed, RandomStream};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct CnnConfig {
    pub kernel_size: usize,
    pub stride: usize,
    pub filters: (usize, usize),
    pub dropout_rate: f64,
    pub hidden_dense_units: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for CnnConfig {
    fn default() -> Self {
        CnnConfig {
            kernel_size: 10,
            stride: 6,
            filters: (128, 256),
            dropout_rate: 0.5,
            hidden_dense_units: 128,
            epochs: 50,
            batch_size: 32,
            lr: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub per_epoch: Vec<EpochStats>,
    pub test_accuracy: f64,
    pub test_far: f64,
    pub test_frr: f64,
    pub wall_secs: f64,
    pub config: CnnConfig,
}

/// Derived layer lengths for a given config on the standard 400×3 input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapePlan {
    pub conv1_len: usize,
    pub conv2_len: usize,
    pub pool_len: usize,
    pub flat_dim: usize,
}

pub struct Cnn {
    pub cfg: CnnConfig,
    pub num_users: usize,
    pub shapes: ShapePlan,
    conv1: Conv1d,
    conv2: Conv1d,
    pool: MaxPool1d,
    dense1: Dense,
    dense2: Dense,
}

struct ForwardCache {
    x: Tensor3,
    z1: Tensor3,
    a1: Tensor3,
    z2: Tensor3,
    dropped: Tensor3,
    drop_mask: Vec<f64>,
    pooled: Tensor3,
    argmax: Vec<usize>,
    flat: Matrix,
    h: Matrix,
    ha: Matrix,
}

/// Compute the layer-length algebra for 400×3 input; errors if any
/// stage collapses below its kernel or pooling window.
pub fn plan_shapes(cfg: &CnnConfig) -> Result<ShapePlan> {
    let conv_len = |l: usize| -> Result<usize> {
        if l < cfg.kernel_size {
            return Err(Error::Usage(format!(
                "kernel {} does not fit input length {l}",
                cfg.kernel_size
            )));
        }
        Ok((l - cfg.kernel_size) / cfg.stride + 1)
    };
    if cfg.stride == 0 {
        return Err(Error::Usage("stride must be positive".into()));
    }
    if !(0.0..1.0).contains(&cfg.dropout_rate) {
        return Err(Error::Usage(format!(
            "dropout rate must be in [0,1), got {}",
            cfg.dropout_rate
        )));
    }
    let conv1_len = conv_len(FIXED_LEN)?;
    let conv2_len = conv_len(conv1_len)?;
    let pool_len = conv2_len / 2;
    if pool_len == 0 {
        return Err(Error::Usage(format!(
            "config (k={}, s={}) leaves nothing after pooling",
            cfg.kernel_size, cfg.stride
        )));
    }
    Ok(ShapePlan {
        conv1_len,
        conv2_len,
        pool_len,
        flat_dim: pool_len * cfg.filters.1,
    })
}

impl Cnn {
    pub fn build(cfg: CnnConfig, num_users: usize, stream: &mut RandomStream) -> Result<Cnn> {
        if num_users < 2 {
            return Err(Error::Usage("classifier needs at least 2 users".into()));
        }
        let shapes = plan_shapes(&cfg)?;
        let conv1 = Conv1d::new(cfg.kernel_size, cfg.stride, AXES, cfg.filters.0, stream);
        let conv2 = Conv1d::new(cfg.kernel_size, cfg.stride, cfg.filters.0, cfg.filters.1, stream);
        let dense1 = Dense::new(shapes.flat_dim, cfg.hidden_dense_units, stream);
        let dense2 = Dense::new(cfg.hidden_dense_units, num_users, stream);
        Ok(Cnn {
            cfg,
            num_users,
            shapes,
            conv1,
            conv2,
            pool: MaxPool1d { window: 2 },
            dense1,
            dense2,
        })
    }

    fn forward(
        &self,
        x: Tensor3,
        dropout_stream: Option<&mut RandomStream>,
    ) -> Result<(Matrix, ForwardCache)> {
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
        let (dropped_data, drop_mask) = match dropout_stream {
            Some(stream) => dropout_fwd(&a2.data, self.cfg.dropout_rate, stream, true)?,
            None => (a2.data.clone(), vec![1.0; a2.data.len()]),
        };
        let dropped = Tensor3 {
            data: dropped_data,
            ..a2.clone()
        };
        let (pooled, argmax) = self.pool.forward(&dropped)?;
        let flat = pooled.flatten();
        let h = self.dense1.forward(&flat)?;
        let ha = Matrix {
            data: relu_fwd(&h.data),
            ..h.clone()
        };
        let logits = self.dense2.forward(&ha)?;
        Ok((
            logits,
            ForwardCache {
                x,
                z1,
                a1,
                z2,
                dropped,
                drop_mask,
                pooled,
                argmax,
                flat,
                h,
                ha,
            },
        ))
    }

    fn backward(&mut self, cache: &ForwardCache, glogits: &Matrix) -> Result<()> {
        let gha = self.dense2.backward(&cache.ha, glogits)?;
        let gh = Matrix {
            data: relu_bwd(&cache.h.data, &gha.data),
            ..gha
        };
        let gflat = self.dense1.backward(&cache.flat, &gh)?;
        let gpooled = gflat.unflatten(cache.pooled.len, cache.pooled.channels)?;
        let gdropped = self.pool.backward(&gpooled, &cache.argmax, cache.dropped.len);
        let ga2 = Tensor3 {
            data: dropout_bwd(&cache.drop_mask, &gdropped.data),
            ..gdropped
        };
        let gz2 = Tensor3 {
            data: relu_bwd(&cache.z2.data, &ga2.data),
            ..ga2
        };
        let ga1 = self.conv2.backward(&cache.a1, &gz2)?;
        let gz1 = Tensor3 {
            data: relu_bwd(&cache.z1.data, &ga1.data),
            ..ga1
        };
        let _gx = self.conv1.backward(&cache.x, &gz1)?;
        Ok(())
    }

    fn zero_grads(&mut self) {
        self.conv1.zero_grads();
        self.conv2.zero_grads();
        self.dense1.zero_grads();
        self.dense2.zero_grads();
    }

    /// Class scores after softmax (dropout disabled); sums to 1.
    pub fn predict_scores(&self, seq: &FixedSequence) -> Result<Vec<f64>> {
        let x = batch_tensor(std::slice::from_ref(seq));
        let (logits, _) = self.forward(x, None)?;
        let row = logits.row(0);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|&v| (v - max).exp()).collect();
        let denom: f64 = exps.iter().sum();
        Ok(exps.iter().map(|&e| e / denom).collect())
    }

    pub fn predict(&self, seq: &FixedSequence) -> Result<(usize, Vec<f64>)> {
        let scores = self.predict_scores(seq)?;
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        Ok((best, scores))
    }

    /// Batched argmax predictions (no dropout).
    pub fn predict_batch(&self, seqs: &[FixedSequence]) -> Result<Vec<usize>> {
        let mut preds = Vec::with_capacity(seqs.len());
        for chunk in seqs.chunks(64) {
            let x = batch_tensor(chunk);
            let (logits, _) = self.forward(x, None)?;
            for r in 0..logits.rows {
                let row = logits.row(r);
                let mut best = 0;
                for (i, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = i;
                    }
                }
                preds.push(best);
            }
        }
        Ok(preds)
    }

    /// One Adam step on a single batch; returns (mean loss, #correct).
    fn train_batch(
        &mut self,
        seqs: &[&FixedSequence],
        opt: &mut Vec<AdamState>,
        dropout_stream: &mut RandomStream,
    ) -> Result<(f64, usize)> {
        let x = batch_tensor_refs(seqs);
        let labels: Vec<usize> = seqs.iter().map(|s| s.user_id).collect();
        self.zero_grads();
        let (logits, cache) = self.forward(x, Some(dropout_stream))?;
        let (loss, glogits, probs) = softmax_xent(&logits, &labels)?;
        if !loss.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite training loss ({loss}) on a batch of {}",
                seqs.len()
            )));
        }
        let correct = (0..probs.rows)
            .filter(|&r| {
                let row = probs.row(r);
                let mut best = 0;
                for (i, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = i;
                    }
                }
                best == labels[r]
            })
            .count();
        self.backward(&cache, &glogits)?;
        let mut bufs = self.param_grad_pairs();
        for (state, (p, g)) in opt.iter_mut().zip(bufs.iter_mut()) {
            state.step(p, g)?;
        }
        Ok((loss, correct))
    }

    fn param_grad_pairs(&mut self) -> Vec<(&mut [f64], Vec<f64>)> {
        vec![
            (&mut self.conv1.w[..], self.conv1.gw.clone()),
            (&mut self.conv1.b[..], self.conv1.gb.clone()),
            (&mut self.conv2.w[..], self.conv2.gw.clone()),
            (&mut self.conv2.b[..], self.conv2.gb.clone()),
            (&mut self.dense1.w[..], self.dense1.gw.clone()),
            (&mut self.dense1.b[..], self.dense1.gb.clone()),
            (&mut self.dense2.w[..], self.dense2.gw.clone()),
            (&mut self.dense2.b[..], self.dense2.gb.clone()),
        ]
    }

    fn param_buffer_lens(&self) -> Vec<usize> {
        vec![
            self.conv1.w.len(),
            self.conv1.b.len(),
            self.conv2.w.len(),
            self.conv2.b.len(),
            self.dense1.w.len(),
            self.dense1.b.len(),
            self.dense2.w.len(),
            self.dense2.b.len(),
        ]
    }

    /// Mini-batch training. Shuffling, dropout, and initialization all
    /// draw from streams derived from cfg.seed, so two runs with the same
    /// seed produce identical weights.
    pub fn train(
        &mut self,
        train: &[FixedSequence],
        stream: &mut RandomStream,
    ) -> Result<Vec<EpochStats>> {
        if train.is_empty() {
            return Err(Error::Data("empty training set".into()));
        }
        let hyper = AdamHyper {
            lr: self.cfg.lr,
            ..AdamHyper::classifier()
        };
        let mut opt: Vec<AdamState> = self
            .param_buffer_lens()
            .into_iter()
            .map(|len| AdamState::new(len, hyper))
            .collect();
        let mut shuffle_stream = stream.fork(1);
        let mut dropout_stream = stream.fork(2);

        let mut per_epoch = Vec::with_capacity(self.cfg.epochs);
        let mut order: Vec<usize> = (0..train.len()).collect();
        for _epoch in 0..self.cfg.epochs {
            shuffle_stream.shuffle(&mut order);
            let mut loss_sum = 0.0;
            let mut correct = 0usize;
            let mut batches = 0usize;
            for batch_idx in order.chunks(self.cfg.batch_size) {
                let batch: Vec<&FixedSequence> = batch_idx.iter().map(|&i| &train[i]).collect();
                let (loss, c) = self.train_batch(&batch, &mut opt, &mut dropout_stream)?;
                loss_sum += loss;
                correct += c;
                batches += 1;
            }
            per_epoch.push(EpochStats {
                loss: loss_sum / batches as f64,
                accuracy: correct as f64 / train.len() as f64,
            });
        }
        Ok(per_epoch)
    }

    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        let meta = vec![
            self.cfg.kernel_size as f64,
            self.cfg.stride as f64,
            self.cfg.filters.0 as f64,
            self.cfg.filters.1 as f64,
            self.cfg.dropout_rate,
            self.cfg.hidden_dense_units as f64,
            self.num_users as f64,
        ];
        nn_io::save_params(
            &mut w,
            &[
                ("meta", &meta),
                ("conv1.w", &self.conv1.w),
                ("conv1.b", &self.conv1.b),
                ("conv2.w", &self.conv2.w),
                ("conv2.b", &self.conv2.b),
                ("dense1.w", &self.dense1.w),
                ("dense1.b", &self.dense1.b),
                ("dense2.w", &self.dense2.w),
                ("dense2.b", &self.dense2.b),
            ],
        )
    }

    pub fn load<R: Read>(r: R) -> Result<Cnn> {
        let buffers = nn_io::load_params(r)?;
        let meta = nn_io::take_buffer(&buffers, "meta", 7)?;
        let cfg = CnnConfig {
            kernel_size: meta[0] as usize,
            stride: meta[1] as usize,
            filters: (meta[2] as usize, meta[3] as usize),
            dropout_rate: meta[4],
            hidden_dense_units: meta[5] as usize,
            ..Default::default()
        };
        let num_users = meta[6] as usize;
        let mut stream = RandomStream::new(0);
        let mut model = Cnn::build(cfg, num_users, &mut stream)?;
        model.conv1.w = nn_io::take_buffer(&buffers, "conv1.w", model.conv1.w.len())?;
        model.conv1.b = nn_io::take_buffer(&buffers, "conv1.b", model.conv1.b.len())?;
        model.conv2.w = nn_io::take_buffer(&buffers, "conv2.w", model.conv2.w.len())?;
        model.conv2.b = nn_io::take_buffer(&buffers, "conv2.b", model.conv2.b.len())?;
        model.dense1.w = nn_io::take_buffer(&buffers, "dense1.w", model.dense1.w.len())?;
        model.dense1.b = nn_io::take_buffer(&buffers, "dense1.b", model.dense1.b.len())?;
        model.dense2.w = nn_io::take_buffer(&buffers, "dense2.w", model.dense2.w.len())?;
        model.dense2.b = nn_io::take_buffer(&buffers, "dense2.b", model.dense2.b.len())?;
        Ok(model)
    }

    /// Snapshot of all parameter buffers, for determinism checks.
    pub fn param_snapshot(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.conv1.w);
        out.extend_from_slice(&self.conv1.b);
        out.extend_from_slice(&self.conv2.w);
        out.extend_from_slice(&self.conv2.b);
        out.extend_from_slice(&self.dense1.w);
        out.extend_from_slice(&self.dense1.b);
        out.extend_from_slice(&self.dense2.w);
        out.extend_from_slice(&self.dense2.b);
        out
    }
}

pub fn batch_tensor(seqs: &[FixedSequence]) -> Tensor3 {
    let refs: Vec<&FixedSequence> = seqs.iter().collect();
    batch_tensor_refs(&refs)
}

fn batch_tensor_refs(seqs: &[&FixedSequence]) -> Tensor3 {
    let mut t = Tensor3::zeros(seqs.len(), FIXED_LEN, AXES);
    for (b, s) in seqs.iter().enumerate() {
        for (ti, row) in s.data.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                *t.at_mut(b, ti, c) = v;
            }
        }
    }
    t
}

pub fn evaluate(model: &Cnn, test: &[FixedSequence]) -> Result<(ConfusionMatrix, f64, f64, f64)> {
    let preds = model.predict_batch(test)?;
    let truths: Vec<usize> = test.iter().map(|s| s.user_id).collect();
    let cm = confusion(&truths, &preds, model.num_users)?;
    let m = metrics(&cm)?;
    Ok((cm, m.accuracy, m.far, m.frr))
}

/// Train a model from scratch and evaluate it on the held-out split.
pub fn train_and_evaluate(
    cfg: &CnnConfig,
    train: &[FixedSequence],
    test: &[FixedSequence],
    num_users: usize,
) -> Result<(Cnn, TrainReport)> {
    let start = Instant::now();
    let mut stream = RandomStream::new(cfg.seed);
    let mut model = Cnn::build(cfg.clone(), num_users, &mut stream)?;
    let per_epoch = model.train(train, &mut stream)?;
    let (_, acc, far, frr) = evaluate(&model, test)?;
    let report = TrainReport {
        per_epoch,
        test_accuracy: acc,
        test_far: far,
        test_frr: frr,
        wall_secs: start.elapsed().as_secs_f64(),
        config: cfg.clone(),
    };
    Ok((model, report))
}

/// Full cross-product (kernel × stride) sweep; cells run concurrently,
/// each with a seed derived from (base seed, cell index).
pub fn sweep(
    train: &[FixedSequence],
    test: &[FixedSequence],
    kernels: &[usize],
    strides: &[usize],
    base_cfg: &CnnConfig,
    num_users: usize,
) -> Result<Vec<TrainReport>> {
    let cells: Vec<(usize, usize, usize)> = strides
        .iter()
        .enumerate()
        .flat_map(|(si, &s)| {
            kernels
                .iter()
                .enumerate()
                .map(move |(ki, &k)| (si * 1000 + ki, k, s))
        })
        .collect();
    cells
        .par_iter()
        .map(|&(cell, k, s)| {
            let cfg = CnnConfig {
                kernel_size: k,
                stride: s,
                seed: derive_seed(base_cfg.seed, cell as u64),
                ..base_cfg.clone()
            };
            train_and_evaluate(&cfg, train, test, num_users).map(|(_, r)| r)
        })
        .collect()
}

/// Render a sweep as a CSV grid: one row per stride, one column per kernel.
pub fn sweep_csv(kernels: &[usize], strides: &[usize], reports: &[TrainReport]) -> String {
    let mut out = String::from("stride");
    for k in kernels {
        out.push_str(&format!(",kernel_{k}"));
    }
    out.push('\n');
    for (si, s) in strides.iter().enumerate() {
        out.push_str(&s.to_string());
        for ki in 0..kernels.len() {
            let r = &reports[si * kernels.len() + ki];
            out.push_str(&format!(",{:.5}", r.test_accuracy));
        }
        out.push('\n');
    }
    out
}
