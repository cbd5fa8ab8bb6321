//! Forward/backward kernels: 1D convolution (cross-correlation
//! convention, valid padding), its transpose, max-pooling, dense layers,
//! activations, and inverted dropout. Backward passes accumulate into
//! the layer's gradient buffers.

use rayon::prelude::*;

use super::tensor::{Matrix, Tensor3};
use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// 1D convolution, weights indexed [out_ch][tap][in_ch].
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1d {
    pub k: usize,
    pub s: usize,
    pub in_ch: usize,
    pub out_ch: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub gw: Vec<f64>,
    pub gb: Vec<f64>,
}

impl Conv1d {
    pub fn new(k: usize, s: usize, in_ch: usize, out_ch: usize, stream: &mut RandomStream) -> Self {
        // He-style fan-in scaling
        let scale = (2.0 / (k * in_ch) as f64).sqrt();
        let mut w = vec![0.0; out_ch * k * in_ch];
        for v in &mut w {
            *v = scale * stream.normal();
        }
        Conv1d {
            k,
            s,
            in_ch,
            out_ch,
            w,
            b: vec![0.0; out_ch],
            gw: vec![0.0; out_ch * k * in_ch],
            gb: vec![0.0; out_ch],
        }
    }

    pub fn out_len(&self, in_len: usize) -> Result<usize> {
        if in_len < self.k {
            return Err(Error::Usage(format!(
                "conv1d input length {in_len} shorter than kernel {}",
                self.k
            )));
        }
        Ok((in_len - self.k) / self.s + 1)
    }

    pub fn forward(&self, x: &Tensor3) -> Result<Tensor3> {
        if x.channels != self.in_ch {
            return Err(Error::Usage(format!(
                "conv1d expects {} channels, got {}",
                self.in_ch, x.channels
            )));
        }
        let lo = self.out_len(x.len)?;
        let mut y = Tensor3::zeros(x.batch, lo, self.out_ch);
        let in_stride = x.len * x.channels;
        let out_stride = lo * self.out_ch;
        y.data
            .par_chunks_mut(out_stride)
            .enumerate()
            .for_each(|(b, yb)| {
                let xb = &x.data[b * in_stride..(b + 1) * in_stride];
                for t in 0..lo {
                    let base = t * self.s;
                    for o in 0..self.out_ch {
                        let mut acc = self.b[o];
                        for tau in 0..self.k {
                            let xoff = (base + tau) * self.in_ch;
                            let woff = (o * self.k + tau) * self.in_ch;
                            for i in 0..self.in_ch {
                                acc += self.w[woff + i] * xb[xoff + i];
                            }
                        }
                        yb[t * self.out_ch + o] = acc;
                    }
                }
            });
        Ok(y)
    }

    /// Accumulates weight/bias gradients; returns the input gradient.
    pub fn backward(&mut self, x: &Tensor3, gy: &Tensor3) -> Result<Tensor3> {
        let lo = self.out_len(x.len)?;
        if gy.batch != x.batch || gy.len != lo || gy.channels != self.out_ch {
            return Err(Error::Usage("conv1d backward shape mismatch".into()));
        }
        let mut gx = Tensor3::zeros(x.batch, x.len, x.channels);

        // input gradient, parallel over batch
        let in_stride = x.len * x.channels;
        let out_stride = lo * self.out_ch;
        gx.data
            .par_chunks_mut(in_stride)
            .enumerate()
            .for_each(|(b, gxb)| {
                let gyb = &gy.data[b * out_stride..(b + 1) * out_stride];
                for t in 0..lo {
                    let base = t * self.s;
                    for o in 0..self.out_ch {
                        let g = gyb[t * self.out_ch + o];
                        if g == 0.0 {
                            continue;
                        }
                        for tau in 0..self.k {
                            let xoff = (base + tau) * self.in_ch;
                            let woff = (o * self.k + tau) * self.in_ch;
                            for i in 0..self.in_ch {
                                gxb[xoff + i] += self.w[woff + i] * g;
                            }
                        }
                    }
                }
            });

        // weight gradient, parallel over output channels (disjoint slices)
        let k = self.k;
        let s = self.s;
        let in_ch = self.in_ch;
        let out_ch = self.out_ch;
        self.gw
            .par_chunks_mut(k * in_ch)
            .zip(self.gb.par_iter_mut())
            .enumerate()
            .for_each(|(o, (gwo, gbo))| {
                for b in 0..x.batch {
                    let xb = &x.data[b * in_stride..(b + 1) * in_stride];
                    let gyb = &gy.data[b * out_stride..(b + 1) * out_stride];
                    for t in 0..lo {
                        let g = gyb[t * out_ch + o];
                        if g == 0.0 {
                            continue;
                        }
                        *gbo += g;
                        let base = t * s;
                        for tau in 0..k {
                            let xoff = (base + tau) * in_ch;
                            for i in 0..in_ch {
                                gwo[tau * in_ch + i] += xb[xoff + i] * g;
                            }
                        }
                    }
                }
            });
        Ok(gx)
    }

    pub fn zero_grads(&mut self) {
        self.gw.iter_mut().for_each(|g| *g = 0.0);
        self.gb.iter_mut().for_each(|g| *g = 0.0);
    }
}

/// 1D transposed convolution: the adjoint of [`Conv1d`] with the same
/// (k, s). Weights indexed [in_ch][tap][out_ch] — the same memory layout
/// as a `Conv1d` mapping out_ch→in_ch, so the adjoint identity holds on
/// a shared buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvTranspose1d {
    pub k: usize,
    pub s: usize,
    pub in_ch: usize,
    pub out_ch: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub gw: Vec<f64>,
    pub gb: Vec<f64>,
}

impl ConvTranspose1d {
    pub fn new(k: usize, s: usize, in_ch: usize, out_ch: usize, stream: &mut RandomStream) -> Self {
        let scale = (2.0 / (k * in_ch) as f64).sqrt();
        let mut w = vec![0.0; in_ch * k * out_ch];
        for v in &mut w {
            *v = scale * stream.normal();
        }
        ConvTranspose1d {
            k,
            s,
            in_ch,
            out_ch,
            w,
            b: vec![0.0; out_ch],
            gw: vec![0.0; in_ch * k * out_ch],
            gb: vec![0.0; out_ch],
        }
    }

    pub fn out_len(&self, in_len: usize) -> Result<usize> {
        if in_len == 0 {
            return Err(Error::Usage("conv_transpose1d needs input length >= 1".into()));
        }
        Ok((in_len - 1) * self.s + self.k)
    }

    pub fn forward(&self, x: &Tensor3) -> Result<Tensor3> {
        if x.channels != self.in_ch {
            return Err(Error::Usage(format!(
                "conv_transpose1d expects {} channels, got {}",
                self.in_ch, x.channels
            )));
        }
        let lo = self.out_len(x.len)?;
        let mut y = Tensor3::zeros(x.batch, lo, self.out_ch);
        let in_stride = x.len * x.channels;
        let out_stride = lo * self.out_ch;
        y.data
            .par_chunks_mut(out_stride)
            .enumerate()
            .for_each(|(b, yb)| {
                for v in yb.chunks_mut(self.out_ch) {
                    v.copy_from_slice(&self.b);
                }
                let xb = &x.data[b * in_stride..(b + 1) * in_stride];
                for t in 0..x.len {
                    for ci in 0..self.in_ch {
                        let xv = xb[t * self.in_ch + ci];
                        if xv == 0.0 {
                            continue;
                        }
                        for tau in 0..self.k {
                            let yoff = (t * self.s + tau) * self.out_ch;
                            let woff = (ci * self.k + tau) * self.out_ch;
                            for co in 0..self.out_ch {
                                yb[yoff + co] += xv * self.w[woff + co];
                            }
                        }
                    }
                }
            });
        Ok(y)
    }

    pub fn backward(&mut self, x: &Tensor3, gy: &Tensor3) -> Result<Tensor3> {
        let lo = self.out_len(x.len)?;
        if gy.batch != x.batch || gy.len != lo || gy.channels != self.out_ch {
            return Err(Error::Usage("conv_transpose1d backward shape mismatch".into()));
        }
        let mut gx = Tensor3::zeros(x.batch, x.len, x.channels);
        let in_stride = x.len * x.channels;
        let out_stride = lo * self.out_ch;

        gx.data
            .par_chunks_mut(in_stride)
            .enumerate()
            .for_each(|(b, gxb)| {
                let gyb = &gy.data[b * out_stride..(b + 1) * out_stride];
                for t in 0..x.len {
                    for ci in 0..self.in_ch {
                        let mut acc = 0.0;
                        for tau in 0..self.k {
                            let yoff = (t * self.s + tau) * self.out_ch;
                            let woff = (ci * self.k + tau) * self.out_ch;
                            for co in 0..self.out_ch {
                                acc += self.w[woff + co] * gyb[yoff + co];
                            }
                        }
                        gxb[t * self.in_ch + ci] += acc;
                    }
                }
            });

        let k = self.k;
        let s = self.s;
        let out_ch = self.out_ch;
        self.gw
            .par_chunks_mut(k * out_ch)
            .enumerate()
            .for_each(|(ci, gwc)| {
                for b in 0..x.batch {
                    let xb = &x.data[b * in_stride..(b + 1) * in_stride];
                    let gyb = &gy.data[b * out_stride..(b + 1) * out_stride];
                    for t in 0..x.len {
                        let xv = xb[t * x.channels + ci];
                        if xv == 0.0 {
                            continue;
                        }
                        for tau in 0..k {
                            let yoff = (t * s + tau) * out_ch;
                            for co in 0..out_ch {
                                gwc[tau * out_ch + co] += xv * gyb[yoff + co];
                            }
                        }
                    }
                }
            });
        for b in 0..x.batch {
            let gyb = &gy.data[b * out_stride..(b + 1) * out_stride];
            for row in gyb.chunks(self.out_ch) {
                for (gb, &g) in self.gb.iter_mut().zip(row) {
                    *gb += g;
                }
            }
        }
        Ok(gx)
    }

    pub fn zero_grads(&mut self) {
        self.gw.iter_mut().for_each(|g| *g = 0.0);
        self.gb.iter_mut().for_each(|g| *g = 0.0);
    }
}

/// Non-overlapping 1D max pooling. Trailing elements that do not fill a
/// window are dropped. The backward pass routes each window's gradient
/// to the first maximal element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPool1d {
    pub window: usize,
}

impl MaxPool1d {
    pub fn out_len(&self, in_len: usize) -> Result<usize> {
        if self.window == 0 || in_len < self.window {
            return Err(Error::Usage(format!(
                "maxpool window {} invalid for length {in_len}",
                self.window
            )));
        }
        Ok(in_len / self.window)
    }

    /// Returns the pooled tensor and, per output element, the input time
    /// index that won the max.
    pub fn forward(&self, x: &Tensor3) -> Result<(Tensor3, Vec<usize>)> {
        let lo = self.out_len(x.len)?;
        let mut y = Tensor3::zeros(x.batch, lo, x.channels);
        let mut argmax = vec![0usize; x.batch * lo * x.channels];
        for b in 0..x.batch {
            for t in 0..lo {
                for c in 0..x.channels {
                    let mut best_t = t * self.window;
                    let mut best = x.at(b, best_t, c);
                    for dt in 1..self.window {
                        let v = x.at(b, t * self.window + dt, c);
                        if v > best {
                            best = v;
                            best_t = t * self.window + dt;
                        }
                    }
                    *y.at_mut(b, t, c) = best;
                    argmax[y.idx(b, t, c)] = best_t;
                }
            }
        }
        Ok((y, argmax))
    }

    pub fn backward(&self, gy: &Tensor3, argmax: &[usize], in_len: usize) -> Tensor3 {
        let mut gx = Tensor3::zeros(gy.batch, in_len, gy.channels);
        for b in 0..gy.batch {
            for t in 0..gy.len {
                for c in 0..gy.channels {
                    let src = gy.idx(b, t, c);
                    *gx.at_mut(b, argmax[src], c) += gy.data[src];
                }
            }
        }
        gx
    }
}

/// Fully-connected layer, weights indexed [out][in].
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub gw: Vec<f64>,
    pub gb: Vec<f64>,
}

impl Dense {
    pub fn new(in_dim: usize, out_dim: usize, stream: &mut RandomStream) -> Self {
        let scale = (2.0 / in_dim as f64).sqrt();
        let mut w = vec![0.0; out_dim * in_dim];
        for v in &mut w {
            *v = scale * stream.normal();
        }
        Dense {
            in_dim,
            out_dim,
            w,
            b: vec![0.0; out_dim],
            gw: vec![0.0; out_dim * in_dim],
            gb: vec![0.0; out_dim],
        }
    }

    /// Identity-initialized layer (square), used by tests.
    pub fn identity(dim: usize) -> Self {
        let mut w = vec![0.0; dim * dim];
        for i in 0..dim {
            w[i * dim + i] = 1.0;
        }
        Dense {
            in_dim: dim,
            out_dim: dim,
            w,
            b: vec![0.0; dim],
            gw: vec![0.0; dim * dim],
            gb: vec![0.0; dim],
        }
    }

    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols != self.in_dim {
            return Err(Error::Usage(format!(
                "dense expects {} inputs, got {}",
                self.in_dim, x.cols
            )));
        }
        let mut y = Matrix::zeros(x.rows, self.out_dim);
        y.data
            .par_chunks_mut(self.out_dim)
            .enumerate()
            .for_each(|(r, yr)| {
                let xr = x.row(r);
                for (o, out) in yr.iter_mut().enumerate() {
                    let wrow = &self.w[o * self.in_dim..(o + 1) * self.in_dim];
                    let mut acc = self.b[o];
                    for (wv, xv) in wrow.iter().zip(xr) {
                        acc += wv * xv;
                    }
                    *out = acc;
                }
            });
        Ok(y)
    }

    pub fn backward(&mut self, x: &Matrix, gy: &Matrix) -> Result<Matrix> {
        if gy.rows != x.rows || gy.cols != self.out_dim {
            return Err(Error::Usage("dense backward shape mismatch".into()));
        }
        let mut gx = Matrix::zeros(x.rows, self.in_dim);
        gx.data
            .par_chunks_mut(self.in_dim)
            .enumerate()
            .for_each(|(r, gxr)| {
                let gyr = gy.row(r);
                for (o, &g) in gyr.iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    let wrow = &self.w[o * self.in_dim..(o + 1) * self.in_dim];
                    for (gxv, wv) in gxr.iter_mut().zip(wrow) {
                        *gxv += wv * g;
                    }
                }
            });
        let in_dim = self.in_dim;
        self.gw
            .par_chunks_mut(in_dim)
            .zip(self.gb.par_iter_mut())
            .enumerate()
            .for_each(|(o, (gwo, gbo))| {
                for r in 0..x.rows {
                    let g = gy.at(r, o);
                    if g == 0.0 {
                        continue;
                    }
                    *gbo += g;
                    for (gwv, xv) in gwo.iter_mut().zip(x.row(r)) {
                        *gwv += xv * g;
                    }
                }
            });
        Ok(gx)
    }

    pub fn zero_grads(&mut self) {
        self.gw.iter_mut().for_each(|g| *g = 0.0);
        self.gb.iter_mut().for_each(|g| *g = 0.0);
    }
}

pub fn relu_fwd(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

pub fn relu_bwd(x: &[f64], gy: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(gy)
        .map(|(&v, &g)| if v > 0.0 { g } else { 0.0 })
        .collect()
}

pub fn tanh_fwd(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.tanh()).collect()
}

/// `y` is the forward output.
pub fn tanh_bwd(y: &[f64], gy: &[f64]) -> Vec<f64> {
    y.iter().zip(gy).map(|(&v, &g)| (1.0 - v * v) * g).collect()
}

pub fn sigmoid_fwd(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| 1.0 / (1.0 + (-v).exp())).collect()
}

/// `y` is the forward output.
pub fn sigmoid_bwd(y: &[f64], gy: &[f64]) -> Vec<f64> {
    y.iter().zip(gy).map(|(&v, &g)| v * (1.0 - v) * g).collect()
}

/// Inverted dropout: zero each unit with probability `rate`, scale
/// survivors by 1/(1-rate). Inference mode is the identity. Returns the
/// output and the mask (0 or the survivor scale) for the backward pass.
pub fn dropout_fwd(
    x: &[f64],
    rate: f64,
    stream: &mut RandomStream,
    training: bool,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Usage(format!("dropout rate must be in [0,1), got {rate}")));
    }
    if !training || rate == 0.0 {
        return Ok((x.to_vec(), vec![1.0; x.len()]));
    }
    let scale = 1.0 / (1.0 - rate);
    let mask: Vec<f64> = x
        .iter()
        .map(|_| if stream.uniform() < rate { 0.0 } else { scale })
        .collect();
    let y = x.iter().zip(&mask).map(|(&v, &m)| v * m).collect();
    Ok((y, mask))
}

pub fn dropout_bwd(mask: &[f64], gy: &[f64]) -> Vec<f64> {
    mask.iter().zip(gy).map(|(&m, &g)| m * g).collect()
}
