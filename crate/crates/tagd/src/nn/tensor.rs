use crate::error::{Error, Result};

/// (batch, length, channels) tensor, contiguous row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    pub batch: usize,
    pub len: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(batch: usize, len: usize, channels: usize) -> Self {
        Tensor3 {
            batch,
            len,
            channels,
            data: vec![0.0; batch * len * channels],
        }
    }

    pub fn from_vec(batch: usize, len: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != batch * len * channels {
            return Err(Error::Usage(format!(
                "tensor shape ({batch},{len},{channels}) needs {} values, got {}",
                batch * len * channels,
                data.len()
            )));
        }
        Ok(Tensor3 {
            batch,
            len,
            channels,
            data,
        })
    }

    #[inline]
    pub fn idx(&self, b: usize, t: usize, c: usize) -> usize {
        (b * self.len + t) * self.channels + c
    }

    #[inline]
    pub fn at(&self, b: usize, t: usize, c: usize) -> f64 {
        self.data[self.idx(b, t, c)]
    }

    #[inline]
    pub fn at_mut(&mut self, b: usize, t: usize, c: usize) -> &mut f64 {
        let i = self.idx(b, t, c);
        &mut self.data[i]
    }

    /// View of one batch element's (len × channels) block.
    pub fn batch_slice(&self, b: usize) -> &[f64] {
        let stride = self.len * self.channels;
        &self.data[b * stride..(b + 1) * stride]
    }

    /// Flatten to a (batch × len*channels) matrix.
    pub fn flatten(&self) -> Matrix {
        Matrix {
            rows: self.batch,
            cols: self.len * self.channels,
            data: self.data.clone(),
        }
    }
}

/// Dense (rows × cols) matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Usage(format!(
                "matrix shape ({rows},{cols}) needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Reshape back to a (batch, len, channels) tensor.
    pub fn unflatten(&self, len: usize, channels: usize) -> Result<Tensor3> {
        Tensor3::from_vec(self.rows, len, channels, self.data.clone())
    }
}
