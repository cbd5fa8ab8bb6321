//! Resampling to fixed length, the 16 statistical features, and
//! train-split standardization for feature vectors and sequences.

use crate::data::{
    Dataset, FeatureVector, FixedSequence, GestureSample, AXES, FIXED_LEN, NUM_FEATURES,
};
use crate::error::{Error, Result};

/// Piecewise-linear resample of one axis to `target` points. Sample i of
/// the output sits at source position i*(L-1)/(T-1); endpoints are exact.
pub fn interp_resample(axis: &[f64], target: usize) -> Result<Vec<f64>> {
    if axis.len() < 2 {
        return Err(Error::Data(format!(
            "cannot resample a sequence of length {}",
            axis.len()
        )));
    }
    if target < 2 {
        return Err(Error::Usage(format!(
            "resample target must be >= 2, got {target}"
        )));
    }
    let l = axis.len();
    let mut out = Vec::with_capacity(target);
    for i in 0..target {
        let pos = i as f64 * (l - 1) as f64 / (target - 1) as f64;
        let lo = pos.floor() as usize;
        if lo + 1 >= l {
            out.push(axis[l - 1]);
        } else {
            let frac = pos - lo as f64;
            out.push(axis[lo] * (1.0 - frac) + axis[lo + 1] * frac);
        }
    }
    Ok(out)
}

/// Resample a gesture to the standard 400×3 shape, each axis independently.
pub fn resample(s: &GestureSample) -> Result<FixedSequence> {
    let axes: Vec<Vec<f64>> = (0..AXES)
        .map(|a| interp_resample(&s.axis(a), FIXED_LEN))
        .collect::<Result<_>>()?;
    let data = (0..FIXED_LEN)
        .map(|i| [axes[0][i], axes[1][i], axes[2][i]])
        .collect();
    FixedSequence::new(data, s.user_id)
}

/// Resample every sample of a dataset.
pub fn resample_all(ds: &Dataset) -> Result<Vec<FixedSequence>> {
    ds.samples.iter().map(resample).collect()
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

struct AxisStats {
    mean: f64,
    median: f64,
    std: f64,
    kurtosis: f64,
    skewness: f64,
}

/// Per-axis statistics: sample standard deviation with the n-1
/// denominator; kurtosis Σ(x-μ)⁴/(nσ⁴) and skewness Σ(x-μ)³/(nσ³) use
/// the n denominator with that σ.
fn axis_stats(axis: &[f64]) -> Result<AxisStats> {
    let n = axis.len() as f64;
    let mean = axis.iter().sum::<f64>() / n;
    let ss: f64 = axis.iter().map(|x| (x - mean).powi(2)).sum();
    let var = ss / (n - 1.0);
    if var <= 0.0 {
        return Err(Error::Numeric(
            "degenerate signal: zero variance axis, kurtosis/skewness undefined".into(),
        ));
    }
    let std = var.sqrt();
    let m3: f64 = axis.iter().map(|x| (x - mean).powi(3)).sum();
    let m4: f64 = axis.iter().map(|x| (x - mean).powi(4)).sum();
    Ok(AxisStats {
        mean,
        median: median(axis),
        std,
        kurtosis: m4 / (n * std.powi(4)),
        skewness: m3 / (n * std.powi(3)),
    })
}

/// The 16-element feature vector of one signature, computed on the raw
/// (pre-resampling) sequence. L is the raw length.
pub fn features(s: &GestureSample) -> Result<FeatureVector> {
    let stats: Vec<AxisStats> = (0..AXES)
        .map(|a| axis_stats(&s.axis(a)))
        .collect::<Result<_>>()?;
    let mut v = [0.0; NUM_FEATURES];
    v[0] = s.len() as f64;
    for a in 0..AXES {
        v[1 + a] = stats[a].mean;
        v[4 + a] = stats[a].median;
        v[7 + a] = stats[a].std;
        v[10 + a] = stats[a].kurtosis;
        v[13 + a] = stats[a].skewness;
    }
    FeatureVector::new(v, s.user_id)
}

pub fn features_all(ds: &Dataset) -> Result<Vec<FeatureVector>> {
    ds.samples.iter().map(features).collect()
}

/// Column-wise standardizer fit on training data only. Zero-variance
/// columns pass through unchanged and are flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub zero_variance: Vec<bool>,
}

impl Standardizer {
    pub fn fit_columns(rows: &[Vec<f64>]) -> Result<Standardizer> {
        if rows.is_empty() {
            return Err(Error::Data("cannot fit standardizer on empty data".into()));
        }
        let dim = rows[0].len();
        let n = rows.len() as f64;
        let mut means = vec![0.0; dim];
        for r in rows {
            for (m, &x) in means.iter_mut().zip(r) {
                *m += x;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut stds = vec![0.0; dim];
        for r in rows {
            for ((s, &m), &x) in stds.iter_mut().zip(&means).zip(r) {
                *s += (x - m) * (x - m);
            }
        }
        let mut zero_variance = vec![false; dim];
        for (s, z) in stds.iter_mut().zip(&mut zero_variance) {
            *s = (*s / n).sqrt();
            if *s == 0.0 {
                *s = 1.0;
                *z = true;
            }
        }
        Ok(Standardizer {
            means,
            stds,
            zero_variance,
        })
    }

    /// Fit per-feature statistics over training feature vectors.
    pub fn fit_features(rows: &[FeatureVector]) -> Result<Standardizer> {
        Self::fit_columns(&rows.iter().map(|f| f.values.to_vec()).collect::<Vec<_>>())
    }

    /// Fit per-axis statistics over every time step of the training
    /// sequences (channel-wise).
    pub fn fit_sequences(seqs: &[FixedSequence]) -> Result<Standardizer> {
        let rows: Vec<Vec<f64>> = seqs
            .iter()
            .flat_map(|s| s.data.iter().map(|row| row.to_vec()))
            .collect();
        Self::fit_columns(&rows)
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.dim() {
            return Err(Error::Usage(format!(
                "standardizer dimension mismatch: fit on {}, got {}",
                self.dim(),
                row.len()
            )));
        }
        Ok(row
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&x, (&m, &s))| (x - m) / s)
            .collect())
    }

    pub fn inverse(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.dim() {
            return Err(Error::Usage("standardizer dimension mismatch".into()));
        }
        Ok(row
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&x, (&m, &s))| x * s + m)
            .collect())
    }

    pub fn apply_features(&self, f: &FeatureVector) -> Result<FeatureVector> {
        let v = self.apply(&f.values)?;
        let mut values = [0.0; NUM_FEATURES];
        values.copy_from_slice(&v);
        Ok(FeatureVector {
            values,
            user_id: f.user_id,
        })
    }

    pub fn apply_sequence(&self, s: &FixedSequence) -> Result<FixedSequence> {
        if self.dim() != AXES {
            return Err(Error::Usage(
                "sequence standardizer must have 3 columns".into(),
            ));
        }
        let data = s
            .data
            .iter()
            .map(|row| {
                let mut out = [0.0; AXES];
                for a in 0..AXES {
                    out[a] = (row[a] - self.means[a]) / self.stds[a];
                }
                out
            })
            .collect();
        Ok(FixedSequence {
            data,
            user_id: s.user_id,
        })
    }

    pub fn inverse_sequence(&self, s: &FixedSequence) -> Result<FixedSequence> {
        if self.dim() != AXES {
            return Err(Error::Usage(
                "sequence standardizer must have 3 columns".into(),
            ));
        }
        let data = s
            .data
            .iter()
            .map(|row| {
                let mut out = [0.0; AXES];
                for a in 0..AXES {
                    out[a] = row[a] * self.stds[a] + self.means[a];
                }
                out
            })
            .collect();
        Ok(FixedSequence {
            data,
            user_id: s.user_id,
        })
    }
}
