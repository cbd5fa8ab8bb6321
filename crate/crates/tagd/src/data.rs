//! Domain types shared by the whole pipeline: raw gesture samples,
//! fixed-length resampled sequences, statistical feature vectors, the
//! dataset container, and the stratified train/test split.

use crate::error::{Error, Result};
use crate::rng::{derive_seed, RandomStream};

/// Number of time steps every sequence is resampled to before it is fed
/// to the CNN or GAN.
pub const FIXED_LEN: usize = 400;

/// Number of acceleration axes.
pub const AXES: usize = 3;

/// Number of statistical features per signature.
pub const NUM_FEATURES: usize = 16;

/// One recorded gesture: a variable-length tri-axial acceleration
/// sequence in g-units plus the owning user's label.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureSample {
    pub user_id: usize,
    pub seq: Vec<[f64; AXES]>,
    pub sample_rate_hz: f64,
}

impl GestureSample {
    pub fn new(user_id: usize, seq: Vec<[f64; AXES]>, sample_rate_hz: f64) -> Result<Self> {
        if seq.len() < 2 {
            return Err(Error::Data(format!(
                "gesture sample needs at least 2 points, got {}",
                seq.len()
            )));
        }
        if !(sample_rate_hz > 0.0) {
            return Err(Error::Data(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if seq.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite acceleration value".into()));
        }
        Ok(GestureSample {
            user_id,
            seq,
            sample_rate_hz,
        })
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// One axis of the sequence as a contiguous vector.
    pub fn axis(&self, a: usize) -> Vec<f64> {
        self.seq.iter().map(|row| row[a]).collect()
    }
}

/// A sequence resampled to exactly [`FIXED_LEN`]×3.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedSequence {
    pub data: Vec<[f64; AXES]>,
    pub user_id: usize,
}

impl FixedSequence {
    pub fn new(data: Vec<[f64; AXES]>, user_id: usize) -> Result<Self> {
        if data.len() != FIXED_LEN {
            return Err(Error::Data(format!(
                "fixed sequence must have {FIXED_LEN} rows, got {}",
                data.len()
            )));
        }
        if data.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite value in fixed sequence".into()));
        }
        Ok(FixedSequence { data, user_id })
    }
}

/// The 16 statistical features of one signature, ordered
/// (L, μx, μy, μz, mx, my, mz, σx, σy, σz, kx, ky, kz, sx, sy, sz).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: [f64; NUM_FEATURES],
    pub user_id: usize,
}

pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "L", "mean_x", "mean_y", "mean_z", "median_x", "median_y", "median_z", "std_x", "std_y",
    "std_z", "kurt_x", "kurt_y", "kurt_z", "skew_x", "skew_y", "skew_z",
];

impl FeatureVector {
    pub fn new(values: [f64; NUM_FEATURES], user_id: usize) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite feature value".into()));
        }
        if values[0] < 2.0 {
            return Err(Error::Data(format!(
                "length feature must be >= 2, got {}",
                values[0]
            )));
        }
        Ok(FeatureVector { values, user_id })
    }
}

/// In-memory corpus: every sample's label lies in [0, num_users).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<GestureSample>,
    pub num_users: usize,
}

impl Dataset {
    pub fn new(samples: Vec<GestureSample>, num_users: usize) -> Result<Self> {
        if num_users == 0 {
            return Err(Error::Data("dataset must have at least one user".into()));
        }
        for s in &samples {
            if s.user_id >= num_users {
                return Err(Error::Data(format!(
                    "sample label {} out of range for {} users",
                    s.user_id, num_users
                )));
            }
        }
        Ok(Dataset { samples, num_users })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Per-user sample counts, indexed by label.
    pub fn per_user_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_users];
        for s in &self.samples {
            counts[s.user_id] += 1;
        }
        counts
    }
}

/// Stratified train/test split parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

/// Per-user stratified split: each user contributes
/// round(train_fraction * n_u) samples to the train partition, chosen by
/// a shuffle derived from (spec.seed, user_id). Deterministic given the
/// spec; train and test together cover the dataset exactly once.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Usage(format!(
            "train fraction must be in (0,1), got {}",
            spec.train_fraction
        )));
    }
    let counts = ds.per_user_counts();
    for (u, &c) in counts.iter().enumerate() {
        if c < 2 {
            return Err(Error::Data(format!(
                "user {u} has {c} samples; the split requires at least 2 per user"
            )));
        }
    }

    // Indices of each user's samples, in dataset order.
    let mut by_user: Vec<Vec<usize>> = vec![Vec::new(); ds.num_users];
    for (i, s) in ds.samples.iter().enumerate() {
        by_user[s.user_id].push(i);
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (u, idxs) in by_user.iter_mut().enumerate() {
        let mut stream = RandomStream::new(derive_seed(spec.seed, u as u64));
        stream.shuffle(idxs);
        let n_train = ((idxs.len() as f64) * spec.train_fraction).round() as usize;
        let n_train = n_train.clamp(1, idxs.len() - 1);
        for (pos, &i) in idxs.iter().enumerate() {
            if pos < n_train {
                train.push(i);
            } else {
                test.push(i);
            }
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    let pick = |idxs: &[usize]| -> Result<Dataset> {
        Dataset::new(
            idxs.iter().map(|&i| ds.samples[i].clone()).collect(),
            ds.num_users,
        )
    };
    Ok((pick(&train)?, pick(&test)?))
}
