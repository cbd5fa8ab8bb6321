//! L2-regularized hinge-loss linear SVM trained in the dual by
//! coordinate descent (liblinear-style), a one-vs-rest multiclass
//! wrapper, and SVM-RFE feature ranking.

use std::io::{BufRead, BufReader, Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{confusion, metrics};
use crate::rng::{derive_seed, RandomStream};

pub const MODEL_MAGIC: &str = "SVM v1";

/// Solver knobs shared by the binary and multiclass trainers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        // C=1000 is the operating point used by all experiments.
        SvmParams {
            c: 1000.0,
            tol: 1e-4,
            max_iter: 1000,
        }
    }
}

/// Dual coordinate descent for min_w ½‖w‖² + C Σ max(0, 1 − yᵢ wᵀxᵢ),
/// with the bias folded in as a constant-1 feature. Coordinates are
/// visited in a random order each epoch; stops when the maximal
/// projected-gradient violation drops below tol.
pub fn train_binary(
    x: &[Vec<f64>],
    y: &[f64],
    params: &SvmParams,
    stream: &mut RandomStream,
) -> Result<(Vec<f64>, f64)> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::Usage(format!(
            "{} rows vs {} labels",
            x.len(),
            y.len()
        )));
    }
    if params.c <= 0.0 {
        return Err(Error::Usage(format!("C must be positive, got {}", params.c)));
    }
    let dim = x[0].len();
    if x.iter().any(|r| r.len() != dim) {
        return Err(Error::Usage("ragged feature matrix".into()));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite training input".into()));
    }
    let pos = y.iter().filter(|&&v| v > 0.0).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::Data(
            "binary training needs at least one example of each sign".into(),
        ));
    }

    let n = x.len();
    // Augmented squared norms ‖(xᵢ,1)‖².
    let qii: Vec<f64> = x
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>() + 1.0)
        .collect();

    let mut alpha = vec![0.0f64; n];
    let mut w = vec![0.0f64; dim];
    let mut b = 0.0f64;
    let mut order: Vec<usize> = (0..n).collect();

    for _epoch in 0..params.max_iter {
        stream.shuffle(&mut order);
        let mut max_violation = 0.0f64;
        for &i in &order {
            let margin: f64 = w.iter().zip(&x[i]).map(|(wj, xj)| wj * xj).sum::<f64>() + b;
            let g = y[i] * margin - 1.0;
            // projected gradient on the box [0, C]
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= params.c {
                g.max(0.0)
            } else {
                g
            };
            max_violation = max_violation.max(pg.abs());
            if pg != 0.0 {
                let old = alpha[i];
                let new = (old - g / qii[i]).clamp(0.0, params.c);
                let delta = (new - old) * y[i];
                if delta != 0.0 {
                    alpha[i] = new;
                    for (wj, xj) in w.iter_mut().zip(&x[i]) {
                        *wj += delta * xj;
                    }
                    b += delta;
                }
            }
        }
        if max_violation < params.tol {
            break;
        }
    }
    Ok((w, b))
}

/// Primal objective ½‖w,b‖² + C Σ hinge; used for solver diagnostics and
/// oracle comparisons.
pub fn primal_objective(x: &[Vec<f64>], y: &[f64], w: &[f64], b: f64, c: f64) -> f64 {
    let reg = 0.5 * (w.iter().map(|v| v * v).sum::<f64>() + b * b);
    let hinge: f64 = x
        .iter()
        .zip(y)
        .map(|(r, &yi)| {
            let f = r.iter().zip(w).map(|(xj, wj)| xj * wj).sum::<f64>() + b;
            (1.0 - yi * f).max(0.0)
        })
        .sum();
    reg + c * hinge
}

/// One-vs-rest multiclass linear SVM over a subset of the feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvmModel {
    /// One weight vector per class, dimension = |active_features|.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub c: f64,
    /// Ordered indices into the full feature space.
    pub active_features: Vec<usize>,
}

impl LinearSvmModel {
    pub fn num_classes(&self) -> usize {
        self.weights.len()
    }

    fn project(&self, row: &[f64]) -> Vec<f64> {
        self.active_features.iter().map(|&j| row[j]).collect()
    }

    /// Per-class decision scores w_c·x + b_c.
    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        let x = self.project(row);
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, &b)| w.iter().zip(&x).map(|(wj, xj)| wj * xj).sum::<f64>() + b)
            .collect()
    }

    /// Argmax class; ties go to the lowest class index.
    pub fn predict(&self, row: &[f64]) -> usize {
        let scores = self.scores(row);
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        best
    }

    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{MODEL_MAGIC}")?;
        writeln!(w, "classes {}", self.num_classes())?;
        writeln!(w, "c {}", self.c)?;
        writeln!(
            w,
            "features {}",
            self.active_features
                .iter()
                .map(|j| j.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        )?;
        for (wc, &bc) in self.weights.iter().zip(&self.biases) {
            let row: Vec<String> = std::iter::once(bc)
                .chain(wc.iter().copied())
                .map(|v| v.to_string())
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }

    pub fn load<R: Read>(r: R) -> Result<LinearSvmModel> {
        let mut lines = BufReader::new(r).lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Data(format!("truncated SVM model: expected {what}")))?
                .map_err(Error::Io)
        };
        let magic = next("magic")?;
        if magic.trim() != MODEL_MAGIC {
            return Err(Error::Data(format!("bad SVM model magic `{magic}`")));
        }
        let classes: usize = next("classes")?
            .strip_prefix("classes")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Data("bad classes line".into()))?;
        let c: f64 = next("c")?
            .strip_prefix("c")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Data("bad c line".into()))?;
        let feat_line = next("features")?;
        let active_features: Vec<usize> = feat_line
            .strip_prefix("features")
            .ok_or_else(|| Error::Data("bad features line".into()))?
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Data("bad feature index".into()))?;
        let mut weights = Vec::with_capacity(classes);
        let mut biases = Vec::with_capacity(classes);
        for _ in 0..classes {
            let row = next("weight row")?;
            let vals: Vec<f64> = row
                .split_whitespace()
                .map(|t| t.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Data("bad weight value".into()))?;
            if vals.len() != active_features.len() + 1 {
                return Err(Error::Data(format!(
                    "weight row has {} values, expected {}",
                    vals.len(),
                    active_features.len() + 1
                )));
            }
            biases.push(vals[0]);
            weights.push(vals[1..].to_vec());
        }
        Ok(LinearSvmModel {
            weights,
            biases,
            c,
            active_features,
        })
    }
}

/// Train one-vs-rest binary models over the given active feature subset.
/// The per-class problems are independent and run in parallel, each with
/// a seed derived from (seed, class).
pub fn train_multiclass(
    x: &[Vec<f64>],
    labels: &[usize],
    active_features: &[usize],
    params: &SvmParams,
    seed: u64,
) -> Result<LinearSvmModel> {
    if x.len() != labels.len() {
        return Err(Error::Usage("rows/labels length mismatch".into()));
    }
    let num_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    if num_classes < 2 {
        return Err(Error::Data("multiclass training needs >= 2 classes".into()));
    }
    let projected: Vec<Vec<f64>> = x
        .iter()
        .map(|r| active_features.iter().map(|&j| r[j]).collect())
        .collect();

    let results: Vec<Result<(Vec<f64>, f64)>> = (0..num_classes)
        .into_par_iter()
        .map(|class| {
            let y: Vec<f64> = labels
                .iter()
                .map(|&l| if l == class { 1.0 } else { -1.0 })
                .collect();
            let mut stream = RandomStream::new(derive_seed(seed, class as u64));
            train_binary(&projected, &y, params, &mut stream)
        })
        .collect();

    let mut weights = Vec::with_capacity(num_classes);
    let mut biases = Vec::with_capacity(num_classes);
    for r in results {
        let (w, b) = r?;
        weights.push(w);
        biases.push(b);
    }
    Ok(LinearSvmModel {
        weights,
        biases,
        c: params.c,
        active_features: active_features.to_vec(),
    })
}

/// Classify a batch of rows.
pub fn predict_all(model: &LinearSvmModel, x: &[Vec<f64>]) -> Vec<usize> {
    x.iter().map(|r| model.predict(r)).collect()
}

/// One RFE step's held-out evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RfeStep {
    /// Active features before the elimination at this step.
    pub active: Vec<usize>,
    /// Feature eliminated at the end of this step.
    pub eliminated: usize,
    pub accuracy: f64,
    pub far: f64,
    pub frr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfeRanking {
    /// First eliminated → last survivor (the survivor itself is the
    /// final entry).
    pub elimination_order: Vec<usize>,
    pub steps: Vec<RfeStep>,
}

/// SVM-RFE: repeatedly train a multiclass model, score each active
/// feature j by Σ_c w_c[j]², drop the minimum-score feature (ties to the
/// lowest index), and retrain, until one feature remains. Each step is
/// evaluated on the held-out split.
pub fn rfe(
    train_x: &[Vec<f64>],
    train_labels: &[usize],
    eval_x: &[Vec<f64>],
    eval_labels: &[usize],
    num_features: usize,
    params: &SvmParams,
    seed: u64,
) -> Result<RfeRanking> {
    if num_features < 2 {
        return Err(Error::Usage("RFE needs at least 2 features".into()));
    }
    let num_classes = train_labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut active: Vec<usize> = (0..num_features).collect();
    let mut elimination_order = Vec::with_capacity(num_features);
    let mut steps = Vec::with_capacity(num_features - 1);

    while active.len() > 1 {
        let model = train_multiclass(train_x, train_labels, &active, params, seed)?;
        let preds = predict_all(&model, eval_x);
        let cm = confusion(eval_labels, &preds, num_classes)?;
        let m = metrics(&cm)?;

        // score per active feature: sum of squared weights over classes
        let mut victim_pos = 0;
        let mut victim_score = f64::INFINITY;
        for (pos, _) in active.iter().enumerate() {
            let score: f64 = model.weights.iter().map(|w| w[pos] * w[pos]).sum();
            if score < victim_score {
                victim_score = score;
                victim_pos = pos;
            }
        }
        let eliminated = active.remove(victim_pos);
        elimination_order.push(eliminated);
        steps.push(RfeStep {
            active: {
                let mut a = active.clone();
                a.insert(victim_pos, eliminated);
                a
            },
            eliminated,
            accuracy: m.accuracy,
            far: m.far,
            frr: m.frr,
        });
    }
    elimination_order.push(active[0]);
    Ok(RfeRanking {
        elimination_order,
        steps,
    })
}
