//! Softmax cross-entropy and binary cross-entropy, each returning the
//! mean loss and the gradient with respect to its inputs.

use super::tensor::Matrix;
use crate::error::{Error, Result};

const BCE_EPS: f64 = 1e-7;

/// Softmax (max-subtracted for stability) + cross-entropy over integer
/// labels. Returns (mean loss, gradient wrt logits, probabilities).
pub fn softmax_xent(logits: &Matrix, labels: &[usize]) -> Result<(f64, Matrix, Matrix)> {
    if logits.rows != labels.len() {
        return Err(Error::Usage(format!(
            "{} logit rows vs {} labels",
            logits.rows,
            labels.len()
        )));
    }
    let n = logits.rows;
    let mut probs = Matrix::zeros(n, logits.cols);
    let mut grad = Matrix::zeros(n, logits.cols);
    let mut loss = 0.0;
    for r in 0..n {
        let label = labels[r];
        if label >= logits.cols {
            return Err(Error::Usage(format!(
                "label {label} out of range for {} classes",
                logits.cols
            )));
        }
        let row = logits.row(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for (c, &v) in row.iter().enumerate() {
            let e = (v - max).exp();
            *probs.at_mut(r, c) = e;
            denom += e;
        }
        for c in 0..logits.cols {
            let p = probs.at(r, c) / denom;
            *probs.at_mut(r, c) = p;
            *grad.at_mut(r, c) = (p - if c == label { 1.0 } else { 0.0 }) / n as f64;
        }
        loss -= probs.at(r, label).max(f64::MIN_POSITIVE).ln();
    }
    Ok((loss / n as f64, grad, probs))
}

/// Binary cross-entropy on predictions in (0,1), clamped to
/// [ε, 1-ε] with ε = 1e-7. Returns (mean loss, gradient wrt predictions).
pub fn bce(preds: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
    if preds.len() != targets.len() {
        return Err(Error::Usage(format!(
            "{} predictions vs {} targets",
            preds.len(),
            targets.len()
        )));
    }
    // soft targets allowed (label smoothing)
    if targets.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        return Err(Error::Usage("BCE targets must lie in [0, 1]".into()));
    }
    let n = preds.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(preds.len());
    for (&p, &t) in preds.iter().zip(targets) {
        let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
        loss -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
        grad.push((-t / p + (1.0 - t) / (1.0 - p)) / n);
    }
    Ok((loss / n, grad))
}
