//! Multiclass confusion matrix, accuracy, and macro-averaged FAR/FRR.

use crate::error::{Error, Result};

/// n×n count matrix, rows = true class, columns = predicted class.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub n: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n: usize) -> Self {
        ConfusionMatrix {
            n,
            counts: vec![0; n * n],
        }
    }

    pub fn from_counts(n: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != n * n {
            return Err(Error::Usage(format!(
                "expected {} counts for a {n}x{n} matrix, got {}",
                n * n,
                counts.len()
            )));
        }
        Ok(ConfusionMatrix { n, counts })
    }

    pub fn at(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.n + pred]
    }

    pub fn record(&mut self, truth: usize, pred: usize) {
        self.counts[truth * self.n + pred] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, truth: usize) -> u64 {
        (0..self.n).map(|p| self.at(truth, p)).sum()
    }

    pub fn col_sum(&self, pred: usize) -> u64 {
        (0..self.n).map(|t| self.at(t, pred)).sum()
    }
}

pub fn confusion(truths: &[usize], predictions: &[usize], n: usize) -> Result<ConfusionMatrix> {
    if truths.len() != predictions.len() {
        return Err(Error::Usage(format!(
            "{} truths vs {} predictions",
            truths.len(),
            predictions.len()
        )));
    }
    let mut cm = ConfusionMatrix::new(n);
    for (&t, &p) in truths.iter().zip(predictions) {
        if t >= n || p >= n {
            return Err(Error::Data(format!(
                "label out of range: truth {t}, prediction {p}, n {n}"
            )));
        }
        cm.record(t, p);
    }
    Ok(cm)
}

/// Per-class rates: FAR is the class's false-positive rate (others
/// accepted as this user), FRR its false-negative rate (this user
/// rejected).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRates {
    pub class: usize,
    pub far: f64,
    /// None when the class never appears in the truths.
    pub frr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    /// Macro (unweighted) average over classes.
    pub far: f64,
    pub frr: f64,
    pub per_class: Vec<ClassRates>,
    /// Classes excluded from the FRR mean because they have no truths.
    pub skipped_classes: Vec<usize>,
}

/// Accuracy, macro FAR, and macro FRR from a confusion matrix. For class
/// i: FARᵢ = FPᵢ/(FPᵢ+TNᵢ), FRRᵢ = FNᵢ/(FNᵢ+TPᵢ). Classes absent from
/// the truths have undefined FRR and are excluded from the mean.
pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Data("empty confusion matrix".into()));
    }
    let mut per_class = Vec::with_capacity(cm.n);
    let mut skipped = Vec::new();
    let mut far_sum = 0.0;
    let mut frr_sum = 0.0;
    let mut frr_count = 0usize;
    let mut trace = 0u64;
    for i in 0..cm.n {
        let tp = cm.at(i, i);
        trace += tp;
        let fn_ = cm.row_sum(i) - tp;
        let fp = cm.col_sum(i) - tp;
        let tn = total - tp - fn_ - fp;
        let far = if fp + tn > 0 {
            fp as f64 / (fp + tn) as f64
        } else {
            0.0
        };
        far_sum += far;
        let frr = if fn_ + tp > 0 {
            let v = fn_ as f64 / (fn_ + tp) as f64;
            frr_sum += v;
            frr_count += 1;
            Some(v)
        } else {
            skipped.push(i);
            None
        };
        per_class.push(ClassRates { class: i, far, frr });
    }
    if frr_count == 0 {
        return Err(Error::Data("no class has any truth samples".into()));
    }
    Ok(MetricsReport {
        accuracy: trace as f64 / total as f64,
        far: far_sum / cm.n as f64,
        frr: frr_sum / frr_count as f64,
        per_class,
        skipped_classes: skipped,
    })
}

/// Micro-averaged FAR/FRR: pooled counts over all classes.
pub fn micro_rates(cm: &ConfusionMatrix) -> (f64, f64) {
    let total = cm.total();
    let mut fp_sum = 0u64;
    let mut fn_sum = 0u64;
    let mut tn_sum = 0u64;
    let mut tp_sum = 0u64;
    for i in 0..cm.n {
        let tp = cm.at(i, i);
        let fn_ = cm.row_sum(i) - tp;
        let fp = cm.col_sum(i) - tp;
        tp_sum += tp;
        fn_sum += fn_;
        fp_sum += fp;
        tn_sum += total - tp - fn_ - fp;
    }
    let far = if fp_sum + tn_sum > 0 {
        fp_sum as f64 / (fp_sum + tn_sum) as f64
    } else {
        0.0
    };
    let frr = if fn_sum + tp_sum > 0 {
        fn_sum as f64 / (fn_sum + tp_sum) as f64
    } else {
        0.0
    };
    (far, frr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    #[test]
    fn perfect_predictions_are_diagonal() {
        let t = vec![0, 1, 2, 1, 0];
        let cm = confusion(&t, &t, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(cm.at(i, j), 0);
                }
            }
        }
        let m = metrics(&cm).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.far, 0.0);
        assert_eq!(m.frr, 0.0);
    }

    #[test]
    fn all_predicted_class_zero() {
        let cm = confusion(&[0, 1, 2], &[0, 0, 0], 3).unwrap();
        assert_eq!(cm.col_sum(0), 3);
    }

    #[test]
    fn hand_arithmetic_two_class_case() {
        // cm = [[8,2],[1,9]]
        let cm = ConfusionMatrix::from_counts(2, vec![8, 2, 1, 9]).unwrap();
        let m = metrics(&cm).unwrap();
        assert_eq!(m.per_class[0].far, 1.0 / 10.0);
        assert_eq!(m.per_class[0].frr, Some(2.0 / 10.0));
        assert_eq!(m.per_class[1].far, 2.0 / 10.0);
        assert_eq!(m.per_class[1].frr, Some(1.0 / 10.0));
        assert!((m.far - 0.15).abs() < 1e-15);
        assert!((m.frr - 0.15).abs() < 1e-15);
        assert_eq!(m.accuracy, 0.85);
    }

    #[test]
    fn random_case_matches_direct_tally() {
        let mut stream = RandomStream::new(3);
        let n = 5;
        let truths: Vec<usize> = (0..200).map(|_| stream.index(n)).collect();
        let preds: Vec<usize> = (0..200).map(|_| stream.index(n)).collect();
        let cm = confusion(&truths, &preds, n).unwrap();
        // brute-force recount
        for i in 0..n {
            for j in 0..n {
                let count = truths
                    .iter()
                    .zip(&preds)
                    .filter(|&(&t, &p)| t == i && p == j)
                    .count() as u64;
                assert_eq!(cm.at(i, j), count);
            }
        }
        let m = metrics(&cm).unwrap();
        let correct = truths.iter().zip(&preds).filter(|&(&t, &p)| t == p).count();
        assert_eq!(m.accuracy, correct as f64 / 200.0);
    }

    #[test]
    fn accuracy_equals_one_minus_fn_fraction() {
        let mut stream = RandomStream::new(17);
        let truths: Vec<usize> = (0..300).map(|_| stream.index(7)).collect();
        let preds: Vec<usize> = (0..300).map(|_| stream.index(7)).collect();
        let cm = confusion(&truths, &preds, 7).unwrap();
        let m = metrics(&cm).unwrap();
        let fn_total: u64 = (0..7).map(|i| cm.row_sum(i) - cm.at(i, i)).sum();
        assert!((m.accuracy - (1.0 - fn_total as f64 / 300.0)).abs() < 1e-12);
    }

    #[test]
    fn permutation_equivariance() {
        let mut stream = RandomStream::new(9);
        let truths: Vec<usize> = (0..150).map(|_| stream.index(4)).collect();
        let preds: Vec<usize> = (0..150).map(|_| stream.index(4)).collect();
        let perm = [2usize, 0, 3, 1];
        let cm = confusion(&truths, &preds, 4).unwrap();
        let pt: Vec<usize> = truths.iter().map(|&t| perm[t]).collect();
        let pp: Vec<usize> = preds.iter().map(|&p| perm[p]).collect();
        let cm2 = confusion(&pt, &pp, 4).unwrap();
        let m1 = metrics(&cm).unwrap();
        let m2 = metrics(&cm2).unwrap();
        assert!((m1.accuracy - m2.accuracy).abs() < 1e-12);
        assert!((m1.far - m2.far).abs() < 1e-12);
        assert!((m1.frr - m2.frr).abs() < 1e-12);
        for (i, &pi) in perm.iter().enumerate() {
            assert_eq!(m1.per_class[i].frr, m2.per_class[pi].frr);
        }
    }

    #[test]
    fn absent_class_excluded_with_warning() {
        let cm = confusion(&[0, 0, 1], &[0, 1, 1], 3).unwrap();
        let m = metrics(&cm).unwrap();
        assert_eq!(m.skipped_classes, vec![2]);
        assert!(m.per_class[2].frr.is_none());
    }
}
