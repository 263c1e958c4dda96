//! Classification metrics: confusion matrix, per-class F1, macro F1 and
//! error rate. F1 uses the harmonic mean of precision and recall with
//! 0/0 defined as 0; error rate and F1 are reported in percent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{forward, ClassifierParams, DropoutConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// 100 * (1 - trace / total).
    pub error_rate: f64,
    /// Unweighted mean of the per-class F1 scores, in percent.
    pub macro_f1: f64,
    /// Per-class F1 in percent, indexed by class.
    pub per_class_f1: Vec<f64>,
    /// Rows = true class, columns = predicted class.
    pub confusion: Vec<Vec<usize>>,
}

/// Derive all metrics from a confusion matrix.
pub fn metrics_from_confusion(confusion: Vec<Vec<usize>>) -> Result<Metrics> {
    let t = confusion.len();
    if t == 0 || confusion.iter().any(|row| row.len() != t) {
        return Err(Error::dimension("confusion matrix must be square"));
    }
    let total: usize = confusion.iter().flatten().sum();
    if total == 0 {
        return Err(Error::data("confusion matrix has no observations"));
    }
    let trace: usize = (0..t).map(|i| confusion[i][i]).sum();
    let error_rate = 100.0 * (1.0 - trace as f64 / total as f64);

    let mut per_class_f1 = Vec::with_capacity(t);
    for c in 0..t {
        let tp = confusion[c][c];
        let fn_: usize = (0..t).filter(|&j| j != c).map(|j| confusion[c][j]).sum();
        let fp: usize = (0..t).filter(|&i| i != c).map(|i| confusion[i][c]).sum();
        let denom = 2 * tp + fp + fn_;
        let f1 = if denom == 0 {
            0.0
        } else {
            100.0 * (2 * tp) as f64 / denom as f64
        };
        per_class_f1.push(f1);
    }
    let macro_f1 = per_class_f1.iter().sum::<f64>() / t as f64;

    Ok(Metrics {
        error_rate,
        macro_f1,
        per_class_f1,
        confusion,
    })
}

/// Evaluate `params` on `dataset` with a deterministic forward pass.
/// Predictions are the argmax of the class probabilities (ties resolved
/// toward the lower class index).
pub fn evaluate(params: &ClassifierParams, dataset: &Dataset) -> Result<Metrics> {
    if dataset.is_empty() {
        return Err(Error::data("cannot evaluate on an empty dataset"));
    }
    let classes = params.class_count();
    if dataset.class_count() > classes {
        return Err(Error::dimension(format!(
            "dataset has {} classes but the classifier outputs {classes}",
            dataset.class_count()
        )));
    }

    let mut confusion = vec![vec![0usize; classes]; classes];
    let dropout = DropoutConfig::deterministic();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let indices: Vec<usize> = (0..dataset.len()).collect();
    for chunk in indices.chunks(512) {
        let batch = dataset.feature_matrix(chunk)?;
        let probs = forward(params, &batch, &dropout, &mut rng)?;
        for (r, &i) in chunk.iter().enumerate() {
            let row = probs.row(r);
            let mut best = 0usize;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            confusion[dataset.label(i)][best] += 1;
        }
    }
    metrics_from_confusion(confusion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_blobs;
    use crate::nn::init_params;

    #[test]
    fn hand_worked_confusion() {
        let m = metrics_from_confusion(vec![vec![2, 1], vec![0, 3]]).unwrap();
        assert!((m.per_class_f1[0] - 80.0).abs() < 1e-9);
        assert!((m.per_class_f1[1] - 85.714).abs() < 1e-3);
        assert!((m.macro_f1 - 82.857).abs() < 1e-3);
        assert!((m.error_rate - 16.667).abs() < 1e-3);
    }

    #[test]
    fn perfect_predictions() {
        let m = metrics_from_confusion(vec![vec![5, 0], vec![0, 5]]).unwrap();
        assert_eq!(m.error_rate, 0.0);
        assert!((m.macro_f1 - 100.0).abs() < 1e-12);
        assert!(m.per_class_f1.iter().all(|&f| (f - 100.0).abs() < 1e-12));
    }

    #[test]
    fn constant_predictor_on_balanced_ten_classes() {
        // everything predicted as class 0
        let mut confusion = vec![vec![0usize; 10]; 10];
        for (true_class, row) in confusion.iter_mut().enumerate() {
            row[0] = 10;
            let _ = true_class;
        }
        let m = metrics_from_confusion(confusion).unwrap();
        assert!((m.error_rate - 90.0).abs() < 1e-9);
        // absent predictions give 0/0 := 0 per-class F1
        for f in &m.per_class_f1[1..] {
            assert_eq!(*f, 0.0);
        }
    }

    #[test]
    fn evaluate_rejects_empty_and_checks_classes() {
        let params = init_params(&[4, 8, 2], 0).unwrap();
        let ds = synth_blobs(3, 2, 4, 5.0, 0).unwrap();
        assert!(matches!(
            evaluate(&params, &ds),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn evaluate_runs_on_separable_blobs() {
        let params = init_params(&[4, 8, 3], 0).unwrap();
        let ds = synth_blobs(3, 5, 4, 5.0, 0).unwrap();
        let m = evaluate(&params, &ds).unwrap();
        let total: usize = m.confusion.iter().flatten().sum();
        assert_eq!(total, ds.len());
        assert!(m.error_rate >= 0.0 && m.error_rate <= 100.0);
    }
}
