//! Expected calibration error and its per-bin breakdown.
//!
//! A model is calibrated when, among samples predicted with confidence
//! around `c`, a fraction of about `c` is actually right. ECE quantifies the
//! deviation: partition the confidence range into `K` equal bins, and sum
//! `|accuracy - mean confidence|` over the bins weighted by bin occupancy.

use serde::{Deserialize, Serialize};

/// One evaluated sample: the probability vector, the true label, and the
/// argmax prediction with its confidence.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub probs: Vec<f64>,
    pub true_label: usize,
    pub predicted_label: usize,
    pub confidence: f64,
}

/// Builds a [`Prediction`] from a probability vector.
///
/// Ties in the argmax go to the lowest index. The vector must be a valid
/// distribution: entries in `[0, 1]`, sum within 1e-9 of 1. Violations
/// panic, since probabilities here only ever come from [`softmax`].
pub fn predict(probs: Vec<f64>, true_label: usize) -> Prediction {
    assert!(!probs.is_empty(), "prediction from an empty probability vector");
    assert!(
        true_label < probs.len(),
        "label {true_label} out of range for {} classes",
        probs.len()
    );
    let mut sum = 0.0;
    for (j, p) in probs.iter().enumerate() {
        assert!(
            p.is_finite() && (0.0..=1.0).contains(p),
            "probability {j} out of range: {p}"
        );
        sum += p;
    }
    assert!((sum - 1.0).abs() <= 1e-9, "probabilities sum to {sum}, not 1");
    let mut predicted_label = 0;
    for (j, p) in probs.iter().enumerate() {
        if *p > probs[predicted_label] {
            predicted_label = j;
        }
    }
    let confidence = probs[predicted_label];
    Prediction {
        probs,
        true_label,
        predicted_label,
        confidence,
    }
}

/// Maps a confidence to its 1-based bin among `K` equal-width bins.
///
/// Bin `k` covers `((k-1)/K, k/K]`; a confidence of exactly 0 goes to
/// bin 1 so every value in `[0, 1]` has a home. Panics when `confidence`
/// is outside `[0, 1]` or `bins` is zero.
pub fn bin_of(confidence: f64, bins: usize) -> usize {
    assert!(bins > 0, "need at least one bin");
    assert!(
        (0.0..=1.0).contains(&confidence),
        "confidence {confidence} outside [0, 1]"
    );
    for k in 1..=bins {
        if confidence <= k as f64 / bins as f64 {
            return k;
        }
    }
    // Unreachable for confidence <= 1 because the last boundary is exactly
    // 1.0, but rounding paranoia costs one line.
    bins
}

/// Occupancy and calibration statistics for one confidence bin.
///
/// `gap` is signed: confidence minus accuracy, positive when the model is
/// overconfident in this bin. Empty bins keep all statistics at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinStats {
    pub index: usize,
    pub count: usize,
    pub accuracy: f64,
    pub confidence: f64,
    pub gap: f64,
}

/// Full calibration summary over a prediction set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    /// Number of bins.
    pub k: usize,
    /// One entry per bin, index 1 through `k`, empty bins included.
    pub bins: Vec<BinStats>,
    pub ece: f64,
    /// Number of predictions.
    pub n: usize,
    pub overall_accuracy: f64,
}

/// Computes ECE over `predictions` with `bins` equal-width bins.
///
/// `ece = sum_k (count_k / n) * |accuracy_k - confidence_k|`, bins in index
/// order. Within a bin, confidences are summed in ascending numeric order,
/// which makes the result independent of how the predictions were ordered.
/// Panics on an empty prediction set.
pub fn compute_ece(predictions: &[Prediction], bins: usize) -> CalibrationReport {
    assert!(!predictions.is_empty(), "ECE of an empty prediction set");
    assert!(bins > 0, "need at least one bin");
    let n = predictions.len();

    let mut bin_confs: Vec<Vec<f64>> = vec![Vec::new(); bins];
    let mut bin_correct = vec![0usize; bins];
    let mut total_correct = 0usize;
    for p in predictions {
        let k = bin_of(p.confidence, bins) - 1;
        bin_confs[k].push(p.confidence);
        if p.predicted_label == p.true_label {
            bin_correct[k] += 1;
            total_correct += 1;
        }
    }

    let mut stats = Vec::with_capacity(bins);
    let mut ece = 0.0;
    for k in 0..bins {
        let count = bin_confs[k].len();
        if count == 0 {
            stats.push(BinStats {
                index: k + 1,
                count: 0,
                accuracy: 0.0,
                confidence: 0.0,
                gap: 0.0,
            });
            continue;
        }
        bin_confs[k].sort_by(|a, b| a.partial_cmp(b).expect("confidences are finite"));
        let conf_sum: f64 = bin_confs[k].iter().sum();
        let accuracy = bin_correct[k] as f64 / count as f64;
        let confidence = conf_sum / count as f64;
        ece += count as f64 / n as f64 * (accuracy - confidence).abs();
        stats.push(BinStats {
            index: k + 1,
            count,
            accuracy,
            confidence,
            gap: confidence - accuracy,
        });
    }

    CalibrationReport {
        k: bins,
        bins: stats,
        ece,
        n,
        overall_accuracy: total_correct as f64 / n as f64,
    }
}

/// Fraction of predictions per bin, in bin order. Sums to 1 because the
/// bins partition the sample.
pub fn histogram_data(report: &CalibrationReport) -> Vec<f64> {
    report
        .bins
        .iter()
        .map(|b| b.count as f64 / report.n as f64)
        .collect()
}
