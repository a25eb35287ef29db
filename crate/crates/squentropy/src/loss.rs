//! Classification losses on raw logits.
//!
//! All three losses take the network's logit vector and the true label and
//! return the scalar loss together with its gradient in the logits. None of
//! them apply softmax inside the network; probabilities only appear where a
//! loss definition needs them, and at evaluation time for calibration.
//!
//! Conventions shared by every loss here: labels index logits, so
//! `label < logits.len()` or the call panics; logits must be finite; at
//! least two classes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Loss value and its gradient with respect to the logits.
#[derive(Debug, Clone)]
pub struct LossOutput {
    pub value: f64,
    pub grad: Vec<f64>,
}

fn check_inputs(logits: &[f64], label: usize) {
    assert!(
        logits.len() >= 2,
        "need at least two classes, got {} logit(s)",
        logits.len()
    );
    assert!(
        label < logits.len(),
        "label {label} out of range for {} classes",
        logits.len()
    );
    for (j, f) in logits.iter().enumerate() {
        assert!(f.is_finite(), "logit {j} is not finite: {f}");
    }
}

/// Numerically stable softmax.
///
/// Subtracts the maximum logit before exponentiating, so any finite logits
/// well inside the `f64` range (|f| up to several hundred) produce finite
/// probabilities that sum to 1 up to rounding.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    assert!(!logits.is_empty(), "softmax of an empty vector");
    for (j, f) in logits.iter().enumerate() {
        assert!(f.is_finite(), "logit {j} is not finite: {f}");
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|f| (f - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for p in &mut out {
        *p /= sum;
    }
    out
}

/// `log(sum_j exp(f_j))` with the same max-subtraction trick.
fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|f| (f - max).exp()).sum();
    max + sum.ln()
}

/// Cross-entropy `-log p_y` with `p = softmax(f)`.
///
/// Computed as `log_sum_exp(f) - f_y`, which is exact in the saturated
/// regime where `p_y` rounds to 1. Gradient: `p_j - [j == y]`.
pub fn cross_entropy(logits: &[f64], label: usize) -> LossOutput {
    check_inputs(logits, label);
    let value = log_sum_exp(logits) - logits[label];
    let mut grad = softmax(logits);
    grad[label] -= 1.0;
    LossOutput { value, grad }
}

/// Squentropy: cross-entropy plus the mean square of the non-true logits.
///
/// For `C` classes,
/// `l(f, y) = -log p_y + (1/(C-1)) * sum_{j != y} f_j^2`.
/// The extra term pushes every wrong logit toward zero while the
/// cross-entropy part keeps the true logit on top. Gradient:
/// `p_j - [j == y]` plus `2/(C-1) * f_j` on the non-true coordinates.
///
/// Unlike cross-entropy, the value is not invariant under adding a constant
/// to all logits; the square term anchors the logit scale.
pub fn squentropy(logits: &[f64], label: usize) -> LossOutput {
    check_inputs(logits, label);
    let c = logits.len();
    let scale = 1.0 / (c as f64 - 1.0);
    let mut square_term = 0.0;
    for (j, f) in logits.iter().enumerate() {
        if j != label {
            square_term += f * f;
        }
    }
    let value = log_sum_exp(logits) - logits[label] + scale * square_term;
    let mut grad = softmax(logits);
    grad[label] -= 1.0;
    for (j, g) in grad.iter_mut().enumerate() {
        if j != label {
            *g += 2.0 * scale * logits[j];
        }
    }
    LossOutput { value, grad }
}

/// Scaling knobs for [`rescaled_square`]. `t` weights the true-class term
/// and `M` is the target value for the true logit. Both must be positive
/// and finite. `t = 1, M = 1` is the plain square loss against a one-hot
/// target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleParams {
    pub t: f64,
    pub m: f64,
}

impl RescaleParams {
    pub fn new(t: f64, m: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "square loss parameter t must be positive and finite, got {t}"
            )));
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "square loss parameter M must be positive and finite, got {m}"
            )));
        }
        Ok(RescaleParams { t, m })
    }
}

impl Default for RescaleParams {
    fn default() -> Self {
        RescaleParams { t: 1.0, m: 1.0 }
    }
}

/// Rescaled square loss applied directly to the logits, no softmax anywhere:
/// `l(f, y) = (1/C) * (t * (f_y - M)^2 + sum_{j != y} f_j^2)`.
///
/// The accumulation runs over `j` in index order with the true-class branch
/// inline, so with `t = M = 1` the value is bit-identical to
/// `(1/C) * ||f - onehot(y)||^2` evaluated the same way.
/// Gradient: `2t/C * (f_y - M)` on the true coordinate, `2/C * f_j` elsewhere.
pub fn rescaled_square(logits: &[f64], label: usize, params: RescaleParams) -> LossOutput {
    check_inputs(logits, label);
    debug_assert!(params.t > 0.0 && params.m > 0.0, "unvalidated RescaleParams");
    let c = logits.len() as f64;
    let mut acc = 0.0;
    for (j, f) in logits.iter().enumerate() {
        if j == label {
            acc += params.t * (f - params.m) * (f - params.m);
        } else {
            acc += f * f;
        }
    }
    let mut grad = Vec::with_capacity(logits.len());
    for (j, f) in logits.iter().enumerate() {
        if j == label {
            grad.push(2.0 * params.t / c * (f - params.m));
        } else {
            grad.push(2.0 / c * f);
        }
    }
    LossOutput {
        value: acc / c,
        grad,
    }
}

/// The training loss, selected once per run.
///
/// Every consumer dispatches through [`Loss::evaluate`]; switching the loss
/// of a run changes this one value and nothing else in the pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loss {
    Squentropy,
    CrossEntropy,
    Square(RescaleParams),
}

impl Loss {
    /// Builds a loss from its config-file name. `t` and `m` only apply to
    /// `"square"`; the other losses have no parameters.
    pub fn from_name(name: &str, t: f64, m: f64) -> Result<Self> {
        match name {
            "squentropy" => Ok(Loss::Squentropy),
            "cross-entropy" => Ok(Loss::CrossEntropy),
            "square" => Ok(Loss::Square(RescaleParams::new(t, m)?)),
            other => Err(Error::InvalidArgument(format!(
                "unknown loss \"{other}\"; expected squentropy, cross-entropy, or square"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Loss::Squentropy => "squentropy",
            Loss::CrossEntropy => "cross-entropy",
            Loss::Square(_) => "square",
        }
    }

    pub fn evaluate(&self, logits: &[f64], label: usize) -> LossOutput {
        match self {
            Loss::Squentropy => squentropy(logits, label),
            Loss::CrossEntropy => cross_entropy(logits, label),
            Loss::Square(params) => rescaled_square(logits, label, *params),
        }
    }
}
