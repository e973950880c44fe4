use crate::math;
use crate::sensing::Hypothesis;

/// Probabilities are clamped to this floor inside the logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

/// Numerically stable two-class softmax of raw scores.
pub fn softmax_from_logits(z: [f64; 2]) -> [f64; 2] {
    let m = if z[0] > z[1] { z[0] } else { z[1] };
    let e0 = math::exp(z[0] - m);
    let e1 = math::exp(z[1] - m);
    let s = e0 + e1;
    [e0 / s, e1 / s]
}

/// Cross-entropy `-log p[label]` and its gradient with respect to the logits,
/// `p - onehot(label)`.
pub fn cross_entropy(probs: [f64; 2], label: Hypothesis) -> (f64, [f64; 2]) {
    let k = label.index();
    let p = if probs[k] > PROB_FLOOR { probs[k] } else { PROB_FLOOR };
    let mut grad = probs;
    grad[k] -= 1.0;
    (-math::ln(p), grad)
}
