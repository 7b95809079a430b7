use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Probabilities below this are clamped before taking the log.
pub const PROB_FLOOR: f64 = 1e-30;

/// Max-subtracted softmax.
///
/// The normalizer sums the exponentials in ascending order, so the result
/// does not depend on the order of `logits`: permuting the input permutes the
/// output bit-for-bit.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::Contract("softmax of an empty vector".into()));
    }
    if let Some(i) = logits.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("logit {i} is {}", logits[i])));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| libm::exp(l - max)).collect();
    let mut sorted = exps.clone();
    sorted.sort_unstable_by(f64::total_cmp);
    let total: f64 = sorted.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// `-ln probs[k]`, with `probs[k]` floored at [`PROB_FLOOR`].
pub fn cross_entropy(probs: &[f64], k: usize) -> Result<f64> {
    match probs.get(k) {
        Some(&p) => Ok(-libm::log(p.max(PROB_FLOOR))),
        None => Err(Error::Contract(format!("label {k} outside {} classes", probs.len()))),
    }
}

/// Gradient of `cross_entropy(softmax(logits), k)` with respect to the logits.
pub fn softmax_cross_entropy_grad(probs: &[f64], k: usize) -> Vec<f64> {
    let mut d = probs.to_vec();
    d[k] -= 1.0;
    d
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
