//! Categorical softmax baseline: a dense layer with `K` outputs trained with
//! categorical cross-entropy, plus the tail-sum conversion that makes ordinal
//! metrics computable for it.

use crate::error::{CondorError, Result};
use crate::head::MarginalProbs;

/// Softmax over `K` logits, shifted by the max for stability.
pub fn forward(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(CondorError::Domain("empty logit vector".into()));
    }
    if let Some(&bad) = logits.iter().find(|v| !v.is_finite()) {
        return Err(CondorError::Numeric(format!("non-finite logit {bad}")));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Cross-entropy in log-softmax form for one example.
///
/// `true_index` is the 1-based rank; returns the loss and its gradient in the
/// logits, `softmax(z) - onehot`.
pub fn cce_loss_single(logits: &[f64], true_index: usize) -> Result<(f64, Vec<f64>)> {
    if true_index < 1 || true_index > logits.len() {
        return Err(CondorError::Domain(format!(
            "true index {true_index} out of range [1, {}]",
            logits.len()
        )));
    }
    let probs = forward(logits)?;
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum: f64 = logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln() + max;
    let loss = log_sum - logits[true_index - 1];
    let mut grad = probs;
    grad[true_index - 1] -= 1.0;
    Ok((loss, grad))
}

/// Batch cross-entropy, mean reduction.
pub fn cce_loss(logits: &[Vec<f64>], true_indices: &[usize]) -> Result<(f64, Vec<Vec<f64>>)> {
    if logits.len() != true_indices.len() {
        return Err(CondorError::Domain(format!(
            "{} logit rows vs {} labels",
            logits.len(),
            true_indices.len()
        )));
    }
    if logits.is_empty() {
        return Err(CondorError::Domain("empty batch".into()));
    }
    let n = logits.len() as f64;
    let mut total = 0.0;
    let mut grads = Vec::with_capacity(logits.len());
    for (zi, &si) in logits.iter().zip(true_indices) {
        let (loss, mut grad) = cce_loss_single(zi, si)?;
        total += loss;
        for g in &mut grad {
            *g /= n;
        }
        grads.push(grad);
    }
    Ok((total / n, grads))
}

/// Exceedance marginals from a rank pmf: `p_k = sum_{j > k} probs[j]`.
///
/// Monotone non-increasing by construction, which is what lets WBCE and EMD
/// be reported for the categorical baseline on the same footing as the
/// ordinal heads.
pub fn marginals(probs: &[f64]) -> Result<MarginalProbs> {
    if probs.len() < 2 {
        return Err(CondorError::Domain("need at least 2 rank probabilities".into()));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 || probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(CondorError::Domain(format!(
            "rank probabilities must be a distribution, sum={total}"
        )));
    }
    let mut p = vec![0.0; probs.len() - 1];
    let mut suffix = 0.0;
    for k in (1..probs.len()).rev() {
        suffix += probs[k];
        p[k - 1] = suffix.min(1.0);
    }
    MarginalProbs::new(p)
}
