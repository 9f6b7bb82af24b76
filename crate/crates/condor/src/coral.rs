//! CORAL baseline head: a shared scalar score with per-threshold biases.
//!
//! The head maps a feature vector to `p_k = sigmoid(a(x) + b_k)`. Nothing in
//! the parameterization forces the biases to be ordered, so rank-inconsistent
//! marginals are representable; [`consistency_check`] reports the first
//! violating threshold when they are.

use crate::encoding::BinaryEncoding;
use crate::error::{CondorError, Result};
use crate::head::{ImportanceWeights, MarginalProbs};
use crate::math::{sigmoid, softplus};

/// Final-layer parameters: shared dense weights producing the scalar score
/// `a(x)`, plus one bias per threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CoralHead {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl CoralHead {
    pub fn new(weights: Vec<f64>, biases: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || biases.is_empty() {
            return Err(CondorError::Domain(
                "coral head needs non-empty weights and biases".into(),
            ));
        }
        Ok(Self { weights, biases })
    }

    /// Scalar score `a(x) = w . h`.
    pub fn score(&self, features: &[f64]) -> f64 {
        self.weights.iter().zip(features).map(|(w, x)| w * x).sum()
    }
}

/// Marginals from a scalar score: `p_k = sigmoid(a + b_k)`. Not guaranteed
/// monotone.
pub fn forward(a: f64, biases: &[f64]) -> MarginalProbs {
    MarginalProbs::new(biases.iter().map(|&b| sigmoid(a + b)).collect())
        .expect("sigmoid outputs are valid probabilities")
}

/// Outcome of checking CORAL biases for rank consistency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConsistencyCheck {
    Consistent,
    /// First threshold `k` (1-based) whose bias exceeds its predecessor, which
    /// makes `p_k > p_{k-1}` for every input.
    Witness { k: usize },
}

/// Consistent iff `b_1 >= b_2 >= ... >= b_{K-1}`. Equal neighbors are allowed:
/// they give a conditional of exactly one, a tie rather than a contradiction.
pub fn consistency_check(biases: &[f64]) -> ConsistencyCheck {
    for (i, w) in biases.windows(2).enumerate() {
        if w[1] > w[0] {
            return ConsistencyCheck::Witness { k: i + 2 };
        }
    }
    ConsistencyCheck::Consistent
}

/// WBCE on per-threshold logits `z_k = a + b_k`, one example.
///
/// Unlike the chained CONDOR marginals, each `p_k = sigmoid(z_k)` depends on
/// a single logit, so this is a plain weighted BCE computed in softplus form
/// with gradient `lambda_k (sigmoid(z_k) - y_k)`.
pub fn wbce_loss_single(
    z: &[f64],
    enc: &BinaryEncoding,
    weights: &ImportanceWeights,
) -> Result<(f64, Vec<f64>)> {
    if z.len() != enc.len() || weights.len() != z.len() {
        return Err(CondorError::Domain(format!(
            "{} logits vs {} encoding bits vs {} weights",
            z.len(),
            enc.len(),
            weights.len()
        )));
    }
    let mut loss = 0.0;
    let mut grad = vec![0.0; z.len()];
    for (k, (&zk, &yk)) in z.iter().zip(enc.bits()).enumerate() {
        let lambda = weights.values()[k];
        loss += lambda * if yk == 1 { softplus(-zk) } else { softplus(zk) };
        grad[k] = lambda * (sigmoid(zk) - f64::from(yk));
    }
    Ok((loss, grad))
}

/// Batch WBCE over per-threshold logits, mean reduction.
pub fn wbce_loss(
    z: &[Vec<f64>],
    encs: &[BinaryEncoding],
    weights: &ImportanceWeights,
) -> Result<(f64, Vec<Vec<f64>>)> {
    if z.len() != encs.len() {
        return Err(CondorError::Domain(format!(
            "{} logit rows vs {} encodings",
            z.len(),
            encs.len()
        )));
    }
    if z.is_empty() {
        return Err(CondorError::Domain("empty batch".into()));
    }
    let n = z.len() as f64;
    let mut total = 0.0;
    let mut grads = Vec::with_capacity(z.len());
    for (zi, enci) in z.iter().zip(encs) {
        let (loss, mut grad) = wbce_loss_single(zi, enci, weights)?;
        total += loss;
        for g in &mut grad {
            *g /= n;
        }
        grads.push(grad);
    }
    Ok((total / n, grads))
}
