//! The CONDOR output head.
//!
//! The final dense layer of a network emits `K-1` logits. Sigmoid activation
//! turns logit `k` into the conditional probability `q_k` that the label
//! exceeds rank `k` given that it exceeds rank `k-1`; chaining the conditionals
//! as a product yields the marginal exceedance probabilities `p_k`, which are
//! monotone non-increasing for every parameterization and every input. Two
//! losses are provided: the maximum-likelihood loss on the conditionals and
//! the weighted binary cross-entropy on the marginals, both with analytic
//! gradients with respect to the logits.

use crate::encoding::BinaryEncoding;
use crate::error::{CondorError, Result};
use crate::math::{log1mexp, log_sigmoid, sigmoid, softplus, CLAMP};

/// Per-threshold conditional exceedance probabilities `q_k`.
///
/// Sigmoids of finite logits are strictly inside `(0, 1)` in exact arithmetic;
/// under f64 rounding a saturated logit (|z| beyond ~37) can land exactly on 0
/// or 1, so the closed interval is accepted here.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalProbs {
    q: Vec<f64>,
}

impl ConditionalProbs {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(CondorError::Domain("need at least one conditional".into()));
        }
        if let Some(&bad) = q.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(CondorError::Domain(format!(
                "conditional probability {bad} outside [0, 1]"
            )));
        }
        Ok(Self { q })
    }

    pub fn values(&self) -> &[f64] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

/// Per-threshold marginal exceedance probabilities `p_k`.
///
/// Marginals derived from conditionals are monotone non-increasing by
/// construction. The type itself does not force monotonicity: baseline heads
/// can produce inconsistent marginals, and that inconsistency must remain
/// observable downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalProbs {
    p: Vec<f64>,
}

impl MarginalProbs {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(CondorError::Domain("need at least one marginal".into()));
        }
        if let Some(&bad) = p.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(CondorError::Domain(format!(
                "marginal probability {bad} outside [0, 1]"
            )));
        }
        Ok(Self { p })
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn is_rank_consistent(&self) -> bool {
        self.p.windows(2).all(|w| w[0] >= w[1])
    }
}

/// Per-subtask importance weights, all positive. Defaults to ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceWeights {
    lambda: Vec<f64>,
}

impl ImportanceWeights {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = lambda.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(CondorError::Domain(format!(
                "importance weight {bad} must be positive"
            )));
        }
        Ok(Self { lambda })
    }

    pub fn uniform(len: usize) -> Self {
        Self { lambda: vec![1.0; len] }
    }

    pub fn values(&self) -> &[f64] {
        &self.lambda
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

/// `q_k = sigmoid(z_k)` for each of the `K-1` logits.
pub fn conditionals_from_logits(z: &[f64]) -> Result<ConditionalProbs> {
    if let Some(&bad) = z.iter().find(|v| !v.is_finite()) {
        return Err(CondorError::Numeric(format!("non-finite logit {bad}")));
    }
    ConditionalProbs::new(z.iter().map(|&zk| sigmoid(zk)).collect())
}

/// Chains conditionals into marginals: `p_k = prod_{k' <= k} q_k'`.
pub fn marginals_from_conditionals(q: &ConditionalProbs) -> MarginalProbs {
    let mut p = Vec::with_capacity(q.len());
    let mut running = 1.0;
    for &qk in q.values() {
        running *= qk;
        p.push(running);
    }
    MarginalProbs { p }
}

fn check_lengths(z: &[f64], enc: &BinaryEncoding) -> Result<()> {
    if z.len() != enc.len() {
        return Err(CondorError::Domain(format!(
            "{} logits vs {} encoding bits",
            z.len(),
            enc.len()
        )));
    }
    Ok(())
}

/// Maximum-likelihood loss for one example, with its gradient in the logits.
///
/// `loss = -sum_k y^(k-1) [ y^(k) ln q_k + (1 - y^(k)) ln(1 - q_k) ]` with the
/// convention `y^(0) = 1`. Terms masked by `y^(k-1) = 0` contribute neither
/// loss nor gradient. Log-probabilities come from softplus of the logits, so
/// the loss stays finite under saturation without any clamping.
pub fn ml_loss_single(z: &[f64], enc: &BinaryEncoding) -> Result<(f64, Vec<f64>)> {
    check_lengths(z, enc)?;
    let mut loss = 0.0;
    let mut grad = vec![0.0; z.len()];
    let mut mask = 1u8; // y^(0)
    for (k, (&zk, &yk)) in z.iter().zip(enc.bits()).enumerate() {
        if mask == 1 {
            loss += if yk == 1 { softplus(-zk) } else { softplus(zk) };
            grad[k] = sigmoid(zk) - f64::from(yk);
        }
        mask = yk;
    }
    Ok((loss, grad))
}

/// Batch maximum-likelihood loss, reduced as the mean over examples.
///
/// Returns the mean loss and the gradient of the mean with respect to each
/// example's logits.
pub fn ml_loss(z: &[Vec<f64>], encs: &[BinaryEncoding]) -> Result<(f64, Vec<Vec<f64>>)> {
    batch_mean(z, encs, ml_loss_single)
}

/// Weighted binary cross-entropy over the marginals for one example.
///
/// `loss = -sum_k lambda_k [ y^(k) ln p_k + (1 - y^(k)) ln(1 - p_k) ]` with
/// `p_k` the chained product of sigmoids. `ln p_k` is accumulated in log space
/// and `ln(1 - p_k)` computed via `log1mexp`; probabilities are clamped to
/// `[1e-12, 1 - 1e-12]` before entering a logarithm, and clamped terms carry
/// zero gradient so the analytic gradient is the exact derivative of the
/// computed loss.
pub fn wbce_loss_single(
    z: &[f64],
    enc: &BinaryEncoding,
    weights: &ImportanceWeights,
) -> Result<(f64, Vec<f64>)> {
    check_lengths(z, enc)?;
    if weights.len() != z.len() {
        return Err(CondorError::Domain(format!(
            "{} importance weights vs {} subtasks",
            weights.len(),
            z.len()
        )));
    }
    let m = z.len();
    let ln_clamp = CLAMP.ln();

    // ln p_k as a running sum of log-sigmoids.
    let mut ln_p = Vec::with_capacity(m);
    let mut acc = 0.0;
    for &zk in z {
        acc += log_sigmoid(zk);
        ln_p.push(acc);
    }

    let mut loss = 0.0;
    // coef_k = lambda_k * (y_k * 1[p unclamped] - (1-y_k) * r_k * 1[1-p unclamped])
    // with r_k = p_k / (1 - p_k); d loss / d z_j = -(1 - q_j) * sum_{k >= j} coef_k.
    let mut coef = vec![0.0; m];
    for k in 0..m {
        let lambda = weights.values()[k];
        let y = enc.bits()[k];
        let lk = ln_p[k];
        if y == 1 {
            let lnp = lk.max(ln_clamp);
            loss -= lambda * lnp;
            if lk > ln_clamp {
                coef[k] = lambda;
            }
        } else {
            let raw = if lk == 0.0 { f64::NEG_INFINITY } else { log1mexp(lk) };
            let ln1mp = raw.max(ln_clamp);
            loss -= lambda * ln1mp;
            if raw > ln_clamp {
                coef[k] = -lambda * (lk - raw).exp();
            }
        }
    }

    let mut grad = vec![0.0; m];
    let mut suffix = 0.0;
    for j in (0..m).rev() {
        suffix += coef[j];
        grad[j] = -(1.0 - sigmoid(z[j])) * suffix;
    }
    Ok((loss, grad))
}

/// Batch WBCE loss, reduced as the mean over examples.
pub fn wbce_loss(
    z: &[Vec<f64>],
    encs: &[BinaryEncoding],
    weights: &ImportanceWeights,
) -> Result<(f64, Vec<Vec<f64>>)> {
    batch_mean(z, encs, |zi, enci| wbce_loss_single(zi, enci, weights))
}

fn batch_mean(
    z: &[Vec<f64>],
    encs: &[BinaryEncoding],
    mut per_example: impl FnMut(&[f64], &BinaryEncoding) -> Result<(f64, Vec<f64>)>,
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
        let (loss, mut grad) = per_example(zi, enci)?;
        total += loss;
        for g in &mut grad {
            *g /= n;
        }
        grads.push(grad);
    }
    Ok((total / n, grads))
}

/// Conditionals that reproduce a rank-consistent marginal target:
/// `q*_k = (p*_k + eps) / (p*_{k-1} + 2 eps)` with `p*_0 = 1`.
///
/// Every `q*_k` lands strictly inside `(0, 1)`, and chaining them back
/// recovers the target marginals up to an error that vanishes linearly in
/// `eps`.
pub fn target_conditionals(p_star: &[f64], eps: f64) -> Result<ConditionalProbs> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(CondorError::Domain(format!("eps must be positive, got {eps}")));
    }
    if p_star.is_empty() {
        return Err(CondorError::Domain("need at least one target marginal".into()));
    }
    if let Some(&bad) = p_star.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
        return Err(CondorError::Domain(format!(
            "target marginal {bad} outside [0, 1]"
        )));
    }
    if !p_star.windows(2).all(|w| w[0] >= w[1]) {
        return Err(CondorError::Domain(format!(
            "target marginals {p_star:?} are not monotone non-increasing"
        )));
    }
    let mut q = Vec::with_capacity(p_star.len());
    let mut prev = 1.0;
    for &pk in p_star {
        q.push((pk + eps) / (prev + 2.0 * eps));
        prev = pk;
    }
    ConditionalProbs::new(q)
}
