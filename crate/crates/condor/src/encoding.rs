//! Ordinal labels, their extended binary encodings, and rank point estimates.
//!
//! An ordinal label with `K` ranks is represented by its 1-based rank index
//! `s` and encoded as `K-1` indicator bits `y^(k) = 1(s > k)`. The bits of a
//! valid encoding are monotone non-increasing; a non-monotone bit vector has
//! no corresponding rank and is rejected rather than repaired, since it
//! signals a rank-inconsistent upstream predictor.

use crate::error::{CondorError, Result};
use crate::head::MarginalProbs;

/// The ordered set of rank names for a `K`-rank problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelAlphabet {
    ranks: Vec<String>,
}

impl LabelAlphabet {
    /// Alphabet from explicit rank names, ordered lowest to highest.
    pub fn new<S: Into<String>>(ranks: Vec<S>) -> Result<Self> {
        let ranks: Vec<String> = ranks.into_iter().map(Into::into).collect();
        if ranks.len() < 2 {
            return Err(CondorError::Domain(format!(
                "alphabet needs at least 2 ranks, got {}",
                ranks.len()
            )));
        }
        for i in 0..ranks.len() {
            for j in (i + 1)..ranks.len() {
                if ranks[i] == ranks[j] {
                    return Err(CondorError::Domain(format!(
                        "duplicate rank name {:?}",
                        ranks[i]
                    )));
                }
            }
        }
        Ok(Self { ranks })
    }

    /// Alphabet with numeric rank names `1..=k`.
    pub fn numeric(k: usize) -> Result<Self> {
        Self::new((1..=k).map(|r| r.to_string()).collect())
    }

    /// Number of ranks `K`.
    pub fn k(&self) -> usize {
        self.ranks.len()
    }

    pub fn ranks(&self) -> &[String] {
        &self.ranks
    }

    pub fn name(&self, label: RankLabel) -> &str {
        &self.ranks[label.index() - 1]
    }
}

/// A 1-based rank index in `[1, K]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RankLabel(usize);

impl RankLabel {
    pub fn new(index: usize, alphabet: &LabelAlphabet) -> Result<Self> {
        if index < 1 || index > alphabet.k() {
            return Err(CondorError::Domain(format!(
                "rank index {index} out of range [1, {}]",
                alphabet.k()
            )));
        }
        Ok(Self(index))
    }

    pub fn index(self) -> usize {
        self.0
    }
}

/// Extended binary encoding of a rank: `K-1` bits, `bits[k-1] = 1(s > k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryEncoding {
    bits: Vec<u8>,
}

impl BinaryEncoding {
    /// Wraps a raw bit vector. Values must be 0/1; monotonicity is checked by
    /// [`decode`], so that inconsistent predictor output remains representable.
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(CondorError::Domain("encoding must have K-1 >= 1 bits".into()));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(CondorError::Domain(format!("encoding bit {b} is not 0/1")));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// True when the bits are monotone non-increasing.
    pub fn is_consistent(&self) -> bool {
        self.bits.windows(2).all(|w| w[0] >= w[1])
    }
}

/// Encodes a rank label as its `K-1` threshold indicators.
pub fn encode(label: RankLabel, alphabet: &LabelAlphabet) -> BinaryEncoding {
    let s = label.index();
    let bits = (1..alphabet.k()).map(|k| u8::from(s > k)).collect();
    BinaryEncoding { bits }
}

/// Decodes a bit vector back to its rank: `s = 1 + sum(bits)`.
///
/// Rejects non-monotone vectors; those signal upstream rank inconsistency.
pub fn decode(enc: &BinaryEncoding, alphabet: &LabelAlphabet) -> Result<RankLabel> {
    if enc.len() != alphabet.k() - 1 {
        return Err(CondorError::Domain(format!(
            "encoding has {} bits, expected K-1 = {}",
            enc.len(),
            alphabet.k() - 1
        )));
    }
    if !enc.is_consistent() {
        return Err(CondorError::Consistency(format!(
            "bit vector {:?} is not monotone non-increasing",
            enc.bits
        )));
    }
    let s = 1 + enc.bits.iter().map(|&b| b as usize).sum::<usize>();
    RankLabel::new(s, alphabet)
}

/// Rank point estimate: `1 + |{k : p_k > threshold}|`.
///
/// The inequality is strict, so a marginal exactly at the threshold does not
/// count as exceeded. Well defined even for non-monotone marginals, which is
/// how baseline heads are evaluated.
pub fn rank_from_marginals(p: &MarginalProbs, threshold: f64, alphabet: &LabelAlphabet) -> Result<RankLabel> {
    if p.len() != alphabet.k() - 1 {
        return Err(CondorError::Domain(format!(
            "got {} marginals, expected K-1 = {}",
            p.len(),
            alphabet.k() - 1
        )));
    }
    let s = 1 + p.values().iter().filter(|&&pk| pk > threshold).count();
    RankLabel::new(s, alphabet)
}

/// Probability mass over the `K` ranks induced by monotone marginals:
/// `P(s = r) = p_{r-1} - p_r` with `p_0 = 1` and `p_K = 0`.
pub fn rank_distribution(p: &MarginalProbs) -> Result<Vec<f64>> {
    let v = p.values();
    if !v.windows(2).all(|w| w[0] >= w[1]) {
        return Err(CondorError::Consistency(format!(
            "marginals {v:?} are not monotone non-increasing"
        )));
    }
    let k = v.len() + 1;
    let mut out = Vec::with_capacity(k);
    let mut prev = 1.0;
    for &pk in v {
        out.push(prev - pk);
        prev = pk;
    }
    out.push(prev);
    Ok(out)
}
