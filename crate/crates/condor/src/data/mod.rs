//! Dataset container, deterministic splitting and subsetting, CSV export.

pub mod mnist;
pub mod quadrants;

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::encoding::{LabelAlphabet, RankLabel};
use crate::error::{CondorError, Result};
use crate::nn::Tensor;

/// FNV-1a content digest, stable across platforms and releases; used for
/// provenance strings and config hashes.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Feature matrix with one rank label per row, plus provenance for the run
/// manifests.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Tensor,
    labels: Vec<RankLabel>,
    alphabet: LabelAlphabet,
    provenance: String,
}

impl Dataset {
    pub fn new(
        features: Tensor,
        labels: Vec<RankLabel>,
        alphabet: LabelAlphabet,
        provenance: String,
    ) -> Result<Self> {
        if features.rows() == 0 {
            return Err(CondorError::Domain("dataset must be non-empty".into()));
        }
        if features.rows() != labels.len() {
            return Err(CondorError::Domain(format!(
                "{} feature rows vs {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if !features.all_finite() {
            return Err(CondorError::Numeric("non-finite feature values".into()));
        }
        if let Some(bad) = labels.iter().find(|l| l.index() > alphabet.k()) {
            return Err(CondorError::Domain(format!(
                "label {} out of range for K={}",
                bad.index(),
                alphabet.k()
            )));
        }
        Ok(Self { features, labels, alphabet, provenance })
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn k(&self) -> usize {
        self.alphabet.k()
    }

    pub fn features(&self) -> &Tensor {
        &self.features
    }

    pub fn labels(&self) -> &[RankLabel] {
        &self.labels
    }

    pub fn alphabet(&self) -> &LabelAlphabet {
        &self.alphabet
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    fn take(&self, indices: &[usize], provenance: String) -> Result<Dataset> {
        Dataset::new(
            self.features.gather_rows(indices),
            indices.iter().map(|&i| self.labels[i]).collect(),
            self.alphabet.clone(),
            provenance,
        )
    }

    /// CSV with a header row: feature columns then the 1-based rank label.
    /// Floats use shortest round-trip formatting.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for d in 0..self.feature_dim() {
            out.push_str(&format!("x{d},"));
        }
        out.push_str("label\n");
        for r in 0..self.len() {
            for v in self.features.row(r) {
                out.push_str(&format!("{v:?},"));
            }
            out.push_str(&format!("{}\n", self.labels[r].index()));
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(out.as_bytes())?;
        Ok(())
    }
}

/// Deterministic shuffled partition into (train, test).
///
/// Test size is `round(n * test_fraction)`, clamped so both sides stay
/// non-empty; datasets with fewer than two examples cannot be split.
pub fn split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CondorError::Domain(format!(
            "test fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let n = ds.len();
    if n < 2 {
        return Err(CondorError::Domain(format!(
            "cannot split {n} examples into two non-empty sides"
        )));
    }
    let test_n = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let test_idx = &indices[..test_n];
    let train_idx = &indices[test_n..];
    let train = ds.take(
        train_idx,
        format!("{} | split(train, {test_fraction}, seed={seed})", ds.provenance),
    )?;
    let test = ds.take(
        test_idx,
        format!("{} | split(test, {test_fraction}, seed={seed})", ds.provenance),
    )?;
    Ok((train, test))
}

/// Deterministic sample of `n` examples without replacement.
pub fn subset(ds: &Dataset, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 || n > ds.len() {
        return Err(CondorError::Domain(format!(
            "subset size {n} out of range [1, {}]",
            ds.len()
        )));
    }
    let mut indices: Vec<usize> = (0..ds.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    indices.truncate(n);
    ds.take(&indices, format!("{} | subset({n}, seed={seed})", ds.provenance))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> Dataset {
        let alphabet = LabelAlphabet::numeric(3).unwrap();
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        let labels = (0..n)
            .map(|i| RankLabel::new(i % 3 + 1, &alphabet).unwrap())
            .collect();
        Dataset::new(
            Tensor::from_rows(&rows).unwrap(),
            labels,
            alphabet,
            "toy".into(),
        )
        .unwrap()
    }

    #[test]
    fn split_sizes_and_determinism() {
        let ds = toy(1000);
        let (train, test) = split(&ds, 0.1, 42).unwrap();
        assert_eq!(train.len(), 900);
        assert_eq!(test.len(), 100);

        let (train2, test2) = split(&ds, 0.1, 42).unwrap();
        assert_eq!(train.features(), train2.features());
        assert_eq!(test.features(), test2.features());
    }

    #[test]
    fn split_is_disjoint_and_exhaustive() {
        let ds = toy(57);
        let (train, test) = split(&ds, 0.3, 9).unwrap();
        let mut seen: Vec<f64> = train
            .features()
            .data()
            .iter()
            .chain(test.features().data())
            .cloned()
            .collect();
        seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected: Vec<f64> = (0..57).map(|i| i as f64).collect();
        assert_eq!(seen, expected);
    }

    #[test]
    fn split_clamps_to_leave_both_sides() {
        let ds = toy(10);
        let (train, test) = split(&ds, 0.999, 0).unwrap();
        assert_eq!(test.len(), 9);
        assert_eq!(train.len(), 1);
    }

    #[test]
    fn subset_is_deterministic() {
        let ds = toy(100);
        let a = subset(&ds, 20, 5).unwrap();
        let b = subset(&ds, 20, 5).unwrap();
        assert_eq!(a.features(), b.features());
        assert_eq!(a.len(), 20);
        assert!(subset(&ds, 0, 5).is_err());
        assert!(subset(&ds, 101, 5).is_err());
    }

    #[test]
    fn csv_round_trip_values() {
        let ds = toy(5);
        let dir = std::env::temp_dir().join(format!("condor-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("toy.csv");
        ds.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x0,label");
        let first = lines.next().unwrap();
        assert_eq!(first, "0.0,1");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
