//! Ordinal evaluation metrics: WBCE, MAE, EMD, accuracy, and the per-seed
//! mean ± std aggregation used by the benchmark tables.

use crate::encoding::{BinaryEncoding, RankLabel};
use crate::error::{CondorError, Result};
use crate::head::MarginalProbs;
use crate::math::{ln_clamped, CLAMP};

/// Mean absolute rank error, unit distance between adjacent ranks.
pub fn mae_rank(pred: &[RankLabel], truth: &[RankLabel]) -> Result<f64> {
    check_equal_len(pred.len(), truth.len())?;
    let total: f64 = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p.index() as f64 - t.index() as f64).abs())
        .sum();
    Ok(total / pred.len() as f64)
}

/// Fraction of exactly matching ranks.
pub fn accuracy(pred: &[RankLabel], truth: &[RankLabel]) -> Result<f64> {
    check_equal_len(pred.len(), truth.len())?;
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Mean earth mover's distance between the predicted rank distribution and
/// the one-hot truth, unit ground distance.
///
/// Per example this is `sum_k |p_k - y^(k)|`: the rank CDF at threshold `k`
/// is `1 - p_k` for the prediction and `1 - y^(k)` for the truth, so the sum
/// of absolute marginal gaps is exactly the CDF L1 distance.
pub fn emd(p: &[MarginalProbs], encs: &[BinaryEncoding]) -> Result<f64> {
    check_equal_len(p.len(), encs.len())?;
    check_nonempty(p.len())?;
    let mut total = 0.0;
    for (pi, enci) in p.iter().zip(encs) {
        check_equal_len(pi.len(), enci.len())?;
        total += pi
            .values()
            .iter()
            .zip(enci.bits())
            .map(|(&pk, &yk)| (pk - f64::from(yk)).abs())
            .sum::<f64>();
    }
    Ok(total / p.len() as f64)
}

/// Mean WBCE over examples with unit importance weights, probabilities
/// clamped to `[1e-12, 1 - 1e-12]` before the logarithms.
pub fn wbce_metric(p: &[MarginalProbs], encs: &[BinaryEncoding]) -> Result<f64> {
    check_equal_len(p.len(), encs.len())?;
    check_nonempty(p.len())?;
    let mut total = 0.0;
    for (pi, enci) in p.iter().zip(encs) {
        check_equal_len(pi.len(), enci.len())?;
        for (&pk, &yk) in pi.values().iter().zip(enci.bits()) {
            let pk = pk.clamp(CLAMP, 1.0 - CLAMP);
            total -= if yk == 1 {
                ln_clamped(pk)
            } else {
                ln_clamped(1.0 - pk)
            };
        }
    }
    Ok(total / p.len() as f64)
}

fn check_equal_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(CondorError::Domain(format!("length mismatch: {a} vs {b}")));
    }
    Ok(())
}

fn check_nonempty(n: usize) -> Result<()> {
    if n == 0 {
        return Err(CondorError::Domain("no examples".into()));
    }
    Ok(())
}

/// One seed's test-set metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedMetrics {
    pub seed: u64,
    pub wbce: f64,
    pub mae: f64,
    pub emd: f64,
    pub accuracy: f64,
}

/// Mean and sample standard deviation across seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
}

fn aggregate_values(values: &[f64]) -> Aggregate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        var.sqrt()
    };
    Aggregate { mean, std }
}

/// Aggregated report for one (dataset, head) pair across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub head: String,
    pub dataset: String,
    pub k: usize,
    pub conventions: String,
    pub per_seed: Vec<SeedMetrics>,
    pub wbce: Aggregate,
    pub mae: Aggregate,
    pub emd: Aggregate,
    pub accuracy: Aggregate,
    /// Set when only one seed was aggregated, so std 0 is read as "no spread
    /// estimate" rather than "no spread".
    pub single_seed: bool,
}

/// Aggregates per-seed metrics with the sample (n-1) standard deviation.
pub fn aggregate(
    head: &str,
    dataset: &str,
    k: usize,
    conventions: &str,
    per_seed: Vec<SeedMetrics>,
) -> Result<MetricsReport> {
    if per_seed.is_empty() {
        return Err(CondorError::Domain("no per-seed metrics to aggregate".into()));
    }
    let collect = |f: fn(&SeedMetrics) -> f64| -> Vec<f64> { per_seed.iter().map(f).collect() };
    Ok(MetricsReport {
        head: head.to_string(),
        dataset: dataset.to_string(),
        k,
        conventions: conventions.to_string(),
        single_seed: per_seed.len() == 1,
        wbce: aggregate_values(&collect(|m| m.wbce)),
        mae: aggregate_values(&collect(|m| m.mae)),
        emd: aggregate_values(&collect(|m| m.emd)),
        accuracy: aggregate_values(&collect(|m| m.accuracy)),
        per_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{encode, rank_distribution, LabelAlphabet};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ranks(alphabet: &LabelAlphabet, idx: &[usize]) -> Vec<RankLabel> {
        idx.iter()
            .map(|&i| RankLabel::new(i, alphabet).unwrap())
            .collect()
    }

    #[test]
    fn mae_cases() {
        let a = LabelAlphabet::numeric(5).unwrap();
        let t = ranks(&a, &[2, 1]);
        assert_eq!(mae_rank(&t, &t).unwrap(), 0.0);
        assert_eq!(mae_rank(&ranks(&a, &[3, 2]), &t).unwrap(), 1.0);
        assert_eq!(mae_rank(&ranks(&a, &[1, 4]), &t).unwrap(), 2.0);
        assert!(mae_rank(&ranks(&a, &[1]), &t).is_err());
    }

    #[test]
    fn accuracy_cases() {
        let a = LabelAlphabet::numeric(3).unwrap();
        let t = ranks(&a, &[1, 2, 3, 1]);
        assert_eq!(accuracy(&t, &t).unwrap(), 1.0);
        assert_eq!(accuracy(&ranks(&a, &[2, 3, 1, 2]), &t).unwrap(), 0.0);
        assert_eq!(accuracy(&ranks(&a, &[1, 2, 1, 2]), &t).unwrap(), 0.5);
    }

    #[test]
    fn emd_cases() {
        let enc = BinaryEncoding::new(vec![1, 1]).unwrap();
        let exact = MarginalProbs::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(emd(&[exact], std::slice::from_ref(&enc)).unwrap(), 0.0);

        let p = MarginalProbs::new(vec![0.9, 0.6]).unwrap();
        let v = emd(&[p], &[enc]).unwrap();
        assert!((v - 0.5).abs() < 1e-15);

        // Point mass one rank away: truth rank 2, prediction rank 1.
        let enc = BinaryEncoding::new(vec![1, 0]).unwrap();
        let p = MarginalProbs::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(emd(&[p], &[enc]).unwrap(), 1.0);
    }

    #[test]
    fn emd_matches_cdf_oracle() {
        // Brute-force oracle: L1 distance between the rank CDFs built from
        // rank_distribution and the one-hot truth.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let k = rng.random_range(2..=8usize);
            let a = LabelAlphabet::numeric(k).unwrap();
            let mut pv: Vec<f64> = (0..k - 1).map(|_| rng.random()).collect();
            pv.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let p = MarginalProbs::new(pv).unwrap();
            let s = rng.random_range(1..=k);
            let enc = encode(RankLabel::new(s, &a).unwrap(), &a);

            let fast = emd(std::slice::from_ref(&p), std::slice::from_ref(&enc)).unwrap();

            let pred_pmf = rank_distribution(&p).unwrap();
            let mut true_pmf = vec![0.0; k];
            true_pmf[s - 1] = 1.0;
            let mut oracle = 0.0;
            let (mut cp, mut ct) = (0.0, 0.0);
            for j in 0..k {
                cp += pred_pmf[j];
                ct += true_pmf[j];
                oracle += (cp - ct).abs();
            }
            assert!((fast - oracle).abs() < 1e-10, "K={k} s={s}: {fast} vs {oracle}");
        }
    }

    #[test]
    fn emd_and_mae_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..300 {
            let k = rng.random_range(2..=9usize);
            let a = LabelAlphabet::numeric(k).unwrap();
            let pv: Vec<f64> = (0..k - 1).map(|_| rng.random()).collect();
            let p = MarginalProbs::new(pv).unwrap();
            let s = rng.random_range(1..=k);
            let enc = encode(RankLabel::new(s, &a).unwrap(), &a);
            let e = emd(std::slice::from_ref(&p), std::slice::from_ref(&enc)).unwrap();
            assert!(e <= (k - 1) as f64 + 1e-12);
            let t = rng.random_range(1..=k);
            let m = mae_rank(
                &ranks(&a, &[s]),
                &ranks(&a, &[t]),
            )
            .unwrap();
            assert!(m <= (k - 1) as f64);
        }
    }

    #[test]
    fn wbce_cases() {
        let enc = BinaryEncoding::new(vec![1]).unwrap();
        let p = MarginalProbs::new(vec![0.5]).unwrap();
        let v = wbce_metric(&[p], std::slice::from_ref(&enc)).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);

        let p = MarginalProbs::new(vec![1.0]).unwrap();
        assert!(wbce_metric(&[p], &[enc]).unwrap() < 1e-11);

        // Hand case: p=[0.8, 0.24], enc=[1,0].
        let enc = BinaryEncoding::new(vec![1, 0]).unwrap();
        let p = MarginalProbs::new(vec![0.8, 0.24]).unwrap();
        let v = wbce_metric(&[p], &[enc]).unwrap();
        let expected = -(0.8f64.ln() + 0.76f64.ln());
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn metrics_are_permutation_invariant() {
        let a = LabelAlphabet::numeric(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 40;
        let ps: Vec<MarginalProbs> = (0..n)
            .map(|_| MarginalProbs::new((0..3).map(|_| rng.random()).collect()).unwrap())
            .collect();
        let truths: Vec<RankLabel> = (0..n)
            .map(|_| RankLabel::new(rng.random_range(1..=4), &a).unwrap())
            .collect();
        let encs: Vec<BinaryEncoding> = truths.iter().map(|&t| encode(t, &a)).collect();
        let preds: Vec<RankLabel> = (0..n)
            .map(|_| RankLabel::new(rng.random_range(1..=4), &a).unwrap())
            .collect();

        let perm: Vec<usize> = {
            let mut idx: Vec<usize> = (0..n).collect();
            use rand::seq::SliceRandom;
            idx.shuffle(&mut rng);
            idx
        };
        let ps2: Vec<MarginalProbs> = perm.iter().map(|&i| ps[i].clone()).collect();
        let encs2: Vec<BinaryEncoding> = perm.iter().map(|&i| encs[i].clone()).collect();
        let truths2: Vec<RankLabel> = perm.iter().map(|&i| truths[i]).collect();
        let preds2: Vec<RankLabel> = perm.iter().map(|&i| preds[i]).collect();

        assert!((emd(&ps, &encs).unwrap() - emd(&ps2, &encs2).unwrap()).abs() < 1e-12);
        assert!((wbce_metric(&ps, &encs).unwrap() - wbce_metric(&ps2, &encs2).unwrap()).abs() < 1e-12);
        assert!((mae_rank(&preds, &truths).unwrap() - mae_rank(&preds2, &truths2).unwrap()).abs() < 1e-12);
        assert!((accuracy(&preds, &truths).unwrap() - accuracy(&preds2, &truths2).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn aggregate_cases() {
        let seed = |seed, v| SeedMetrics { seed, wbce: v, mae: v, emd: v, accuracy: v };
        let r = aggregate("condor", "quadrants", 4, "", vec![
            seed(0, 0.1),
            seed(1, 0.1),
            seed(2, 0.1),
        ])
        .unwrap();
        assert!((r.wbce.mean - 0.1).abs() < 1e-15);
        assert!(r.wbce.std < 1e-15);
        assert!(!r.single_seed);

        let r = aggregate("condor", "quadrants", 4, "", vec![seed(0, 0.0), seed(1, 1.0)]).unwrap();
        assert_eq!(r.mae.mean, 0.5);
        assert!((r.mae.std - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);

        let r = aggregate("condor", "quadrants", 4, "", vec![seed(7, 0.3)]).unwrap();
        assert!(r.single_seed);
        assert_eq!(r.emd.std, 0.0);

        assert!(aggregate("condor", "quadrants", 4, "", vec![]).is_err());
    }
}
