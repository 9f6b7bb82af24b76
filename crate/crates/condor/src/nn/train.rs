//! Seeded, single-threaded training with Adam and early stopping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::AdamState;
use super::network::{HeadKind, Network};
use super::tensor::Tensor;
use crate::categorical;
use crate::coral;
use crate::data::Dataset;
use crate::encoding::{encode, BinaryEncoding};
use crate::error::{CondorError, Result};
use crate::head::{self, ImportanceWeights};

/// Which loss drives training. Determines the compatible head.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    CondorMl,
    CondorWbce,
    CoralWbce,
    Cce,
}

impl LossKind {
    pub fn head(self) -> HeadKind {
        match self {
            LossKind::CondorMl | LossKind::CondorWbce => HeadKind::Condor,
            LossKind::CoralWbce => HeadKind::Coral,
            LossKind::Cce => HeadKind::Categorical,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LossKind::CondorMl => "condor-ml",
            LossKind::CondorWbce => "condor-wbce",
            LossKind::CoralWbce => "coral-wbce",
            LossKind::Cce => "cce",
        }
    }
}

/// Optimizer and stopping hyperparameters. Defaults follow the benchmark
/// setup: Adam(0.001, 0.9, 0.999, 1e-8), 100 epochs, patience 10, validation
/// split 0.2, batch size 32.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub patience: usize,
    pub validation_split: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 100,
            patience: 10,
            validation_split: 0.2,
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 {
            return Err(CondorError::Config("max_epochs must be >= 1".into()));
        }
        if self.patience == 0 {
            return Err(CondorError::Config("patience must be >= 1".into()));
        }
        if self.patience > self.max_epochs {
            return Err(CondorError::Config(format!(
                "patience {} exceeds max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if !(self.validation_split > 0.0 && self.validation_split < 1.0) {
            return Err(CondorError::Config(format!(
                "validation_split must be in (0, 1), got {}",
                self.validation_split
            )));
        }
        if self.batch_size == 0 {
            return Err(CondorError::Config("batch_size must be >= 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(CondorError::Config(format!(
                "learning_rate must be finite and >= 0, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub epochs_run: usize,
}

/// Per-example targets prepared once per training run.
struct Targets {
    encodings: Vec<BinaryEncoding>,
    ranks: Vec<usize>,
}

/// Mean loss over the batch and the gradient of that mean in the logits.
///
/// `ranks` is consulted only by the categorical loss, `encodings` only by the
/// ordinal losses; both must still be example-aligned.
pub fn batch_loss(
    loss: LossKind,
    logits: &Tensor,
    encodings: &[BinaryEncoding],
    ranks: &[usize],
    weights: &ImportanceWeights,
) -> Result<(f64, Tensor)> {
    let n = logits.rows();
    let scale = 1.0 / n as f64;
    let mut total = 0.0;
    let mut d_logits = Tensor::zeros(&[n, logits.cols()]);
    for r in 0..n {
        let row = logits.row(r);
        let (l, g) = match loss {
            LossKind::CondorMl => head::ml_loss_single(row, &encodings[r])?,
            LossKind::CondorWbce => head::wbce_loss_single(row, &encodings[r], weights)?,
            LossKind::CoralWbce => coral::wbce_loss_single(row, &encodings[r], weights)?,
            LossKind::Cce => categorical::cce_loss_single(row, ranks[r])?,
        };
        total += l;
        for (out, gv) in d_logits.row_mut(r).iter_mut().zip(&g) {
            *out = gv * scale;
        }
    }
    Ok((total * scale, d_logits))
}

/// Mean per-example loss of the current parameters on the given rows.
fn mean_loss(
    net: &Network,
    features: &Tensor,
    targets: &Targets,
    indices: &[usize],
    loss: LossKind,
    weights: &ImportanceWeights,
) -> Result<f64> {
    let mut total = 0.0;
    for chunk in indices.chunks(512) {
        let x = features.gather_rows(chunk);
        let encs: Vec<BinaryEncoding> =
            chunk.iter().map(|&i| targets.encodings[i].clone()).collect();
        let ranks: Vec<usize> = chunk.iter().map(|&i| targets.ranks[i]).collect();
        let logits = net.logits(&x)?;
        let (l, _) = batch_loss(loss, &logits, &encs, &ranks, weights)?;
        total += l * chunk.len() as f64;
    }
    Ok(total / indices.len() as f64)
}

/// Trains in place. Splits off the last `validation_split` fraction of the
/// seed-shuffled data for validation, steps Adam over shuffled mini-batches,
/// stops when validation loss has not improved for `patience` epochs, and
/// restores the parameters of the best validation epoch.
pub fn train(
    net: &mut Network,
    data: &Dataset,
    loss: LossKind,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    if loss.head() != net.head_kind() {
        return Err(CondorError::Config(format!(
            "loss {} requires a {} head, network has {}",
            loss.name(),
            loss.head(),
            net.head_kind()
        )));
    }
    if data.k() != net.k() {
        return Err(CondorError::Config(format!(
            "dataset has K={}, network has K={}",
            data.k(),
            net.k()
        )));
    }
    if data.feature_dim() != net.arch().input_dim {
        return Err(CondorError::Config(format!(
            "dataset feature width {} does not match network input {}",
            data.feature_dim(),
            net.arch().input_dim
        )));
    }

    let n = data.len();
    let val_n = (n as f64 * cfg.validation_split).round() as usize;
    if val_n == 0 || val_n >= n {
        return Err(CondorError::Config(format!(
            "validation split {} leaves an empty side for {n} examples",
            cfg.validation_split
        )));
    }

    let targets = Targets {
        encodings: data
            .labels()
            .iter()
            .map(|&l| encode(l, data.alphabet()))
            .collect(),
        ranks: data.labels().iter().map(|l| l.index()).collect(),
    };
    let weights = ImportanceWeights::uniform(net.k() - 1);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);
    let val_idx = indices.split_off(n - val_n);
    let mut train_idx = indices;

    let mut adam = AdamState::new(net.param_count());
    let mut params = net.params();
    let mut best_params = params.clone();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0;
    let mut wait = 0;
    let mut history = Vec::new();
    let mut epochs_run = 0;

    for epoch in 1..=cfg.max_epochs {
        epochs_run = epoch;
        train_idx.shuffle(&mut rng);
        let mut train_total = 0.0;
        for chunk in train_idx.chunks(cfg.batch_size) {
            let x = data.features().gather_rows(chunk);
            let encs: Vec<BinaryEncoding> =
                chunk.iter().map(|&i| targets.encodings[i].clone()).collect();
            let ranks: Vec<usize> = chunk.iter().map(|&i| targets.ranks[i]).collect();
            let pass = net.forward(&x)?;
            let (l, d_logits) = batch_loss(loss, &pass.logits, &encs, &ranks, &weights)?;
            train_total += l * chunk.len() as f64;
            let grads = net.backward(&pass, &d_logits);
            adam.step(
                &mut params,
                &grads,
                cfg.learning_rate,
                cfg.beta1,
                cfg.beta2,
                cfg.epsilon,
            )?;
            net.set_params(&params)?;
        }
        let train_loss = train_total / train_idx.len() as f64;
        let val_loss = mean_loss(net, data.features(), &targets, &val_idx, loss, &weights)?;
        history.push(EpochRecord { epoch, train_loss, val_loss });

        if val_loss < best_val {
            best_val = val_loss;
            best_epoch = epoch;
            best_params.copy_from_slice(&params);
            wait = 0;
        } else {
            wait += 1;
            if wait >= cfg.patience {
                break;
            }
        }
    }

    net.set_params(&best_params)?;
    Ok(TrainReport { history, best_epoch, best_val_loss: best_val, epochs_run })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::quadrants;
    use crate::nn::network::ArchSpec;

    fn quadrants_net(head: HeadKind, seed: u64) -> Network {
        Network::init(
            ArchSpec { input_dim: 2, hidden: vec![10, 10], head, k: 4 },
            seed,
        )
        .unwrap()
    }

    #[test]
    fn patience_zero_rejected() {
        let cfg = TrainConfig { patience: 0, ..TrainConfig::default() };
        let data = quadrants::generate(50, 0).unwrap();
        let mut net = quadrants_net(HeadKind::Condor, 0);
        assert!(matches!(
            train(&mut net, &data, LossKind::CondorMl, &cfg),
            Err(CondorError::Config(_))
        ));
    }

    #[test]
    fn zero_learning_rate_stops_after_patience_plus_one() {
        let cfg = TrainConfig {
            learning_rate: 0.0,
            patience: 4,
            max_epochs: 50,
            ..TrainConfig::default()
        };
        let data = quadrants::generate(60, 1).unwrap();
        let mut net = quadrants_net(HeadKind::Condor, 0);
        let report = train(&mut net, &data, LossKind::CondorMl, &cfg).unwrap();
        assert_eq!(report.epochs_run, 5);
        assert_eq!(report.best_epoch, 1);
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = TrainConfig { max_epochs: 5, patience: 5, ..TrainConfig::default() };
        let data = quadrants::generate(120, 7).unwrap();
        let mut a = quadrants_net(HeadKind::Condor, 3);
        let mut b = quadrants_net(HeadKind::Condor, 3);
        let ra = train(&mut a, &data, LossKind::CondorMl, &cfg).unwrap();
        let rb = train(&mut b, &data, LossKind::CondorMl, &cfg).unwrap();
        assert_eq!(a.params(), b.params());
        assert_eq!(ra, rb);
    }

    #[test]
    fn restores_best_validation_parameters() {
        let cfg = TrainConfig { max_epochs: 12, patience: 12, ..TrainConfig::default() };
        let data = quadrants::generate(200, 5).unwrap();
        let mut net = quadrants_net(HeadKind::Condor, 1);
        let report = train(&mut net, &data, LossKind::CondorMl, &cfg).unwrap();
        let min_val = report
            .history
            .iter()
            .map(|r| r.val_loss)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(report.best_val_loss, min_val);
        assert!(report.history.iter().any(|r| r.epoch == report.best_epoch));
    }

    #[test]
    fn loss_head_mismatch_rejected() {
        let data = quadrants::generate(50, 0).unwrap();
        let mut net = quadrants_net(HeadKind::Coral, 0);
        assert!(matches!(
            train(&mut net, &data, LossKind::CondorMl, &TrainConfig::default()),
            Err(CondorError::Config(_))
        ));
    }

    #[test]
    fn quadrants_training_learns() {
        // Loose smoke check; the benchmark harness asserts the real targets.
        let cfg = TrainConfig { max_epochs: 30, patience: 30, ..TrainConfig::default() };
        let data = quadrants::generate(300, 2).unwrap();
        let mut net = quadrants_net(HeadKind::Condor, 0);
        let report = train(&mut net, &data, LossKind::CondorMl, &cfg).unwrap();
        let first = report.history.first().unwrap().val_loss;
        let best = report.best_val_loss;
        assert!(best < first * 0.5, "no learning: {first} -> {best}");
    }
}
