//! Ordinal regression with rank-consistent conditional heads.
//!
//! The toolkit covers the full loop for ordinal classification benchmarks:
//!
//! - [`encoding`]: rank labels, extended binary encodings, rank point
//!   estimates and the induced rank distribution.
//! - [`head`]: the conditional-probability output head whose chained
//!   marginals are rank consistent for every parameterization, with its
//!   maximum-likelihood and WBCE losses.
//! - [`coral`] / [`categorical`]: baseline heads (shared-score thresholds and
//!   plain softmax) with their losses and consistency diagnostics.
//! - [`nn`]: a small dense-network trainer (ReLU layers, Adam, early
//!   stopping, seeded init) sufficient for the benchmark experiments.
//! - [`metrics`]: WBCE / MAE / EMD / accuracy with mean ± std aggregation.
//! - [`data`]: the synthetic quadrants generator, an MNIST IDX loader, and
//!   deterministic splits.
//!
//! Training a rank-consistent classifier end to end:
//!
//! ```
//! use condor::data::{quadrants, split};
//! use condor::encoding::rank_from_marginals;
//! use condor::head::{conditionals_from_logits, marginals_from_conditionals};
//! use condor::nn::{train, ArchSpec, HeadKind, LossKind, Network, TrainConfig};
//!
//! # fn main() -> condor::Result<()> {
//! let data = quadrants::generate(300, 0)?;
//! let (train_set, test_set) = split(&data, 0.1, 0)?;
//!
//! let arch = ArchSpec { input_dim: 2, hidden: vec![10, 10], head: HeadKind::Condor, k: 4 };
//! let mut net = Network::init(arch, 0)?;
//! let cfg = TrainConfig { max_epochs: 10, patience: 10, ..TrainConfig::default() };
//! train(&mut net, &train_set, LossKind::CondorMl, &cfg)?;
//!
//! let logits = net.logits(test_set.features())?;
//! let q = conditionals_from_logits(logits.row(0))?;
//! let p = marginals_from_conditionals(&q);
//! assert!(p.is_rank_consistent()); // holds for every input and any weights
//! let predicted = rank_from_marginals(&p, 0.5, test_set.alphabet())?;
//! assert!((1..=4).contains(&predicted.index()));
//! # Ok(())
//! # }
//! ```

pub mod categorical;
pub mod coral;
pub mod data;
pub mod encoding;
pub mod error;
pub mod head;
pub mod math;
pub mod metrics;
pub mod nn;

pub use error::{CondorError, Result};
