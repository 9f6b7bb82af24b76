//! Runs the benchmark experiments: per seed, build the dataset, train each
//! selected head, evaluate the ordinal metrics on the test set, and write
//! the per-seed CSV, aggregated tables, and a provenance manifest.

use std::path::{Path, PathBuf};

use condor::categorical;
use condor::data::{self, mnist, quadrants, Dataset};
use condor::encoding::{encode, rank_from_marginals, BinaryEncoding, RankLabel};
use condor::head::{conditionals_from_logits, marginals_from_conditionals, MarginalProbs};
use condor::math::sigmoid;
use condor::metrics::{self, MetricsReport, SeedMetrics};
use condor::nn::{train, ArchSpec, Network, Tensor};
use condor::{CondorError, Result};

use crate::config::{Algorithm, DatasetConfig, ExperimentConfig};
use crate::export::{self, TableRow};

/// Reporting conventions recorded in every manifest, resolving what the
/// tables mean exactly.
pub const CONVENTIONS: &str = "WBCE and EMD are means over test examples (unit importance weights); \
     MAE and accuracy use threshold-count point predictions for ordinal heads and argmax for the \
     categorical head; aggregates are mean +/- sample (n-1) std across seeds.";

pub struct RunArtifacts {
    pub reports: Vec<MetricsReport>,
    pub per_seed_csv: PathBuf,
    pub results_csv: PathBuf,
    pub results_md: PathBuf,
    pub manifest: PathBuf,
}

/// Train/test pair for one seed.
pub struct SeedData {
    pub train: Dataset,
    pub test: Dataset,
}

/// MNIST source files, loaded once and subset per seed.
struct MnistSource {
    train: Dataset,
    test: Dataset,
}

fn mnist_paths(dir: &Path) -> [(PathBuf, PathBuf); 2] {
    [
        (
            dir.join("train-images-idx3-ubyte"),
            dir.join("train-labels-idx1-ubyte"),
        ),
        (
            dir.join("t10k-images-idx3-ubyte"),
            dir.join("t10k-labels-idx1-ubyte"),
        ),
    ]
}

/// True when all four MNIST IDX files exist in `dir`.
pub fn mnist_available(dir: &Path) -> bool {
    mnist_paths(dir)
        .iter()
        .all(|(a, b)| a.is_file() && b.is_file())
}

fn load_mnist(dir: &Path) -> Result<MnistSource> {
    let [(train_img, train_lab), (test_img, test_lab)] = mnist_paths(dir);
    if !mnist_available(dir) {
        return Err(CondorError::Config(format!(
            "MNIST files not found under {}; run `condor-bench fetch-mnist --dir {}` or set CONDOR_DATA_DIR",
            dir.display(),
            dir.display()
        )));
    }
    Ok(MnistSource {
        train: mnist::load(&train_img, &train_lab)?,
        test: mnist::load(&test_img, &test_lab)?,
    })
}

fn seed_data(
    cfg: &ExperimentConfig,
    source: Option<&MnistSource>,
    seed: u64,
) -> Result<SeedData> {
    match &cfg.dataset {
        DatasetConfig::Quadrants { n, test_fraction } => {
            let ds = quadrants::generate(*n, seed)?;
            let (train, test) = data::split(&ds, *test_fraction, seed)?;
            Ok(SeedData { train, test })
        }
        DatasetConfig::Mnist { train_subset, test_subset, full, .. } => {
            let source = source.expect("mnist source loaded");
            if *full {
                Ok(SeedData { train: source.train.clone(), test: source.test.clone() })
            } else {
                Ok(SeedData {
                    train: data::subset(&source.train, *train_subset, seed)?,
                    test: data::subset(&source.test, *test_subset, seed)?,
                })
            }
        }
    }
}

/// Marginal exceedance probabilities for one example under each head.
fn marginals_for(algo: Algorithm, logit_row: &[f64]) -> Result<MarginalProbs> {
    match algo {
        Algorithm::Condor | Algorithm::CondorWbce => {
            let q = conditionals_from_logits(logit_row)?;
            Ok(marginals_from_conditionals(&q))
        }
        Algorithm::Coral => {
            MarginalProbs::new(logit_row.iter().map(|&z| sigmoid(z)).collect())
        }
        Algorithm::Categorical => categorical::marginals(&categorical::forward(logit_row)?),
    }
}

fn predict(
    algo: Algorithm,
    logit_row: &[f64],
    marginals: &MarginalProbs,
    alphabet: &condor::encoding::LabelAlphabet,
) -> Result<RankLabel> {
    match algo {
        Algorithm::Categorical => {
            let probs = categorical::forward(logit_row)?;
            let argmax = probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite probs"))
                .map(|(i, _)| i)
                .expect("k >= 2");
            RankLabel::new(argmax + 1, alphabet)
        }
        _ => rank_from_marginals(marginals, 0.5, alphabet),
    }
}

/// Test-set metrics for a trained network.
pub fn evaluate(net: &Network, algo: Algorithm, test: &Dataset, seed: u64) -> Result<SeedMetrics> {
    let alphabet = test.alphabet();
    let mut all_marginals = Vec::with_capacity(test.len());
    let mut preds = Vec::with_capacity(test.len());
    let indices: Vec<usize> = (0..test.len()).collect();
    for chunk in indices.chunks(512) {
        let x = test.features().gather_rows(chunk);
        let logits: Tensor = net.logits(&x)?;
        for r in 0..chunk.len() {
            let row = logits.row(r);
            let p = marginals_for(algo, row)?;
            preds.push(predict(algo, row, &p, alphabet)?);
            all_marginals.push(p);
        }
    }
    let encodings: Vec<BinaryEncoding> = test
        .labels()
        .iter()
        .map(|&l| encode(l, alphabet))
        .collect();
    Ok(SeedMetrics {
        seed,
        wbce: metrics::wbce_metric(&all_marginals, &encodings)?,
        emd: metrics::emd(&all_marginals, &encodings)?,
        mae: metrics::mae_rank(&preds, test.labels())?,
        accuracy: metrics::accuracy(&preds, test.labels())?,
    })
}

/// Trains one head for one seed and returns its test metrics.
pub fn run_single(
    cfg: &ExperimentConfig,
    algo: Algorithm,
    data: &SeedData,
    seed: u64,
) -> Result<SeedMetrics> {
    let arch = ArchSpec {
        input_dim: data.train.feature_dim(),
        hidden: cfg.hidden.clone(),
        head: algo.head(),
        k: data.train.k(),
    };
    let mut net = Network::init(arch, seed)?;
    let mut train_cfg = cfg.train.clone();
    train_cfg.seed = seed;
    train(&mut net, &data.train, algo.loss(), &train_cfg)?;
    evaluate(&net, algo, &data.test, seed)
}

/// Full benchmark: all heads, all seeds, all output files.
///
/// Every (head, seed) pair runs in parallel as an independent job; each job
/// trains single-threaded, and results are collected in (seed, head) order,
/// so outputs do not depend on scheduling.
pub fn run(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)?;

    let source = match &cfg.dataset {
        DatasetConfig::Mnist { data_dir, .. } => Some(load_mnist(data_dir)?),
        DatasetConfig::Quadrants { .. } => None,
    };

    let seed_datasets: Vec<SeedData> = cfg
        .seeds
        .iter()
        .map(|&seed| seed_data(cfg, source.as_ref(), seed))
        .collect::<Result<_>>()?;
    drop(source);

    eprintln!(
        "{}: training {} jobs ({} heads x {} seeds)",
        cfg.dataset.name(),
        cfg.heads.len() * cfg.seeds.len(),
        cfg.heads.len(),
        cfg.seeds.len()
    );
    let results: Vec<Result<SeedMetrics>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .seeds
            .iter()
            .zip(&seed_datasets)
            .flat_map(|(&seed, data)| {
                cfg.heads
                    .iter()
                    .map(move |&algo| scope.spawn(move || run_single(cfg, algo, data, seed)))
                    .collect::<Vec<_>>()
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("benchmark job panicked"))
            .collect()
    });

    let mut per_head: Vec<(Algorithm, Vec<SeedMetrics>)> =
        cfg.heads.iter().map(|&h| (h, Vec::new())).collect();
    let mut results = results.into_iter();
    for &seed in &cfg.seeds {
        for (algo, seeds) in per_head.iter_mut() {
            let m = results.next().expect("one result per job")?;
            eprintln!(
                "{} {} seed {seed}: wbce {:.4} mae {:.4} emd {:.4} acc {:.4}",
                cfg.dataset.name(),
                algo.display_name(),
                m.wbce,
                m.mae,
                m.emd,
                m.accuracy
            );
            seeds.push(m);
        }
    }

    let reports: Vec<MetricsReport> = per_head
        .into_iter()
        .map(|(algo, seeds)| {
            metrics::aggregate(
                algo.display_name(),
                cfg.dataset.name(),
                cfg.dataset.k(),
                CONVENTIONS,
                seeds,
            )
        })
        .collect::<Result<_>>()?;

    let prefix = cfg.dataset.name();
    let per_seed_csv = cfg.out_dir.join(format!("{prefix}_per_seed.csv"));
    let results_csv = cfg.out_dir.join(format!("{prefix}_results.csv"));
    let results_md = cfg.out_dir.join(format!("{prefix}_results.md"));
    let manifest = cfg.out_dir.join(format!("{prefix}_manifest.txt"));

    export::write_per_seed_csv(&reports, &per_seed_csv)?;
    let rows: Vec<TableRow> = reports.iter().map(TableRow::from_report).collect();
    export::write_results_csv(&rows, &results_csv)?;
    export::write_results_markdown(&rows, &results_md)?;
    write_manifest(cfg, &manifest)?;

    Ok(RunArtifacts { reports, per_seed_csv, results_csv, results_md, manifest })
}

fn write_manifest(cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    let seeds: Vec<String> = cfg.seeds.iter().map(|s| s.to_string()).collect();
    let mut text = String::new();
    text.push_str("condor-bench manifest v1\n");
    text.push_str(&format!("library_version {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("config_hash {:016x}\n", cfg.config_hash()));
    text.push_str(&format!("dataset {}\n", cfg.dataset.name()));
    text.push_str(&format!("seeds {}\n", seeds.join(",")));
    text.push_str(&format!("conventions {CONVENTIONS}\n"));
    text.push_str("config:\n");
    for line in cfg.canonical_string().lines() {
        text.push_str(&format!("  {line}\n"));
    }
    std::fs::write(path, text)?;
    Ok(())
}
