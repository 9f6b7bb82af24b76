//! Experiment configuration: dataset and head selection, training
//! hyperparameters, seeds, and output paths. Configs come from a flat
//! `key = value` file with `[section]` headers, overridable by CLI flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use condor::nn::{HeadKind, LossKind, TrainConfig};
use condor::{CondorError, Result};

/// The four benchmarked algorithms, in the reporting order of the tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Condor,
    CondorWbce,
    Coral,
    Categorical,
}

impl Algorithm {
    pub fn all() -> [Algorithm; 4] {
        [
            Algorithm::Condor,
            Algorithm::CondorWbce,
            Algorithm::Coral,
            Algorithm::Categorical,
        ]
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Algorithm::Condor => "CONDOR",
            Algorithm::CondorWbce => "CONDOR-WBCE",
            Algorithm::Coral => "CORAL",
            Algorithm::Categorical => "CATEGORICAL",
        }
    }

    pub fn head(self) -> HeadKind {
        self.loss().head()
    }

    pub fn loss(self) -> LossKind {
        match self {
            Algorithm::Condor => LossKind::CondorMl,
            Algorithm::CondorWbce => LossKind::CondorWbce,
            Algorithm::Coral => LossKind::CoralWbce,
            Algorithm::Categorical => LossKind::Cce,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "condor" => Ok(Algorithm::Condor),
            "condor-wbce" | "condor_wbce" => Ok(Algorithm::CondorWbce),
            "coral" => Ok(Algorithm::Coral),
            "categorical" | "cce" => Ok(Algorithm::Categorical),
            other => Err(CondorError::Config(format!(
                "unknown head {other:?}; valid heads: condor, condor-wbce, coral, categorical"
            ))),
        }
    }

    fn key(self) -> &'static str {
        match self {
            Algorithm::Condor => "condor",
            Algorithm::CondorWbce => "condor-wbce",
            Algorithm::Coral => "coral",
            Algorithm::Categorical => "categorical",
        }
    }
}

/// Which dataset a run benchmarks.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetConfig {
    /// Synthetic quadrants data, regenerated per seed.
    Quadrants { n: usize, test_fraction: f64 },
    /// MNIST IDX files from `data_dir`, subset per seed unless `full`.
    Mnist {
        data_dir: PathBuf,
        train_subset: usize,
        test_subset: usize,
        full: bool,
    },
}

impl DatasetConfig {
    pub fn name(&self) -> &'static str {
        match self {
            DatasetConfig::Quadrants { .. } => "quadrants",
            DatasetConfig::Mnist { .. } => "mnist",
        }
    }

    pub fn k(&self) -> usize {
        match self {
            DatasetConfig::Quadrants { .. } => 4,
            DatasetConfig::Mnist { .. } => 10,
        }
    }

    /// The benchmark architectures: two dense layers of ten for quadrants,
    /// one dense layer of 128 for the flattened-MNIST substitute.
    pub fn default_hidden(&self) -> Vec<usize> {
        match self {
            DatasetConfig::Quadrants { .. } => vec![10, 10],
            DatasetConfig::Mnist { .. } => vec![128],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub heads: Vec<Algorithm>,
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetConfig, out_dir: PathBuf) -> Self {
        let hidden = dataset.default_hidden();
        Self {
            dataset,
            heads: Algorithm::all().to_vec(),
            hidden,
            train: TrainConfig::default(),
            seeds: vec![0, 1, 2],
            out_dir,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.heads.is_empty() {
            return Err(CondorError::Config("no heads selected".into()));
        }
        if self.seeds.is_empty() {
            return Err(CondorError::Config("no seeds given".into()));
        }
        match &self.dataset {
            DatasetConfig::Quadrants { n, test_fraction } => {
                if *n < 4 {
                    return Err(CondorError::Config(format!("quadrants n={n} too small")));
                }
                if !(*test_fraction > 0.0 && *test_fraction < 1.0) {
                    return Err(CondorError::Config(format!(
                        "test fraction {test_fraction} outside (0, 1)"
                    )));
                }
            }
            DatasetConfig::Mnist { train_subset, test_subset, full, .. } => {
                if !full && (*train_subset == 0 || *test_subset == 0) {
                    return Err(CondorError::Config("empty MNIST subset".into()));
                }
            }
        }
        Ok(())
    }

    /// Canonical one-line-per-field rendering; hashed into run manifests so
    /// identical configs are recognizable across reruns.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        match &self.dataset {
            DatasetConfig::Quadrants { n, test_fraction } => {
                s.push_str(&format!("dataset=quadrants n={n} test_fraction={test_fraction}\n"));
            }
            DatasetConfig::Mnist { data_dir, train_subset, test_subset, full } => {
                s.push_str(&format!(
                    "dataset=mnist dir={} train_subset={train_subset} test_subset={test_subset} full={full}\n",
                    data_dir.display()
                ));
            }
        }
        let heads: Vec<&str> = self.heads.iter().map(|h| h.key()).collect();
        s.push_str(&format!("heads={}\n", heads.join(",")));
        let hidden: Vec<String> = self.hidden.iter().map(|h| h.to_string()).collect();
        s.push_str(&format!("hidden={}\n", hidden.join(",")));
        let t = &self.train;
        s.push_str(&format!(
            "train max_epochs={} patience={} validation_split={} lr={} beta1={} beta2={} epsilon={} batch_size={}\n",
            t.max_epochs, t.patience, t.validation_split, t.learning_rate, t.beta1, t.beta2,
            t.epsilon, t.batch_size
        ));
        let seeds: Vec<String> = self.seeds.iter().map(|x| x.to_string()).collect();
        s.push_str(&format!("seeds={}\n", seeds.join(",")));
        s
    }

    pub fn config_hash(&self) -> u64 {
        condor::data::fnv1a(self.canonical_string().as_bytes())
    }
}

/// Parsed `key = value` file with `[section]` headers. Keys are stored as
/// `section.key`; lines starting with `#` are comments.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CondorError::Config(format!(
                "line {}: expected `key = value`, got {line:?}",
                lineno + 1
            )));
        };
        let full_key = if section.is_empty() {
            key.trim().to_string()
        } else {
            format!("{section}.{}", key.trim())
        };
        out.insert(full_key, value.trim().to_string());
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(v) => v.parse::<T>().map(Some).map_err(|e| {
            CondorError::Config(format!("config key {key}={v:?}: {e}"))
        }),
    }
}

pub fn parse_seed_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| CondorError::Config(format!("bad seed {t:?}: {e}")))
        })
        .collect()
}

pub fn parse_head_list(s: &str) -> Result<Vec<Algorithm>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Algorithm::all().to_vec());
    }
    s.split(',').map(|t| Algorithm::parse(t.trim())).collect()
}

/// Builds a config from a file, keyed by the documented set:
///
/// ```text
/// [dataset]  name, n, test_fraction, data_dir, train_subset, test_subset, full
/// [run]      heads, seeds, out
/// [train]    max_epochs, patience, validation_split, learning_rate, batch_size
/// ```
pub fn config_from_file(path: &Path, data_dir_default: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let map = parse_config_file(&text)?;

    let name = map
        .get("dataset.name")
        .cloned()
        .unwrap_or_else(|| "quadrants".to_string());
    let dataset = match name.as_str() {
        "quadrants" => DatasetConfig::Quadrants {
            n: parse_num(&map, "dataset.n")?.unwrap_or(1000),
            test_fraction: parse_num(&map, "dataset.test_fraction")?.unwrap_or(0.1),
        },
        "mnist" => DatasetConfig::Mnist {
            data_dir: map
                .get("dataset.data_dir")
                .map(PathBuf::from)
                .unwrap_or_else(|| data_dir_default.to_path_buf()),
            train_subset: parse_num(&map, "dataset.train_subset")?.unwrap_or(10_000),
            test_subset: parse_num(&map, "dataset.test_subset")?.unwrap_or(2_000),
            full: map.get("dataset.full").map(|v| v == "true").unwrap_or(false),
        },
        other => {
            return Err(CondorError::Config(format!(
                "unknown dataset {other:?}; valid datasets: quadrants, mnist"
            )))
        }
    };

    let out_dir = map
        .get("run.out")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("results"));
    let mut cfg = ExperimentConfig::new(dataset, out_dir);
    if let Some(heads) = map.get("run.heads") {
        cfg.heads = parse_head_list(heads)?;
    }
    if let Some(seeds) = map.get("run.seeds") {
        cfg.seeds = parse_seed_list(seeds)?;
    }
    if let Some(v) = parse_num(&map, "train.max_epochs")? {
        cfg.train.max_epochs = v;
    }
    if let Some(v) = parse_num(&map, "train.patience")? {
        cfg.train.patience = v;
    }
    if let Some(v) = parse_num(&map, "train.validation_split")? {
        cfg.train.validation_split = v;
    }
    if let Some(v) = parse_num(&map, "train.learning_rate")? {
        cfg.train.learning_rate = v;
    }
    if let Some(v) = parse_num(&map, "train.batch_size")? {
        cfg.train.batch_size = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn head_parse_and_order() {
        assert_eq!(Algorithm::parse("CONDOR-WBCE").unwrap(), Algorithm::CondorWbce);
        assert!(Algorithm::parse("ordinalnet").is_err());
        let names: Vec<&str> = Algorithm::all().iter().map(|a| a.display_name()).collect();
        assert_eq!(names, ["CONDOR", "CONDOR-WBCE", "CORAL", "CATEGORICAL"]);
    }

    #[test]
    fn config_file_round_trip() {
        let text = "\
# comment
[dataset]
name = quadrants
n = 500
test_fraction = 0.2

[run]
heads = condor,coral
seeds = 5,6

[train]
max_epochs = 20
patience = 3
";
        let map = parse_config_file(text).unwrap();
        assert_eq!(map.get("dataset.n").unwrap(), "500");

        let dir = std::env::temp_dir().join(format!("condor-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("exp.cfg");
        std::fs::write(&path, text).unwrap();
        let cfg = config_from_file(&path, Path::new("data")).unwrap();
        assert_eq!(cfg.seeds, vec![5, 6]);
        assert_eq!(cfg.heads, vec![Algorithm::Condor, Algorithm::Coral]);
        assert_eq!(cfg.train.max_epochs, 20);
        match cfg.dataset {
            DatasetConfig::Quadrants { n, test_fraction } => {
                assert_eq!(n, 500);
                assert!((test_fraction - 0.2).abs() < 1e-12);
            }
            _ => panic!("wrong dataset"),
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn bad_lines_are_rejected() {
        assert!(parse_config_file("just words\n").is_err());
        assert!(parse_head_list("condor,nope").is_err());
        assert!(parse_seed_list("1,x").is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::new(
            DatasetConfig::Quadrants { n: 1000, test_fraction: 0.1 },
            PathBuf::from("out"),
        );
        let mut b = a.clone();
        assert_eq!(a.config_hash(), b.config_hash());
        b.seeds = vec![0];
        assert_ne!(a.config_hash(), b.config_hash());
    }
}
