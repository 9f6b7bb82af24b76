use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use condor_bench::config::{
    config_from_file, parse_head_list, parse_seed_list, DatasetConfig, ExperimentConfig,
};
use condor_bench::verify::Suite;
use condor_bench::{data_dir, export, fetch, run, verify};

#[derive(Parser)]
#[command(
    name = "condor-bench",
    version,
    about = "Ordinal regression benchmarks: rank-consistent conditional heads vs CORAL and softmax baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetArg {
    Quadrants,
    Mnist,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Csv,
    Markdown,
}

#[derive(Subcommand)]
enum Command {
    /// Train the selected heads over the seed list and write result tables.
    Run {
        /// Experiment config file (key = value with [sections]); flags override.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Dataset to benchmark.
        #[arg(long, value_enum)]
        dataset: Option<DatasetArg>,
        /// Comma-separated heads: condor,condor-wbce,coral,categorical or `all`.
        #[arg(long)]
        head: Option<String>,
        /// Comma-separated seeds, e.g. `0,1,2`.
        #[arg(long)]
        seeds: Option<String>,
        /// Maximum training epochs.
        #[arg(long)]
        epochs: Option<usize>,
        /// Early-stopping patience in epochs.
        #[arg(long)]
        patience: Option<usize>,
        /// Mini-batch size.
        #[arg(long)]
        batch_size: Option<usize>,
        /// Output directory for CSV/markdown/manifest files.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sample count for the synthetic dataset.
        #[arg(long)]
        n: Option<usize>,
        /// Directory holding the MNIST IDX files (or $CONDOR_DATA_DIR, or ./data).
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Use the full 60k/10k MNIST split instead of the desk-scale subset.
        #[arg(long)]
        mnist_full: bool,
    },
    /// Run the verification property suites.
    Verify {
        /// consistency | likelihood | gradcheck | coral-witness |
        /// reconstruction | expressiveness | all (default).
        suite: Option<String>,
    },
    /// Re-emit an aggregated results CSV as CSV or markdown.
    Export {
        /// Input results CSV (as written by `run`).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
        /// Output file path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Download and verify the MNIST IDX files.
    FetchMnist {
        /// Target directory (or $CONDOR_DATA_DIR, or ./data).
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

#[allow(clippy::too_many_arguments)]
fn build_run_config(
    config: Option<PathBuf>,
    dataset: Option<DatasetArg>,
    head: Option<String>,
    seeds: Option<String>,
    epochs: Option<usize>,
    patience: Option<usize>,
    batch_size: Option<usize>,
    out: Option<PathBuf>,
    n: Option<usize>,
    data_dir_flag: Option<PathBuf>,
    mnist_full: bool,
) -> anyhow::Result<ExperimentConfig> {
    let data = data_dir(data_dir_flag);
    let mut cfg = match config {
        Some(path) => config_from_file(&path, &data)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => {
            let dataset = match dataset.unwrap_or(DatasetArg::Quadrants) {
                DatasetArg::Quadrants => DatasetConfig::Quadrants {
                    n: 1000,
                    test_fraction: 0.1,
                },
                DatasetArg::Mnist => DatasetConfig::Mnist {
                    data_dir: data.clone(),
                    train_subset: 10_000,
                    test_subset: 2_000,
                    full: false,
                },
            };
            let hidden = dataset.default_hidden();
            let mut c = ExperimentConfig::new(dataset, PathBuf::from("results"));
            c.hidden = hidden;
            c
        }
    };

    // Flag overrides.
    if let Some(d) = dataset {
        let wanted = match d {
            DatasetArg::Quadrants => "quadrants",
            DatasetArg::Mnist => "mnist",
        };
        if cfg.dataset.name() != wanted {
            bail!(
                "--dataset {wanted} conflicts with config dataset {}",
                cfg.dataset.name()
            );
        }
    }
    if let Some(h) = head {
        cfg.heads = parse_head_list(&h)?;
    }
    if let Some(s) = seeds {
        cfg.seeds = parse_seed_list(&s)?;
    }
    if let Some(e) = epochs {
        cfg.train.max_epochs = e;
    }
    if let Some(p) = patience {
        cfg.train.patience = p;
    }
    if let Some(b) = batch_size {
        cfg.train.batch_size = b;
    }
    if let Some(o) = out {
        cfg.out_dir = o;
    }
    if let Some(n) = n {
        if let DatasetConfig::Quadrants { n: qn, .. } = &mut cfg.dataset {
            *qn = n;
        }
    }
    if mnist_full {
        if let DatasetConfig::Mnist { full, .. } = &mut cfg.dataset {
            *full = true;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            dataset,
            head,
            seeds,
            epochs,
            patience,
            batch_size,
            out,
            n,
            data_dir,
            mnist_full,
        } => {
            let cfg = build_run_config(
                config, dataset, head, seeds, epochs, patience, batch_size, out, n, data_dir,
                mnist_full,
            )?;
            let artifacts = run::run(&cfg)?;
            println!();
            println!("{}", std::fs::read_to_string(&artifacts.results_md)?);
            println!("per-seed: {}", artifacts.per_seed_csv.display());
            println!("results:  {}", artifacts.results_csv.display());
            println!("table:    {}", artifacts.results_md.display());
            println!("manifest: {}", artifacts.manifest.display());
            Ok(())
        }
        Command::Verify { suite } => {
            let suites: Vec<Suite> = match suite.as_deref() {
                None | Some("all") => Suite::all().to_vec(),
                Some(name) => match Suite::parse(name) {
                    Some(s) => vec![s],
                    None => bail!(
                        "unknown suite {name:?}; valid suites: {}, all",
                        Suite::all().map(|s| s.name()).join(", ")
                    ),
                },
            };
            let mut all_passed = true;
            for suite in suites {
                let outcome = verify::run_suite(suite)?;
                println!("{}", outcome.summary_line());
                println!("    {}", outcome.detail);
                all_passed &= outcome.passed();
            }
            if !all_passed {
                bail!("one or more verification suites failed");
            }
            Ok(())
        }
        Command::Export { input, format, out } => {
            let rows = export::read_results_csv(&input)?;
            match format {
                ExportFormat::Csv => export::write_results_csv(&rows, &out)?,
                ExportFormat::Markdown => export::write_results_markdown(&rows, &out)?,
            }
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::FetchMnist { dir } => {
            let dir = data_dir(dir);
            let fetched = fetch::fetch_mnist(&dir)?;
            println!(
                "MNIST ready under {} ({fetched} file(s) downloaded)",
                dir.display()
            );
            Ok(())
        }
    }
}
