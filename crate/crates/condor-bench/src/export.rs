//! Result tables: per-seed CSV, aggregated CSV (numeric, re-importable), and
//! the markdown table mirroring the benchmark's row and column layout.

use std::path::Path;

use condor::metrics::{Aggregate, MetricsReport};
use condor::{CondorError, Result};

/// One aggregated table row; what the CSV/markdown writers operate on.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub algorithm: String,
    pub wbce: Aggregate,
    pub mae: Aggregate,
    pub emd: Aggregate,
    pub accuracy: Aggregate,
}

impl TableRow {
    pub fn from_report(r: &MetricsReport) -> Self {
        Self {
            algorithm: r.head.clone(),
            wbce: r.wbce,
            mae: r.mae,
            emd: r.emd,
            accuracy: r.accuracy,
        }
    }
}

const RESULTS_HEADER: &str =
    "ALGORITHM,WBCE_MEAN,WBCE_STD,MAE_MEAN,MAE_STD,EMD_MEAN,EMD_STD,ACCURACY_MEAN,ACCURACY_STD";

/// Aggregated CSV with full-precision values; round-trips through
/// [`read_results_csv`] exactly.
pub fn write_results_csv(rows: &[TableRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(CondorError::Domain("no rows to export".into()));
    }
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}\n",
            r.algorithm,
            r.wbce.mean,
            r.wbce.std,
            r.mae.mean,
            r.mae.std,
            r.emd.mean,
            r.emd.std,
            r.accuracy.mean,
            r.accuracy.std,
        ));
    }
    write_with_context(path, &out)
}

/// Reads a file produced by [`write_results_csv`].
pub fn read_results_csv(path: &Path) -> Result<Vec<TableRow>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CondorError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == RESULTS_HEADER => {}
        other => {
            return Err(CondorError::Format {
                offset: 0,
                msg: format!("unexpected results header {other:?}"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(CondorError::Format {
                offset: 0,
                msg: format!("row {}: expected 9 fields, got {}", i + 2, fields.len()),
            });
        }
        let num = |j: usize| -> Result<f64> {
            fields[j].parse().map_err(|e| CondorError::Format {
                offset: 0,
                msg: format!("row {}: bad number {:?}: {e}", i + 2, fields[j]),
            })
        };
        rows.push(TableRow {
            algorithm: fields[0].to_string(),
            wbce: Aggregate { mean: num(1)?, std: num(2)? },
            mae: Aggregate { mean: num(3)?, std: num(4)? },
            emd: Aggregate { mean: num(5)?, std: num(6)? },
            accuracy: Aggregate { mean: num(7)?, std: num(8)? },
        });
    }
    if rows.is_empty() {
        return Err(CondorError::Domain("results file has no rows".into()));
    }
    Ok(rows)
}

/// Markdown table in the benchmark layout: one row per algorithm, columns
/// WBCE / MAE / EMD / ACCURACY as `mean ± std`.
pub fn write_results_markdown(rows: &[TableRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(CondorError::Domain("no rows to export".into()));
    }
    let cell = |a: &Aggregate| format!("{:.4} ± {:.4}", a.mean, a.std);
    let mut out = String::new();
    out.push_str("| ALGORITHM | WBCE | MAE | EMD | ACCURACY |\n");
    out.push_str("|---|---|---|---|---|\n");
    for r in rows {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            r.algorithm,
            cell(&r.wbce),
            cell(&r.mae),
            cell(&r.emd),
            cell(&r.accuracy),
        ));
    }
    write_with_context(path, &out)
}

/// Per-seed CSV: one row per (algorithm, seed) with full-precision metrics.
pub fn write_per_seed_csv(reports: &[MetricsReport], path: &Path) -> Result<()> {
    if reports.is_empty() {
        return Err(CondorError::Domain("no reports to export".into()));
    }
    let mut out = String::from("ALGORITHM,SEED,WBCE,MAE,EMD,ACCURACY\n");
    for r in reports {
        for m in &r.per_seed {
            out.push_str(&format!(
                "{},{},{:?},{:?},{:?},{:?}\n",
                r.head, m.seed, m.wbce, m.mae, m.emd, m.accuracy
            ));
        }
    }
    write_with_context(path, &out)
}

fn write_with_context(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| CondorError::Config(format!("cannot write {}: {e}", path.display())))
}
