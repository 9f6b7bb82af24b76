//! End-to-end checks of the `condor-bench` binary.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_condor-bench"))
}

fn run_ok(args: &[&str]) -> (String, String) {
    let out = bin().args(args).output().expect("spawn condor-bench");
    assert!(
        out.status.success(),
        "command {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn unknown_head_lists_valid_heads() {
    let out = bin()
        .args(["run", "--dataset", "quadrants", "--head", "ordinalnet"])
        .output()
        .expect("spawn");
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("condor, condor-wbce, coral, categorical"),
        "stderr should list valid heads: {stderr}"
    );
}

#[test]
fn unknown_suite_is_rejected() {
    let out = bin().args(["verify", "nonsense"]).output().expect("spawn");
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("valid suites"), "{stderr}");
}

#[test]
fn verify_subcommand_reports_pass() {
    let (stdout, _) = run_ok(&["verify", "reconstruction"]);
    assert!(stdout.contains("reconstruction:"), "{stdout}");
    assert!(stdout.contains("PASS"), "{stdout}");
}

#[test]
fn small_run_writes_tables_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let args = |out: &Path| {
        vec![
            "run".to_string(),
            "--dataset".into(),
            "quadrants".into(),
            "--n".into(),
            "300".into(),
            "--seeds".into(),
            "0,1".into(),
            "--epochs".into(),
            "15".into(),
            "--patience".into(),
            "10".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    let (stdout, _) = run_ok(&args(&out_a).iter().map(String::as_str).collect::<Vec<_>>());
    run_ok(&args(&out_b).iter().map(String::as_str).collect::<Vec<_>>());

    // Markdown table rows arrive in the fixed reporting order.
    let md = std::fs::read_to_string(out_a.join("quadrants_results.md")).unwrap();
    let pos = |name: &str| md.find(name).unwrap_or_else(|| panic!("{name} in {md}"));
    assert!(pos("| CONDOR |") < pos("| CONDOR-WBCE |"));
    assert!(pos("| CONDOR-WBCE |") < pos("| CORAL |"));
    assert!(pos("| CORAL |") < pos("| CATEGORICAL |"));
    assert!(stdout.contains("| ALGORITHM | WBCE | MAE | EMD | ACCURACY |"));

    for name in [
        "quadrants_per_seed.csv",
        "quadrants_results.csv",
        "quadrants_results.md",
        "quadrants_manifest.txt",
    ] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn export_round_trips_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results");
    run_ok(&[
        "run",
        "--dataset",
        "quadrants",
        "--n",
        "200",
        "--head",
        "condor",
        "--seeds",
        "0",
        "--epochs",
        "5",
        "--patience",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    let results = out.join("quadrants_results.csv");

    let csv_copy = dir.path().join("copy.csv");
    run_ok(&[
        "export",
        "--input",
        results.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        csv_copy.to_str().unwrap(),
    ]);
    assert_eq!(
        std::fs::read(&results).unwrap(),
        std::fs::read(&csv_copy).unwrap(),
        "csv export must round-trip byte-identically"
    );

    let md = dir.path().join("table.md");
    run_ok(&[
        "export",
        "--input",
        results.to_str().unwrap(),
        "--format",
        "markdown",
        "--out",
        md.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&md).unwrap();
    assert!(text.starts_with("| ALGORITHM | WBCE | MAE | EMD | ACCURACY |"));
    assert!(text.contains("| CONDOR |"));
}

#[test]
fn config_file_drives_run_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.cfg");
    std::fs::write(
        &cfg_path,
        "[dataset]\nname = quadrants\nn = 250\n\n[run]\nheads = condor\nseeds = 3\n\n[train]\nmax_epochs = 8\npatience = 4\n",
    )
    .unwrap();
    let out = dir.path().join("results");
    let (_, stderr) = run_ok(&[
        "run",
        "--config",
        cfg_path.to_str().unwrap(),
        "--seeds",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    // Flag override wins over the config file's seed list.
    assert!(stderr.contains("seed 4"), "{stderr}");
    assert!(!stderr.contains("seed 3"), "{stderr}");
    let manifest = std::fs::read_to_string(out.join("quadrants_manifest.txt")).unwrap();
    assert!(manifest.contains("seeds 4"));
    assert!(manifest.contains("config_hash"));
}
