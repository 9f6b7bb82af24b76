//! Downloads the four MNIST IDX files, verifies their checksums, and
//! decompresses them into the data directory.

use std::io::Read;
use std::path::Path;
use std::time::Duration;

use anyhow::{bail, Context};
use sha2::{Digest, Sha256};

struct Resource {
    gz_name: &'static str,
    out_name: &'static str,
    sha256: &'static str,
    raw_len: usize,
}

const RESOURCES: [Resource; 4] = [
    Resource {
        gz_name: "train-images-idx3-ubyte.gz",
        out_name: "train-images-idx3-ubyte",
        sha256: "440fcabf73cc546fa21475e81ea370265605f56be210a4024d2ca8f203523609",
        raw_len: 16 + 60_000 * 28 * 28,
    },
    Resource {
        gz_name: "train-labels-idx1-ubyte.gz",
        out_name: "train-labels-idx1-ubyte",
        sha256: "3552534a0a558bbed6aed32b30c495cca23d567ec52cac8be1a0730e8010255c",
        raw_len: 8 + 60_000,
    },
    Resource {
        gz_name: "t10k-images-idx3-ubyte.gz",
        out_name: "t10k-images-idx3-ubyte",
        sha256: "8d422c7b0a1c1c79245a5bcf07fe86e33eeafee792b84584aec276f5a2dbc4e6",
        raw_len: 16 + 10_000 * 28 * 28,
    },
    Resource {
        gz_name: "t10k-labels-idx1-ubyte.gz",
        out_name: "t10k-labels-idx1-ubyte",
        sha256: "f7ae60f92e00ec6debd23a6088c31dbd2371eca3ffa0defaefb259924204aec6",
        raw_len: 8 + 10_000,
    },
];

const MIRRORS: [&str; 2] = [
    "https://ossci-datasets.s3.amazonaws.com/mnist/",
    "https://storage.googleapis.com/cvdf-datasets/mnist/",
];

fn download(url: &str) -> anyhow::Result<Vec<u8>> {
    let mut response = ureq::get(url)
        .config()
        .timeout_global(Some(Duration::from_secs(180)))
        .build()
        .call()
        .with_context(|| format!("GET {url}"))?;
    let bytes = response
        .body_mut()
        .with_config()
        .limit(64 * 1024 * 1024)
        .read_to_vec()
        .with_context(|| format!("reading body of {url}"))?;
    Ok(bytes)
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Fetches any missing MNIST files into `dir`. Returns how many files were
/// downloaded (0 when everything was already present and well-formed).
pub fn fetch_mnist(dir: &Path) -> anyhow::Result<usize> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating data dir {}", dir.display()))?;
    let mut fetched = 0;
    for res in &RESOURCES {
        let out_path = dir.join(res.out_name);
        if out_path.is_file() {
            let len = std::fs::metadata(&out_path)?.len() as usize;
            if len == res.raw_len {
                eprintln!("{} already present", res.out_name);
                continue;
            }
            eprintln!(
                "{} has {} bytes, expected {}; refetching",
                res.out_name, len, res.raw_len
            );
        }

        let mut last_err = None;
        let mut gz = None;
        for mirror in MIRRORS {
            let url = format!("{mirror}{}", res.gz_name);
            match download(&url) {
                Ok(bytes) => {
                    gz = Some(bytes);
                    break;
                }
                Err(e) => {
                    eprintln!("  {url}: {e:#}");
                    last_err = Some(e);
                }
            }
        }
        let Some(gz) = gz else {
            bail!(
                "could not download {} from any mirror: {:#}",
                res.gz_name,
                last_err.expect("at least one error")
            );
        };

        let digest = hex_digest(&gz);
        if digest != res.sha256 {
            bail!(
                "checksum mismatch for {}: got {digest}, expected {}",
                res.gz_name,
                res.sha256
            );
        }

        let mut raw = Vec::with_capacity(res.raw_len);
        flate2::read::GzDecoder::new(gz.as_slice())
            .read_to_end(&mut raw)
            .with_context(|| format!("decompressing {}", res.gz_name))?;
        if raw.len() != res.raw_len {
            bail!(
                "{} decompressed to {} bytes, expected {}",
                res.gz_name,
                raw.len(),
                res.raw_len
            );
        }
        std::fs::write(&out_path, &raw)
            .with_context(|| format!("writing {}", out_path.display()))?;
        eprintln!("fetched {} ({} bytes)", res.out_name, raw.len());
        fetched += 1;
    }
    Ok(fetched)
}
