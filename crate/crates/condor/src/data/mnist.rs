//! Big-endian IDX parsing for the MNIST image/label files.
//!
//! Digits 0..=9 become rank indices 1..=10 and pixels are scaled to [0, 1].

use std::path::Path;

use super::Dataset;
use crate::encoding::{LabelAlphabet, RankLabel};
use crate::error::{CondorError, Result};
use crate::nn::Tensor;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

fn read_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(CondorError::Format {
            offset: bytes.len() as u64,
            msg: format!("truncated while reading {what} (need {end} bytes)"),
        });
    }
    Ok(u32::from_be_bytes([
        bytes[offset],
        bytes[offset + 1],
        bytes[offset + 2],
        bytes[offset + 3],
    ]))
}

/// Parses an IDX image file: `(count, rows, cols, pixels in [0,1])`.
pub fn parse_images(bytes: &[u8]) -> Result<(usize, usize, usize, Vec<f64>)> {
    let magic = read_u32(bytes, 0, "image magic")?;
    if magic != IMAGE_MAGIC {
        return Err(CondorError::Format {
            offset: 0,
            msg: format!("bad image magic {magic:#010x}, expected {IMAGE_MAGIC:#010x}"),
        });
    }
    let n = read_u32(bytes, 4, "image count")? as usize;
    let rows = read_u32(bytes, 8, "row count")? as usize;
    let cols = read_u32(bytes, 12, "column count")? as usize;
    let expected = 16 + n * rows * cols;
    if bytes.len() != expected {
        return Err(CondorError::Format {
            offset: bytes.len().min(expected) as u64,
            msg: format!(
                "image payload is {} bytes, header implies {expected}",
                bytes.len()
            ),
        });
    }
    let pixels = bytes[16..].iter().map(|&b| f64::from(b) / 255.0).collect();
    Ok((n, rows, cols, pixels))
}

/// Parses an IDX label file into raw digits.
pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = read_u32(bytes, 0, "label magic")?;
    if magic != LABEL_MAGIC {
        return Err(CondorError::Format {
            offset: 0,
            msg: format!("bad label magic {magic:#010x}, expected {LABEL_MAGIC:#010x}"),
        });
    }
    let n = read_u32(bytes, 4, "label count")? as usize;
    let expected = 8 + n;
    if bytes.len() != expected {
        return Err(CondorError::Format {
            offset: bytes.len().min(expected) as u64,
            msg: format!(
                "label payload is {} bytes, header implies {expected}",
                bytes.len()
            ),
        });
    }
    for (i, &d) in bytes[8..].iter().enumerate() {
        if d > 9 {
            return Err(CondorError::Format {
                offset: (8 + i) as u64,
                msg: format!("label value {d} is not a digit"),
            });
        }
    }
    Ok(bytes[8..].to_vec())
}

/// Loads an image/label file pair into a flattened dataset with K=10.
pub fn load(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let image_bytes = std::fs::read(images_path)?;
    let label_bytes = std::fs::read(labels_path)?;
    let (n, rows, cols, pixels) = parse_images(&image_bytes)?;
    let digits = parse_labels(&label_bytes)?;
    if digits.len() != n {
        return Err(CondorError::Domain(format!(
            "{n} images but {} labels",
            digits.len()
        )));
    }
    let alphabet = LabelAlphabet::numeric(10)?;
    let labels = digits
        .iter()
        .map(|&d| RankLabel::new(d as usize + 1, &alphabet))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(
        Tensor::new(vec![n, rows * cols], pixels)?,
        labels,
        alphabet,
        format!(
            "mnist({} fnv1a={:016x}, {} fnv1a={:016x})",
            images_path.display(),
            super::fnv1a(&image_bytes),
            labels_path.display(),
            super::fnv1a(&label_bytes),
        ),
    )
}
