//! Synthetic quadrants dataset: 2D standard-normal features labeled by the
//! quadrant of the plane, counterclockwise from (+,+).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::encoding::{LabelAlphabet, RankLabel};
use crate::error::{CondorError, Result};
use crate::nn::Tensor;

/// Rank for a point: (+,+) -> 1, (-,+) -> 2, (-,-) -> 3, (+,-) -> 4.
/// Coordinates exactly at zero count as positive.
pub fn quadrant_rank(x: f64, y: f64) -> usize {
    match (x >= 0.0, y >= 0.0) {
        (true, true) => 1,
        (false, true) => 2,
        (false, false) => 3,
        (true, false) => 4,
    }
}

/// Draws one standard normal pair via Box-Muller.
fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    use rand::Rng;
    let u1: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

pub fn generate(n: usize, seed: u64) -> Result<Dataset> {
    if n < 4 {
        return Err(CondorError::Domain(format!(
            "quadrants dataset needs n >= 4, got {n}"
        )));
    }
    let alphabet = LabelAlphabet::numeric(4)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, y) = normal_pair(&mut rng);
        data.push(x);
        data.push(y);
        labels.push(RankLabel::new(quadrant_rank(x, y), &alphabet)?);
    }
    Dataset::new(
        Tensor::new(vec![n, 2], data)?,
        labels,
        alphabet,
        format!("quadrants(n={n}, seed={seed})"),
    )
}
