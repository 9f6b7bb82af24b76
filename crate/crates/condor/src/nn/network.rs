//! Layered dense network with one of three ordinal output heads.
//!
//! The backbone is a stack of ReLU dense layers. The head maps the last
//! hidden representation to per-example logits: a dense layer with `K-1`
//! outputs (conditional logits) for the CONDOR head, a shared scalar score
//! broadcast over `K-1` biases for CORAL, or a dense layer with `K` outputs
//! for the categorical softmax. Parameters flatten to a single vector in a
//! fixed order so the optimizer and the finite-difference oracle see the
//! same layout.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::layer::{Activation, DenseLayer};
use super::tensor::Tensor;
use crate::coral::CoralHead;
use crate::error::{CondorError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadKind {
    Condor,
    Coral,
    Categorical,
}

impl HeadKind {
    pub fn logit_width(self, k: usize) -> usize {
        match self {
            HeadKind::Condor | HeadKind::Coral => k - 1,
            HeadKind::Categorical => k,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HeadKind::Condor => "condor",
            HeadKind::Coral => "coral",
            HeadKind::Categorical => "categorical",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "condor" => Ok(HeadKind::Condor),
            "coral" => Ok(HeadKind::Coral),
            "categorical" => Ok(HeadKind::Categorical),
            other => Err(CondorError::Config(format!(
                "unknown head {other:?}; valid heads: condor, coral, categorical"
            ))),
        }
    }
}

impl fmt::Display for HeadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Shape of a network: input width, ReLU hidden widths, head kind, and the
/// number of ranks `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub head: HeadKind,
    pub k: usize,
}

impl ArchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(CondorError::Config("input_dim must be positive".into()));
        }
        if self.k < 2 {
            return Err(CondorError::Config(format!("K must be >= 2, got {}", self.k)));
        }
        if self.hidden.contains(&0) {
            return Err(CondorError::Config("hidden widths must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum HeadLayer {
    Dense(DenseLayer),
    Coral(CoralHead),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    arch: ArchSpec,
    hidden: Vec<DenseLayer>,
    head: HeadLayer,
}

/// Cached activations from a forward pass, consumed by `backward`.
pub struct ForwardPass {
    /// Input to each hidden layer (element 0 is the batch itself).
    inputs: Vec<Tensor>,
    /// Pre-activation of each hidden layer.
    pres: Vec<Tensor>,
    /// Per-example CORAL scores, when the head is CORAL.
    scores: Option<Vec<f64>>,
    /// Head output, one row of logits per example.
    pub logits: Tensor,
}

impl ForwardPass {
    /// Per-example shared scores `a(x)` when the head is CORAL.
    pub fn coral_scores(&self) -> Option<&[f64]> {
        self.scores.as_deref()
    }
}

fn glorot(rng: &mut ChaCha8Rng, in_dim: usize, out_dim: usize) -> Tensor {
    let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
    let data = (0..in_dim * out_dim)
        .map(|_| rng.random_range(-limit..limit))
        .collect();
    Tensor::new(vec![in_dim, out_dim], data).expect("shape matches data")
}

impl Network {
    /// Deterministic Glorot-uniform initialization: same seed, same weights.
    /// Biases start at zero, including CORAL's threshold biases.
    pub fn init(arch: ArchSpec, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hidden = Vec::with_capacity(arch.hidden.len());
        let mut prev = arch.input_dim;
        for &width in &arch.hidden {
            let weights = glorot(&mut rng, prev, width);
            hidden.push(DenseLayer::new(weights, vec![0.0; width], Activation::Relu));
            prev = width;
        }
        let head = match arch.head {
            HeadKind::Condor => HeadLayer::Dense(DenseLayer::new(
                glorot(&mut rng, prev, arch.k - 1),
                vec![0.0; arch.k - 1],
                Activation::Identity,
            )),
            HeadKind::Categorical => HeadLayer::Dense(DenseLayer::new(
                glorot(&mut rng, prev, arch.k),
                vec![0.0; arch.k],
                Activation::Identity,
            )),
            HeadKind::Coral => {
                let w = glorot(&mut rng, prev, 1);
                HeadLayer::Coral(CoralHead::new(w.data().to_vec(), vec![0.0; arch.k - 1])?)
            }
        };
        Ok(Self { arch, hidden, head })
    }

    pub fn arch(&self) -> &ArchSpec {
        &self.arch
    }

    pub fn k(&self) -> usize {
        self.arch.k
    }

    pub fn head_kind(&self) -> HeadKind {
        self.arch.head
    }

    /// CORAL threshold biases, when the head is CORAL.
    pub fn coral_biases(&self) -> Option<&[f64]> {
        match &self.head {
            HeadLayer::Coral(h) => Some(&h.biases),
            HeadLayer::Dense(_) => None,
        }
    }

    pub fn param_count(&self) -> usize {
        let head = match &self.head {
            HeadLayer::Dense(d) => d.param_count(),
            HeadLayer::Coral(h) => h.weights.len() + h.biases.len(),
        };
        self.hidden.iter().map(DenseLayer::param_count).sum::<usize>() + head
    }

    /// Flattens all parameters: per hidden layer weights then bias, then the
    /// head (dense weights then bias, or CORAL weights then biases).
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.hidden {
            out.extend_from_slice(layer.weights.data());
            out.extend_from_slice(&layer.bias);
        }
        match &self.head {
            HeadLayer::Dense(d) => {
                out.extend_from_slice(d.weights.data());
                out.extend_from_slice(&d.bias);
            }
            HeadLayer::Coral(h) => {
                out.extend_from_slice(&h.weights);
                out.extend_from_slice(&h.biases);
            }
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(CondorError::Config(format!(
                "{} parameters given, network has {}",
                params.len(),
                self.param_count()
            )));
        }
        let mut at = 0;
        let mut take = |n: usize| {
            let s = &params[at..at + n];
            at += n;
            s
        };
        for layer in &mut self.hidden {
            let wlen = layer.weights.data().len();
            layer.weights.data_mut().copy_from_slice(take(wlen));
            let blen = layer.bias.len();
            layer.bias.copy_from_slice(take(blen));
        }
        match &mut self.head {
            HeadLayer::Dense(d) => {
                let wlen = d.weights.data().len();
                d.weights.data_mut().copy_from_slice(take(wlen));
                let blen = d.bias.len();
                d.bias.copy_from_slice(take(blen));
            }
            HeadLayer::Coral(h) => {
                let wlen = h.weights.len();
                h.weights.copy_from_slice(take(wlen));
                let blen = h.biases.len();
                h.biases.copy_from_slice(take(blen));
            }
        }
        Ok(())
    }

    /// Runs the batch through the backbone and head, returning logits plus
    /// the caches backward needs. Fails on non-finite intermediate values.
    pub fn forward(&self, batch: &Tensor) -> Result<ForwardPass> {
        if batch.cols() != self.arch.input_dim {
            return Err(CondorError::Config(format!(
                "batch width {} does not match input_dim {}",
                batch.cols(),
                self.arch.input_dim
            )));
        }
        let n = batch.rows();
        let mut inputs = Vec::with_capacity(self.hidden.len() + 1);
        let mut pres = Vec::with_capacity(self.hidden.len());
        inputs.push(batch.clone());
        for (i, layer) in self.hidden.iter().enumerate() {
            let (pre, post) = layer.forward(inputs.last().expect("nonempty"));
            if !post.all_finite() {
                return Err(CondorError::Numeric(format!(
                    "hidden layer {i} produced non-finite activations"
                )));
            }
            pres.push(pre);
            inputs.push(post);
        }
        let last = inputs.last().expect("nonempty");
        let (scores, logits) = match &self.head {
            HeadLayer::Dense(d) => {
                let (_, post) = d.forward(last);
                (None, post)
            }
            HeadLayer::Coral(h) => {
                let width = self.arch.k - 1;
                let mut scores = Vec::with_capacity(n);
                let mut logits = Tensor::zeros(&[n, width]);
                for r in 0..n {
                    let a = h.score(last.row(r));
                    scores.push(a);
                    for (out, &b) in logits.row_mut(r).iter_mut().zip(&h.biases) {
                        *out = a + b;
                    }
                }
                (Some(scores), logits)
            }
        };
        if !logits.all_finite() {
            return Err(CondorError::Numeric(
                "head produced non-finite logits".into(),
            ));
        }
        Ok(ForwardPass { inputs, pres, scores, logits })
    }

    /// Convenience forward that returns only the logits.
    pub fn logits(&self, batch: &Tensor) -> Result<Tensor> {
        Ok(self.forward(batch)?.logits)
    }

    /// Smallest `|pre-activation|` over all hidden units and examples.
    ///
    /// Finite-difference gradient probes are only valid when no ReLU input
    /// sits within the probe step of its kink; callers use this to reject
    /// such instances. Networks without hidden layers report infinity.
    pub fn min_abs_hidden_preactivation(&self, batch: &Tensor) -> Result<f64> {
        let pass = self.forward(batch)?;
        Ok(pass
            .pres
            .iter()
            .flat_map(|t| t.data().iter())
            .fold(f64::INFINITY, |acc, &v| acc.min(v.abs())))
    }

    /// Backpropagates a gradient in the logits down to every parameter.
    /// Returns the flat gradient vector aligned with [`Network::params`].
    pub fn backward(&self, pass: &ForwardPass, d_logits: &Tensor) -> Vec<f64> {
        let last_input = pass.inputs.last().expect("nonempty");
        let n = last_input.rows();

        // Head backward: parameter grads plus gradient in the last hidden output.
        let (head_w_grad, head_b_grad, mut d_hidden) = match &self.head {
            HeadLayer::Dense(d) => {
                let grads = d.backward(last_input, &pass.logits, d_logits);
                (grads.d_weights.data().to_vec(), grads.d_bias, grads.d_input)
            }
            HeadLayer::Coral(h) => {
                let in_dim = h.weights.len();
                let mut d_w = vec![0.0; in_dim];
                let mut d_b = vec![0.0; h.biases.len()];
                let mut d_h = Tensor::zeros(&[n, in_dim]);
                for r in 0..n {
                    let drow = d_logits.row(r);
                    let d_score: f64 = drow.iter().sum();
                    for (db, &d) in d_b.iter_mut().zip(drow) {
                        *db += d;
                    }
                    let hrow = last_input.row(r);
                    let out = d_h.row_mut(r);
                    for k in 0..in_dim {
                        d_w[k] += d_score * hrow[k];
                        out[k] = d_score * h.weights[k];
                    }
                }
                (d_w, d_b, d_h)
            }
        };

        // Backbone backward, collecting grads top-down then emitting bottom-up.
        let mut per_layer: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(self.hidden.len());
        for i in (0..self.hidden.len()).rev() {
            let grads = self.hidden[i].backward(&pass.inputs[i], &pass.pres[i], &d_hidden);
            per_layer.push((grads.d_weights.data().to_vec(), grads.d_bias));
            d_hidden = grads.d_input;
        }
        per_layer.reverse();

        let mut flat = Vec::with_capacity(self.param_count());
        for (w, b) in per_layer {
            flat.extend_from_slice(&w);
            flat.extend_from_slice(&b);
        }
        flat.extend_from_slice(&head_w_grad);
        flat.extend_from_slice(&head_b_grad);
        flat
    }

    /// Writes a plain-text checkpoint: architecture, config hash, and every
    /// parameter in shortest round-trip decimal form.
    pub fn save(&self, path: &Path, config_hash: u64) -> Result<()> {
        let mut out = String::new();
        out.push_str("condor-model v1\n");
        out.push_str(&format!("head {}\n", self.arch.head));
        out.push_str(&format!("k {}\n", self.arch.k));
        out.push_str(&format!("input_dim {}\n", self.arch.input_dim));
        out.push_str("hidden");
        for h in &self.arch.hidden {
            out.push_str(&format!(" {h}"));
        }
        out.push('\n');
        out.push_str(&format!("config_hash {config_hash:016x}\n"));
        let params = self.params();
        out.push_str(&format!("params {}\n", params.len()));
        for p in &params {
            out.push_str(&format!("{p:?}\n"));
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(out.as_bytes())?;
        Ok(())
    }

    /// Loads a checkpoint written by [`Network::save`].
    pub fn load(path: &Path) -> Result<(Self, u64)> {
        let f = std::fs::File::open(path)?;
        let mut lines = BufReader::new(f).lines();
        let mut offset = 0u64;
        let mut next = |what: &str| -> Result<String> {
            match lines.next() {
                Some(Ok(line)) => {
                    offset += line.len() as u64 + 1;
                    Ok(line)
                }
                Some(Err(e)) => Err(CondorError::Io(e)),
                None => Err(CondorError::Format {
                    offset,
                    msg: format!("unexpected end of checkpoint, expected {what}"),
                }),
            }
        };
        let magic = next("magic")?;
        if magic != "condor-model v1" {
            return Err(CondorError::Format {
                offset: 0,
                msg: format!("bad magic line {magic:?}"),
            });
        }
        let field = |line: String, key: &str| -> Result<String> {
            line.strip_prefix(&format!("{key} "))
                .map(str::to_string)
                .ok_or_else(|| CondorError::Format {
                    offset: 0,
                    msg: format!("expected {key:?} line, got {line:?}"),
                })
        };
        let head = HeadKind::parse(&field(next("head")?, "head")?)?;
        let k: usize = field(next("k")?, "k")?
            .parse()
            .map_err(|e| CondorError::Format { offset: 0, msg: format!("bad k: {e}") })?;
        let input_dim: usize = field(next("input_dim")?, "input_dim")?
            .parse()
            .map_err(|e| CondorError::Format { offset: 0, msg: format!("bad input_dim: {e}") })?;
        let hidden_line = next("hidden")?;
        let hidden: Vec<usize> = hidden_line
            .strip_prefix("hidden")
            .ok_or_else(|| CondorError::Format {
                offset: 0,
                msg: format!("expected hidden line, got {hidden_line:?}"),
            })?
            .split_whitespace()
            .map(|t| {
                t.parse().map_err(|e| CondorError::Format {
                    offset: 0,
                    msg: format!("bad hidden width {t:?}: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        let config_hash = u64::from_str_radix(&field(next("config_hash")?, "config_hash")?, 16)
            .map_err(|e| CondorError::Format { offset: 0, msg: format!("bad config hash: {e}") })?;
        let count: usize = field(next("params")?, "params")?
            .parse()
            .map_err(|e| CondorError::Format { offset: 0, msg: format!("bad param count: {e}") })?;

        let mut net = Network::init(ArchSpec { input_dim, hidden, head, k }, 0)?;
        if count != net.param_count() {
            return Err(CondorError::Format {
                offset: 0,
                msg: format!(
                    "checkpoint has {count} params, architecture needs {}",
                    net.param_count()
                ),
            });
        }
        let mut params = Vec::with_capacity(count);
        for i in 0..count {
            let line = next("parameter")?;
            params.push(line.parse::<f64>().map_err(|e| CondorError::Format {
                offset: 0,
                msg: format!("bad parameter {i}: {e}"),
            })?);
        }
        net.set_params(&params)?;
        Ok((net, config_hash))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_arch(head: HeadKind) -> ArchSpec {
        ArchSpec { input_dim: 2, hidden: vec![3], head, k: 3 }
    }

    #[test]
    fn init_is_deterministic() {
        let a = Network::init(small_arch(HeadKind::Condor), 7).unwrap();
        let b = Network::init(small_arch(HeadKind::Condor), 7).unwrap();
        assert_eq!(a.params(), b.params());
        let c = Network::init(small_arch(HeadKind::Condor), 8).unwrap();
        assert_ne!(a.params(), c.params());
    }

    #[test]
    fn glorot_bounds_hold() {
        let net = Network::init(
            ArchSpec { input_dim: 4, hidden: vec![6], head: HeadKind::Condor, k: 4 },
            0,
        )
        .unwrap();
        let limit0 = (6.0f64 / (4 + 6) as f64).sqrt();
        assert!(net.hidden[0].weights.data().iter().all(|w| w.abs() <= limit0));
        assert!(net.hidden[0].bias.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn head_widths() {
        for (head, width) in [
            (HeadKind::Condor, 2),
            (HeadKind::Coral, 2),
            (HeadKind::Categorical, 3),
        ] {
            let net = Network::init(small_arch(head), 1).unwrap();
            let x = Tensor::from_rows(&[vec![0.5, -0.5]]).unwrap();
            assert_eq!(net.logits(&x).unwrap().cols(), width);
        }
    }

    #[test]
    fn head_only_network_is_linear() {
        let arch = ArchSpec { input_dim: 2, hidden: vec![], head: HeadKind::Condor, k: 3 };
        let mut net = Network::init(arch, 0).unwrap();
        // weights [2x2] then bias [2]
        net.set_params(&[1.0, 0.0, 0.0, 1.0, 0.25, -0.25]).unwrap();
        let x = Tensor::from_rows(&[vec![2.0, 3.0]]).unwrap();
        let z = net.logits(&x).unwrap();
        assert_eq!(z.row(0), &[2.25, 2.75]);
    }

    #[test]
    fn params_round_trip() {
        for head in [HeadKind::Condor, HeadKind::Coral, HeadKind::Categorical] {
            let mut net = Network::init(small_arch(head), 3).unwrap();
            let p = net.params();
            assert_eq!(p.len(), net.param_count());
            let doubled: Vec<f64> = p.iter().map(|v| v * 2.0).collect();
            net.set_params(&doubled).unwrap();
            assert_eq!(net.params(), doubled);
        }
    }

    #[test]
    fn batch_width_checked() {
        let net = Network::init(small_arch(HeadKind::Condor), 0).unwrap();
        let bad = Tensor::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(matches!(net.forward(&bad), Err(CondorError::Config(_))));
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let dir = std::env::temp_dir().join(format!("condor-ckpt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        for head in [HeadKind::Condor, HeadKind::Coral, HeadKind::Categorical] {
            let net = Network::init(small_arch(head), 11).unwrap();
            let path = dir.join(format!("net-{}.txt", head.name()));
            net.save(&path, 0xdead_beef_0123_4567).unwrap();
            let (loaded, hash) = Network::load(&path).unwrap();
            assert_eq!(hash, 0xdead_beef_0123_4567);
            assert_eq!(loaded.params(), net.params());
            assert_eq!(loaded.arch(), net.arch());
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn truncated_checkpoint_rejected() {
        let dir = std::env::temp_dir().join(format!("condor-ckpt-trunc-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let net = Network::init(small_arch(HeadKind::Condor), 11).unwrap();
        let path = dir.join("full.txt");
        net.save(&path, 1).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let truncated: String = text.lines().take(8).map(|l| format!("{l}\n")).collect();
        let tpath = dir.join("truncated.txt");
        std::fs::write(&tpath, truncated).unwrap();
        assert!(matches!(
            Network::load(&tpath),
            Err(CondorError::Format { .. })
        ));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
