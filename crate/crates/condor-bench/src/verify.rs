//! Executable property suites: the rank-consistency guarantee, the
//! likelihood identity, gradient checks against finite differences, the
//! CORAL inconsistency witness, the target-conditional reconstruction sweep,
//! and the CORAL-vs-CONDOR expressiveness fit.

use std::fmt;

use condor::coral::{self, ConsistencyCheck};
use condor::encoding::{encode, rank_distribution, LabelAlphabet, RankLabel};
use condor::head::{
    conditionals_from_logits, marginals_from_conditionals, target_conditionals, ImportanceWeights,
};
use condor::math::sigmoid;
use condor::nn::{
    batch_loss, finite_difference_gradient, max_relative_error, AdamState, ArchSpec, HeadKind,
    LossKind, Network, Tensor,
};
use condor::Result;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Consistency,
    Likelihood,
    GradCheck,
    CoralWitness,
    Reconstruction,
    Expressiveness,
}

impl Suite {
    pub fn all() -> [Suite; 6] {
        [
            Suite::Consistency,
            Suite::Likelihood,
            Suite::GradCheck,
            Suite::CoralWitness,
            Suite::Reconstruction,
            Suite::Expressiveness,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Consistency => "consistency",
            Suite::Likelihood => "likelihood",
            Suite::GradCheck => "gradcheck",
            Suite::CoralWitness => "coral-witness",
            Suite::Reconstruction => "reconstruction",
            Suite::Expressiveness => "expressiveness",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::all().into_iter().find(|v| v.name() == s)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of one suite: how many checks ran, how many failed, the worst
/// observed error, and a human-readable summary.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub checks: u64,
    pub failures: u64,
    pub worst_error: f64,
    pub detail: String,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{}: {} checks, {} failures, worst error {:.3e} -> {}",
            self.suite,
            self.checks,
            self.failures,
            self.worst_error,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

pub fn run_suite(suite: Suite) -> Result<SuiteOutcome> {
    match suite {
        Suite::Consistency => consistency(),
        Suite::Likelihood => likelihood(),
        Suite::GradCheck => gradcheck(),
        Suite::CoralWitness => coral_witness(),
        Suite::Reconstruction => reconstruction(),
        Suite::Expressiveness => expressiveness(),
    }
}

/// Universal rank consistency: chained marginals are non-increasing for
/// every parameterization and every input, including saturated weights.
fn consistency() -> Result<SuiteOutcome> {
    let ks = [2usize, 3, 5, 10, 50];
    let nets_per_k = 200;
    let inputs_per_net = 100;
    let scales = [1.0, 4.0, 16.0];
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0);
    let mut checks = 0u64;
    let mut failures = 0u64;
    let mut worst: f64 = 0.0;

    for &k in &ks {
        for net_i in 0..nets_per_k {
            let arch = ArchSpec {
                input_dim: 4,
                hidden: vec![6],
                head: HeadKind::Condor,
                k,
            };
            let mut net = Network::init(arch, rng.random())?;
            let scale = scales[net_i % scales.len()];
            if scale != 1.0 {
                let params: Vec<f64> = net.params().iter().map(|p| p * scale).collect();
                net.set_params(&params)?;
            }
            let rows: Vec<Vec<f64>> = (0..inputs_per_net)
                .map(|_| (0..4).map(|_| rng.random_range(-3.0..3.0)).collect())
                .collect();
            let logits = net.logits(&Tensor::from_rows(&rows)?)?;
            for r in 0..inputs_per_net {
                let q = conditionals_from_logits(logits.row(r))?;
                let p = marginals_from_conditionals(&q);
                checks += 1;
                for w in p.values().windows(2) {
                    if w[1] > w[0] {
                        failures += 1;
                        worst = worst.max(w[1] - w[0]);
                    }
                }
            }
        }
    }
    Ok(SuiteOutcome {
        suite: Suite::Consistency,
        checks,
        failures,
        worst_error: worst,
        detail: format!(
            "{} networks x {inputs_per_net} inputs across K in {ks:?}, weight scales {scales:?}",
            ks.len() * nets_per_k
        ),
    })
}

/// Likelihood identity: the per-example ML loss equals the negative log of
/// the induced rank pmf at the true rank, and the batch ML loss equals the
/// enumerated negative log-likelihood of the label sequence.
fn likelihood() -> Result<SuiteOutcome> {
    const TOL: f64 = 1e-10;
    let ks = [2usize, 3, 5, 10];
    let mut rng = ChaCha8Rng::seed_from_u64(0x11);
    let mut checks = 0u64;
    let mut failures = 0u64;
    let mut worst: f64 = 0.0;

    for i in 0..1000 {
        let k = ks[i % ks.len()];
        let alphabet = LabelAlphabet::numeric(k)?;
        let arch = ArchSpec { input_dim: 3, hidden: vec![5], head: HeadKind::Condor, k };
        let net = Network::init(arch, rng.random())?;
        let row: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let logits = net.logits(&Tensor::from_rows(&[row])?)?;
        let s = rng.random_range(1..=k);
        let enc = encode(RankLabel::new(s, &alphabet)?, &alphabet);

        let (loss, _) = condor::head::ml_loss_single(logits.row(0), &enc)?;
        let p = marginals_from_conditionals(&conditionals_from_logits(logits.row(0))?);
        let oracle = -rank_distribution(&p)?[s - 1].ln();
        let err = (loss - oracle).abs();
        checks += 1;
        if err > TOL {
            failures += 1;
        }
        worst = worst.max(err);
    }

    // Batch form: N * mean ML loss vs the summed per-label negative log pmf.
    for batch_i in 0..20 {
        let k = ks[batch_i % ks.len()];
        let alphabet = LabelAlphabet::numeric(k)?;
        let arch = ArchSpec { input_dim: 3, hidden: vec![5], head: HeadKind::Condor, k };
        let net = Network::init(arch, rng.random())?;
        let n = 50;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let logits = net.logits(&Tensor::from_rows(&rows)?)?;
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(1..=k)).collect();
        let encs: Vec<_> = labels
            .iter()
            .map(|&s| encode(RankLabel::new(s, &alphabet).unwrap(), &alphabet))
            .collect();
        let ranks: Vec<usize> = labels.clone();
        let weights = ImportanceWeights::uniform(k - 1);
        let (mean_loss, _) = batch_loss(LossKind::CondorMl, &logits, &encs, &ranks, &weights)?;

        let mut nll = 0.0;
        for (r, &label) in labels.iter().enumerate() {
            let p = marginals_from_conditionals(&conditionals_from_logits(logits.row(r))?);
            nll -= rank_distribution(&p)?[label - 1].ln();
        }
        let err = (mean_loss * n as f64 - nll).abs();
        checks += 1;
        if err > TOL {
            failures += 1;
        }
        worst = worst.max(err);
    }

    Ok(SuiteOutcome {
        suite: Suite::Likelihood,
        checks,
        failures,
        worst_error: worst,
        detail: format!("1000 per-example identities + 20 batch identities, tol {TOL:.0e}"),
    })
}

struct GradInstance {
    net: Network,
    batch: Tensor,
    encodings: Vec<condor::encoding::BinaryEncoding>,
    ranks: Vec<usize>,
}

fn grad_instance(loss: LossKind, k: usize, rng: &mut ChaCha8Rng) -> Result<GradInstance> {
    let alphabet = LabelAlphabet::numeric(k)?;
    loop {
        let arch = ArchSpec {
            input_dim: 3,
            hidden: vec![8, 6],
            head: loss.head(),
            k,
        };
        let net = Network::init(arch, rng.random())?;
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let batch = Tensor::from_rows(&rows)?;
        // Reject draws with a ReLU input near the kink; the central
        // difference would straddle it and measure the wrong slope.
        if net.min_abs_hidden_preactivation(&batch)? < 1e-3 {
            continue;
        }
        let labels: Vec<usize> = (0..5).map(|_| rng.random_range(1..=k)).collect();
        let encodings = labels
            .iter()
            .map(|&s| encode(RankLabel::new(s, &alphabet).unwrap(), &alphabet))
            .collect();
        return Ok(GradInstance { net, batch, encodings, ranks: labels });
    }
}

/// Backpropagation vs central finite differences (step 1e-4) for all four
/// losses through two-hidden-layer networks.
fn gradcheck() -> Result<SuiteOutcome> {
    const STEP: f64 = 1e-4;
    const TOL: f64 = 1e-5;
    const FLOOR: f64 = 1e-2;
    let losses = [
        LossKind::CondorMl,
        LossKind::CondorWbce,
        LossKind::CoralWbce,
        LossKind::Cce,
    ];
    let ks = [2usize, 3, 5, 10];
    let per_loss = 30;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6D);
    let mut checks = 0u64;
    let mut failures = 0u64;
    let mut worst: f64 = 0.0;

    for &loss in &losses {
        for i in 0..per_loss {
            let k = ks[i % ks.len()];
            let inst = grad_instance(loss, k, &mut rng)?;
            let weights = ImportanceWeights::uniform(k - 1);

            let pass = inst.net.forward(&inst.batch)?;
            let (_, d_logits) =
                batch_loss(loss, &pass.logits, &inst.encodings, &inst.ranks, &weights)?;
            let analytic = inst.net.backward(&pass, &d_logits);

            let theta = inst.net.params();
            let mut probe = inst.net.clone();
            let numeric = finite_difference_gradient(
                |t| {
                    probe.set_params(t).unwrap();
                    let logits = probe.logits(&inst.batch).unwrap();
                    batch_loss(loss, &logits, &inst.encodings, &inst.ranks, &weights)
                        .unwrap()
                        .0
                },
                &theta,
                STEP,
            );
            let err = max_relative_error(&analytic, &numeric, FLOOR);
            checks += 1;
            if err > TOL {
                failures += 1;
            }
            worst = worst.max(err);
        }
    }

    Ok(SuiteOutcome {
        suite: Suite::GradCheck,
        checks,
        failures,
        worst_error: worst,
        detail: format!(
            "{} instances per loss x {} losses, step {STEP:.0e}, rel tol {TOL:.0e}",
            per_loss,
            losses.len()
        ),
    })
}

/// The bias pair [0, 1] makes `p_2 > p_1` for every input, and the
/// consistency checker pinpoints threshold 2.
fn coral_witness() -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xCA);
    let biases = [0.0, 1.0];
    let mut checks = 0u64;
    let mut failures = 0u64;
    let mut worst: f64 = 0.0;

    for _ in 0..10_000 {
        // Scores from random linear feature maps, well inside sigmoid's
        // non-saturated range.
        let w: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        let a: f64 = w.iter().zip(&x).map(|(wi, xi)| wi * xi).sum();
        let p = coral::forward(a, &biases);
        checks += 1;
        if p.values()[1] <= p.values()[0] {
            failures += 1;
            worst = worst.max(p.values()[0] - p.values()[1]);
        }
    }

    checks += 1;
    if coral::consistency_check(&biases) != (ConsistencyCheck::Witness { k: 2 }) {
        failures += 1;
    }

    // Same property through a full network with its head biases forced to [0, 1].
    let arch = ArchSpec { input_dim: 3, hidden: vec![5], head: HeadKind::Coral, k: 3 };
    let mut net = Network::init(arch, 7)?;
    let mut params = net.params();
    let n = params.len();
    params[n - 2] = 0.0;
    params[n - 1] = 1.0;
    net.set_params(&params)?;
    let rows: Vec<Vec<f64>> = (0..200)
        .map(|_| (0..3).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    let logits = net.logits(&Tensor::from_rows(&rows)?)?;
    for r in 0..rows.len() {
        let p: Vec<f64> = logits.row(r).iter().map(|&z| sigmoid(z)).collect();
        checks += 1;
        if p[1] <= p[0] {
            failures += 1;
            worst = worst.max(p[0] - p[1]);
        }
    }

    Ok(SuiteOutcome {
        suite: Suite::CoralWitness,
        checks,
        failures,
        worst_error: worst,
        detail: "10000 sampled scores + 200 network inputs, biases [0, 1]".into(),
    })
}

/// Reconstruction sweep: conditionals built from a rank-consistent target
/// recover it with error shrinking linearly in eps and bounded by 10*K*eps.
fn reconstruction() -> Result<SuiteOutcome> {
    let k = 5usize;
    let eps_grid = [1e-1, 1e-2, 1e-3];
    let mut rng = ChaCha8Rng::seed_from_u64(0x8E);
    let mut checks = 0u64;
    let mut failures = 0u64;
    let mut worst: f64 = 0.0;

    for _ in 0..100 {
        let mut p_star: Vec<f64> = (0..k - 1).map(|_| rng.random()).collect();
        p_star.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut prev_err = f64::INFINITY;
        for &eps in &eps_grid {
            let q = target_conditionals(&p_star, eps)?;
            let p = marginals_from_conditionals(&q);
            let err = p
                .values()
                .iter()
                .zip(&p_star)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            checks += 1;
            let bound = 10.0 * k as f64 * eps;
            if err > bound || err >= prev_err {
                failures += 1;
            }
            worst = worst.max(err / bound);
            prev_err = err;
        }
    }

    Ok(SuiteOutcome {
        suite: Suite::Reconstruction,
        checks,
        failures,
        worst_error: worst,
        detail: format!("100 targets (K={k}) x eps {eps_grid:?}; worst = max err/bound"),
    })
}

/// Target marginals of the expressiveness construction on a grid over
/// [-3, 3]: `p*_1 = sigmoid(-x)`, `p*_2 = sigmoid(-x) * sigmoid(-2x)`.
fn expressiveness_targets() -> (Vec<f64>, Vec<[f64; 2]>) {
    let grid: Vec<f64> = (0..=120).map(|i| -3.0 + i as f64 * 0.05).collect();
    let targets = grid
        .iter()
        .map(|&x| {
            let q1 = sigmoid(-x);
            let q2 = sigmoid(-2.0 * x);
            [q1, q1 * q2]
        })
        .collect();
    (grid, targets)
}

/// Fits a head-only network to the target marginals with full-batch Adam on
/// marginal MSE; returns the converged max marginal error over the grid.
fn fit_to_targets(head: HeadKind, seed: u64) -> Result<f64> {
    let (grid, targets) = expressiveness_targets();
    let rows: Vec<Vec<f64>> = grid.iter().map(|&x| vec![x]).collect();
    let batch = Tensor::from_rows(&rows)?;
    let n = grid.len();

    let arch = ArchSpec { input_dim: 1, hidden: vec![], head, k: 3 };
    let mut net = Network::init(arch, seed)?;
    let mut params = net.params();
    let mut adam = AdamState::new(params.len());

    for _ in 0..4000 {
        let pass = net.forward(&batch)?;
        let mut d_logits = Tensor::zeros(&[n, 2]);
        for (r, target) in targets.iter().enumerate() {
            let z = pass.logits.row(r);
            let scale = 1.0 / (n as f64 * 2.0);
            match head {
                HeadKind::Condor => {
                    let q = [sigmoid(z[0]), sigmoid(z[1])];
                    let p = [q[0], q[0] * q[1]];
                    let resid = [p[0] - target[0], p[1] - target[1]];
                    // dMSE/dz_j = scale * sum_{k>=j} 2 resid_k p_k (1 - q_j)
                    let row = d_logits.row_mut(r);
                    row[0] = scale * 2.0 * (resid[0] * p[0] + resid[1] * p[1]) * (1.0 - q[0]);
                    row[1] = scale * 2.0 * resid[1] * p[1] * (1.0 - q[1]);
                }
                HeadKind::Coral => {
                    let p = [sigmoid(z[0]), sigmoid(z[1])];
                    let row = d_logits.row_mut(r);
                    for j in 0..2 {
                        row[j] = scale * 2.0 * (p[j] - target[j]) * p[j] * (1.0 - p[j]);
                    }
                }
                HeadKind::Categorical => unreachable!("fit only compares ordinal heads"),
            }
        }
        let grads = net.backward(&pass, &d_logits);
        adam.step(&mut params, &grads, 0.05, 0.9, 0.999, 1e-8)?;
        net.set_params(&params)?;
    }

    let logits = net.logits(&batch)?;
    let mut max_err: f64 = 0.0;
    for (r, target) in targets.iter().enumerate() {
        let z = logits.row(r);
        let p = match head {
            HeadKind::Condor => {
                let q = [sigmoid(z[0]), sigmoid(z[1])];
                [q[0], q[0] * q[1]]
            }
            HeadKind::Coral => [sigmoid(z[0]), sigmoid(z[1])],
            HeadKind::Categorical => unreachable!(),
        };
        for k in 0..2 {
            max_err = max_err.max((p[k] - target[k]).abs());
        }
    }
    Ok(max_err)
}

/// Expressiveness gap: with the same upstream (a linear map of x), the
/// conditional head can fit the construction's marginals while the
/// shared-score head converges to a strictly larger max error, every seed.
fn expressiveness() -> Result<SuiteOutcome> {
    let mut checks = 0u64;
    let mut failures = 0u64;
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for seed in 0..3u64 {
        let condor_err = fit_to_targets(HeadKind::Condor, seed)?;
        let coral_err = fit_to_targets(HeadKind::Coral, seed)?;
        checks += 1;
        if condor_err >= coral_err {
            failures += 1;
        }
        worst = worst.max(condor_err);
        lines.push(format!(
            "seed {seed}: condor max err {condor_err:.4e}, coral max err {coral_err:.4e}"
        ));
    }
    Ok(SuiteOutcome {
        suite: Suite::Expressiveness,
        checks,
        failures,
        worst_error: worst,
        detail: lines.join("; "),
    })
}
