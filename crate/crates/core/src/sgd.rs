//! Minibatch Adam over the weighted pair set of a skip-gram objective.
//!
//! Every nonzero `N⁺_ij` becomes one sample `(i, j, N⁺_ij, +1)` and every
//! nonzero `N⁻_ij` one sample `(i, j, N⁻_ij, −1)`. The loss of a sample is
//! `weight · σ(label · u_iᵀu_j)`, so a full pass sums to `f(N⁺, N⁻, UUᵀ)`.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::procrustes_align;
use crate::objective::{gram_matrix, objective_value, sigmoid_neg, EmbeddingMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgdConfig {
    pub d: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Initial entries are drawn from `N(0, (init_scale/√d)²)`.
    pub init_scale: f64,
    pub seed: u64,
    /// Stop once the relative change of the epoch objective stays below this
    /// for `patience` consecutive epochs.
    pub tol_objective: f64,
    pub patience: usize,
    pub batch_size: usize,
    /// Inverse-time decay: epoch `e` uses `learning_rate / (1 + lr_decay·e)`.
    pub lr_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig {
            d: 2,
            learning_rate: 0.02,
            epochs: 400,
            init_scale: 0.1,
            seed: 0,
            tol_objective: 1e-6,
            patience: 10,
            batch_size: 32,
            lr_decay: 0.0,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-7,
        }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::invalid("embedding dimension must be at least 1"));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if self.epochs == 0 || self.batch_size == 0 || self.patience == 0 {
            return Err(Error::invalid("epochs, batch size and patience must be positive"));
        }
        if !(self.init_scale > 0.0) {
            return Err(Error::invalid("init scale must be positive"));
        }
        if !(self.lr_decay >= 0.0) || !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::invalid("invalid Adam parameters"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub objective: f64,
    /// Procrustes distance to the previous epoch's embedding divided by the
    /// previous embedding's Frobenius norm. Epoch 0 is the initialization.
    pub procrustes_change: f64,
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    i: u32,
    j: u32,
    weight: f64,
    label: f64,
}

fn build_samples(pos: &DMatrix<f64>, neg: &DMatrix<f64>) -> Vec<Sample> {
    let n = pos.nrows();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if pos[(i, j)] > 0.0 {
                out.push(Sample { i: i as u32, j: j as u32, weight: pos[(i, j)], label: 1.0 });
            }
            if neg[(i, j)] > 0.0 {
                out.push(Sample { i: i as u32, j: j as u32, weight: neg[(i, j)], label: -1.0 });
            }
        }
    }
    out
}

pub fn initial_embedding(n: usize, d: usize, init_scale: f64, rng: &mut ChaCha8Rng) -> EmbeddingMatrix {
    let normal = Normal::new(0.0, init_scale / (d as f64).sqrt()).expect("finite positive scale");
    DMatrix::from_fn(n, d, |_, _| normal.sample(rng))
}

/// Minimize `f(N⁺, N⁻, UUᵀ)` over `U ∈ ℝ^{n×d}`. Returns the final embedding
/// and one record per completed epoch (plus the initialization).
pub fn solve_embeddings_sgd(pos: &DMatrix<f64>, neg: &DMatrix<f64>, cfg: &SgdConfig) -> Result<(EmbeddingMatrix, Vec<EpochRecord>)> {
    cfg.validate()?;
    let n = pos.nrows();
    if pos.ncols() != n {
        return Err(Error::shape((n, n), pos.shape()));
    }
    if neg.shape() != pos.shape() {
        return Err(Error::shape(pos.shape(), neg.shape()));
    }
    if pos.iter().chain(neg.iter()).any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::invalid("coefficient matrices must be finite and nonnegative"));
    }
    let mut samples = build_samples(pos, neg);
    if samples.is_empty() {
        return Err(Error::EmptyInput("all coefficients are zero".into()));
    }

    let d = cfg.d;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut u = initial_embedding(n, d, cfg.init_scale, &mut rng);
    let mut m1 = DMatrix::<f64>::zeros(n, d);
    let mut m2 = DMatrix::<f64>::zeros(n, d);
    let mut grad = DMatrix::<f64>::zeros(n, d);
    let mut step = 0i32;
    let diverged = || Error::Divergence { learning_rate: cfg.learning_rate };

    let mut prev_obj = objective_value(pos, neg, &gram_matrix(&u))?;
    if !prev_obj.is_finite() {
        return Err(diverged());
    }
    let mut trace = vec![EpochRecord { epoch: 0, objective: prev_obj, procrustes_change: 0.0 }];
    let total = samples.len() as f64;
    let mut quiet = 0;

    for epoch in 1..=cfg.epochs {
        samples.shuffle(&mut rng);
        let lr = cfg.learning_rate / (1.0 + cfg.lr_decay * (epoch - 1) as f64);
        let prev_u = u.clone();
        for batch in samples.chunks(cfg.batch_size) {
            grad.fill(0.0);
            // unbiased estimate of the full-pass gradient
            let scale = total / batch.len() as f64;
            for s in batch {
                let (i, j) = (s.i as usize, s.j as usize);
                let x = u.row(i).dot(&u.row(j));
                // d/dx [w σ(label·x)] = −w·label / (1 + e^{label·x})
                let c = -s.weight * s.label * sigmoid_neg(s.label * x) * scale;
                for k in 0..d {
                    let (ui, uj) = (u[(i, k)], u[(j, k)]);
                    grad[(i, k)] += c * uj;
                    grad[(j, k)] += c * ui;
                }
            }
            step += 1;
            let bias1 = 1.0 - cfg.beta1.powi(step);
            let bias2 = 1.0 - cfg.beta2.powi(step);
            for idx in 0..n * d {
                let g = grad[idx];
                m1[idx] = cfg.beta1 * m1[idx] + (1.0 - cfg.beta1) * g;
                m2[idx] = cfg.beta2 * m2[idx] + (1.0 - cfg.beta2) * g * g;
                let mhat = m1[idx] / bias1;
                let vhat = m2[idx] / bias2;
                u[idx] -= lr * mhat / (vhat.sqrt() + cfg.adam_epsilon);
            }
        }
        let obj = objective_value(pos, neg, &gram_matrix(&u))?;
        if !obj.is_finite() || u.iter().any(|x| !x.is_finite()) {
            return Err(diverged());
        }
        let prev_norm = prev_u.norm();
        let change = if prev_norm > 0.0 { procrustes_align(&u, &prev_u)?.1 / prev_norm } else { 0.0 };
        trace.push(EpochRecord { epoch, objective: obj, procrustes_change: change });
        let rel = (prev_obj - obj).abs() / prev_obj.abs().max(f64::MIN_POSITIVE);
        prev_obj = obj;
        quiet = if rel < cfg.tol_objective { quiet + 1 } else { 0 };
        if quiet >= cfg.patience {
            break;
        }
    }
    Ok((u, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_mass_descends() {
        let pos = DMatrix::from_diagonal_element(4, 4, 1.0);
        let neg = DMatrix::zeros(4, 4);
        let cfg = SgdConfig { epochs: 60, tol_objective: 0.0, ..Default::default() };
        let (u, trace) = solve_embeddings_sgd(&pos, &neg, &cfg).unwrap();
        for w in trace.windows(2) {
            assert!(w[1].objective <= w[0].objective + 1e-12);
        }
        assert!(trace.last().unwrap().objective < 0.5 * trace[0].objective);
        assert!(u.row_iter().all(|r| r.norm() > 0.5));
    }

    #[test]
    fn deterministic_per_seed() {
        let pos = DMatrix::from_fn(5, 5, |i, j| if i != j { 0.1 * (1 + i + j) as f64 } else { 0.0 });
        let neg = DMatrix::from_element(5, 5, 0.2);
        let cfg = SgdConfig { epochs: 20, ..Default::default() };
        let a = solve_embeddings_sgd(&pos, &neg, &cfg).unwrap();
        let b = solve_embeddings_sgd(&pos, &neg, &cfg).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn huge_learning_rate_reports_divergence() {
        let ones = DMatrix::from_element(3, 3, 1.0);
        let cfg = SgdConfig { learning_rate: f64::INFINITY, ..Default::default() };
        assert!(matches!(solve_embeddings_sgd(&ones, &ones, &cfg), Err(Error::InvalidParameter(_))));
        let cfg = SgdConfig { learning_rate: 1e300, epochs: 5, ..Default::default() };
        match solve_embeddings_sgd(&ones, &ones, &cfg) {
            Err(Error::Divergence { learning_rate }) => assert_eq!(learning_rate, 1e300),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        let z = DMatrix::zeros(2, 2);
        assert!(matches!(solve_embeddings_sgd(&z, &z, &SgdConfig::default()), Err(Error::EmptyInput(_))));
        let neg = DMatrix::from_element(2, 2, -1.0);
        assert!(solve_embeddings_sgd(&z, &neg, &SgdConfig::default()).is_err());
    }
}
