//! The logistic skip-gram objective over Gram matrices and conversions
//! between embeddings and Gram matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{ensure_symmetric, sym_eigen_desc};

/// Row `i` is the embedding of node `i`.
pub type EmbeddingMatrix = DMatrix<f64>;

/// `σ(t) = ln(1 + e^{−t})`, evaluated without overflow.
#[inline]
pub fn logistic_loss(t: f64) -> f64 {
    if t >= 0.0 {
        (-t).exp().ln_1p()
    } else {
        -t + t.exp().ln_1p()
    }
}

/// `1 / (1 + e^{t})`, evaluated without overflow.
#[inline]
pub fn sigmoid_neg(t: f64) -> f64 {
    if t >= 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

fn check_shapes(pos: &DMatrix<f64>, neg: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<()> {
    if pos.nrows() != pos.ncols() {
        return Err(Error::shape((pos.nrows(), pos.nrows()), pos.shape()));
    }
    for m in [neg, x] {
        if m.shape() != pos.shape() {
            return Err(Error::shape(pos.shape(), m.shape()));
        }
    }
    Ok(())
}

/// `f(N⁺, N⁻, X) = Σ_ij N⁺_ij σ(X_ij) + N⁻_ij σ(−X_ij)`.
pub fn objective_value(pos: &DMatrix<f64>, neg: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<f64> {
    check_shapes(pos, neg, x)?;
    Ok(objective_unchecked(pos, neg, x))
}

pub(crate) fn objective_unchecked(pos: &DMatrix<f64>, neg: &DMatrix<f64>, x: &DMatrix<f64>) -> f64 {
    let mut total = 0.0;
    for ((&p, &q), &t) in pos.iter().zip(neg.iter()).zip(x.iter()) {
        if p != 0.0 {
            total += p * logistic_loss(t);
        }
        if q != 0.0 {
            total += q * logistic_loss(-t);
        }
    }
    total
}

/// Entrywise derivative `−N⁺/(1+e^X) + N⁻/(1+e^{−X})`.
pub fn objective_gradient(pos: &DMatrix<f64>, neg: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_shapes(pos, neg, x)?;
    Ok(gradient_unchecked(pos, neg, x))
}

pub(crate) fn gradient_unchecked(pos: &DMatrix<f64>, neg: &DMatrix<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = pos.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        let t = x[(i, j)];
        -pos[(i, j)] * sigmoid_neg(t) + neg[(i, j)] * sigmoid_neg(-t)
    })
}

pub fn gram_matrix(u: &EmbeddingMatrix) -> DMatrix<f64> {
    u * u.transpose()
}

/// Embedding `U` (n×d) whose Gram matrix is the best rank-`d` PSD
/// approximation of `x`. Columns are ordered by decreasing eigenvalue.
pub fn factorize_gram(x: &DMatrix<f64>, d: usize) -> Result<EmbeddingMatrix> {
    if d == 0 {
        return Err(Error::invalid("embedding dimension must be at least 1"));
    }
    ensure_symmetric(x, 1e-9 * x.amax().max(1.0))?;
    let (values, vectors) = sym_eigen_desc(x);
    let spectral = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = values.last().copied().unwrap_or(0.0);
    if min < -1e-6 * spectral {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let n = x.nrows();
    let mut u = DMatrix::zeros(n, d);
    for k in 0..d.min(n) {
        let scale = values[k].max(0.0).sqrt();
        u.set_column(k, &(vectors.column(k) * scale));
    }
    Ok(u)
}
