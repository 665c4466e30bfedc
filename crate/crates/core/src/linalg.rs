//! Small dense linear-algebra helpers shared by the solvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest absolute difference between `m` and its transpose.
pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn ensure_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::shape((m.nrows(), m.nrows()), m.shape()));
    }
    Ok(m.nrows())
}

pub fn ensure_symmetric(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    ensure_square(m)?;
    let asym = max_asymmetry(m);
    if asym > tol {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted in
/// descending order. Column `k` of the returned matrix pairs with value `k`.
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    // symmetrize first so rounding noise in the input cannot leak into the solver
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Reconstruct `V diag(values) Vᵀ` from the leading `values.len()` columns of `vectors`.
pub fn reconstruct(values: &[f64], vectors: &DMatrix<f64>) -> DMatrix<f64> {
    let n = vectors.nrows();
    let mut out = DMatrix::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        if lambda == 0.0 {
            continue;
        }
        let v = vectors.column(k);
        out.ger(lambda, &v, &v, 1.0);
    }
    out
}

/// Frobenius inner product `⟨A, B⟩ = Σ A_ij B_ij`.
pub fn frobenius_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Relative Frobenius distance `‖a − b‖_F / ‖b‖_F`.
pub fn relative_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

/// Flip column signs so that the first coordinate with magnitude above `tol`
/// is positive.
pub fn canonical_column_signs(m: &mut DMatrix<f64>, tol: f64) {
    for mut col in m.column_iter_mut() {
        if let Some(x) = col.iter().copied().find(|x| x.abs() > tol) {
            if x < 0.0 {
                col.neg_mut();
            }
        }
    }
}

pub fn ones(n: usize) -> DVector<f64> {
    DVector::from_element(n, 1.0)
}
