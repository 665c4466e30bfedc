//! Embedding post-processing and evaluation metrics.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{canonical_column_signs, sym_eigen_desc};
use crate::objective::{gram_matrix, EmbeddingMatrix};

/// Rotate `U` onto its right singular vectors: `U Ṽ` where `U = L S Ṽᵀ`.
/// Columns come out in decreasing singular value order with a canonical sign.
pub fn svd_coordinates(u: &EmbeddingMatrix) -> Result<EmbeddingMatrix> {
    if u.iter().all(|&x| x == 0.0) {
        return Err(Error::EmptyInput("embedding is identically zero".into()));
    }
    let (_, v) = sym_eigen_desc(&(u.transpose() * u));
    let mut out = u * v;
    canonical_column_signs(&mut out, 1e-12);
    Ok(out)
}

/// Orthogonal `P` minimizing `‖U1 − U2 P‖_F`, and that minimum.
pub fn procrustes_align(u1: &EmbeddingMatrix, u2: &EmbeddingMatrix) -> Result<(DMatrix<f64>, f64)> {
    if u1.shape() != u2.shape() {
        return Err(Error::shape(u1.shape(), u2.shape()));
    }
    let svd = (u2.transpose() * u1).svd(true, true);
    let (a, bt) = match (svd.u, svd.v_t) {
        (Some(a), Some(bt)) => (a, bt),
        _ => return Err(Error::Numerical("SVD did not return singular vectors".into())),
    };
    let p = a * bt;
    let distance = (u1 - u2 * &p).norm();
    Ok((p, distance))
}

/// How the projected variances enter the SNR denominator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrMode {
    /// `η̂²_i = Δᵀ K̂_i Δ` as displayed.
    #[default]
    Formula,
    /// `η̂²_i = Δᵀ K̂_i Δ / ‖Δ‖²`, the variance of the projection onto the
    /// unit vector along `Δ`. Scale invariant.
    ProjectionNormalized,
}

/// Per-community sample statistics with population (1/n) covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    pub labels: Vec<usize>,
    pub counts: Vec<usize>,
    pub means: Vec<DVector<f64>>,
    pub covariances: Vec<DMatrix<f64>>,
}

impl ClusterStats {
    pub fn compute(u: &EmbeddingMatrix, labels: &[usize]) -> Result<Self> {
        if labels.len() != u.nrows() {
            return Err(Error::shape((u.nrows(), 1), (labels.len(), 1)));
        }
        let mut distinct: Vec<usize> = labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let d = u.ncols();
        let mut counts = Vec::new();
        let mut means = Vec::new();
        let mut covariances = Vec::new();
        for &c in &distinct {
            let rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            let count = rows.len() as f64;
            let mut mean = DVector::zeros(d);
            for &i in &rows {
                mean += u.row(i).transpose();
            }
            mean /= count;
            let mut cov = DMatrix::zeros(d, d);
            for &i in &rows {
                let dev = u.row(i).transpose() - &mean;
                cov.ger(1.0, &dev, &dev, 1.0);
            }
            cov /= count;
            counts.push(rows.len());
            means.push(mean);
            covariances.push(cov);
        }
        Ok(ClusterStats { labels: distinct, counts, means, covariances })
    }

    /// `η̂²_c = Δᵀ K̂_c Δ` for the difference `Δ = μ̂₁ − μ̂₂` of the first two
    /// communities.
    pub fn projected_variances(&self) -> Vec<f64> {
        let delta = &self.means[0] - &self.means[1];
        self.covariances.iter().map(|k| (delta.transpose() * k * &delta)[(0, 0)]).collect()
    }
}

/// `‖μ̂₁ − μ̂₂‖² / (½(η̂₁² + η̂₂²))` for exactly two labelled communities.
/// Zero within-community spread with distinct means gives `+∞`; spread along
/// `Δ` within a few ulps of the centroid coordinates counts as zero.
pub fn snr_1d(u: &EmbeddingMatrix, labels: &[usize], mode: SnrMode) -> Result<f64> {
    let stats = ClusterStats::compute(u, labels)?;
    if stats.labels.len() != 2 {
        return Err(Error::UndefinedMetric(format!("SNR-1D needs exactly 2 communities, found {}", stats.labels.len())));
    }
    if stats.counts.iter().any(|&c| c < 2) {
        return Err(Error::UndefinedMetric("each community needs at least 2 members".into()));
    }
    let delta = &stats.means[0] - &stats.means[1];
    let num = delta.norm_squared();
    if num == 0.0 {
        // coincident means: no separation if there is any spread at all, the
        // quadratic forms in Δ vanish with it so they cannot decide
        if stats.covariances.iter().any(|k| k.trace() > 0.0) {
            return Ok(0.0);
        }
        return Err(Error::UndefinedMetric("SNR-1D is 0/0: identical means and zero spread".into()));
    }
    let mut eta = stats.projected_variances();
    // spread along Δ below the rounding resolution of the centroids is zero
    let spread = (eta[0].max(eta[1]).max(0.0) / num).sqrt();
    let resolution = 8.0 * f64::EPSILON * stats.means[0].norm().max(stats.means[1].norm());
    if spread <= resolution {
        return Ok(f64::INFINITY);
    }
    if mode == SnrMode::ProjectionNormalized {
        for e in &mut eta {
            *e /= num;
        }
    }
    Ok(num / (0.5 * (eta[0] + eta[1])))
}

/// `‖U1U1ᵀ − U2U2ᵀ‖_F`, optionally divided by the larger of the two Gram norms.
pub fn gram_distance(u1: &EmbeddingMatrix, u2: &EmbeddingMatrix, normalized: bool) -> Result<f64> {
    if u1.nrows() != u2.nrows() {
        return Err(Error::shape((u1.nrows(), u2.ncols()), u2.shape()));
    }
    let g1 = gram_matrix(u1);
    let g2 = gram_matrix(u2);
    let raw = (&g1 - &g2).norm();
    if !normalized {
        return Ok(raw);
    }
    let scale = g1.norm().max(g2.norm());
    if scale == 0.0 {
        return Err(Error::UndefinedMetric("both Gram matrices are zero".into()));
    }
    Ok(raw / scale)
}

/// Maximum-likelihood Gaussian fit of 2-D points, scaled for a confidence region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub covariance: [[f64; 2]; 2],
    /// Chi-square quantile: the region is `(x−c)ᵀ K⁻¹ (x−c) ≤ scale`.
    pub scale: f64,
    pub degenerate: bool,
}

/// Quantile of the chi-square distribution with 2 degrees of freedom, found by
/// bisection on its CDF `1 − e^{−x/2}`.
pub fn chi_square_2dof_quantile(p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::invalid(format!("confidence {p} must lie in [0, 1)")));
    }
    let cdf = |x: f64| -(-x / 2.0).exp_m1();
    let mut hi = 1.0;
    while cdf(hi) < p {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn gaussian_ellipse(points: &DMatrix<f64>, confidence: f64) -> Result<Ellipse> {
    if points.ncols() != 2 {
        return Err(Error::shape((points.nrows(), 2), points.shape()));
    }
    if points.nrows() < 3 {
        return Err(Error::EmptyInput("an ellipse fit needs at least 3 points".into()));
    }
    let labels = vec![0; points.nrows()];
    let stats = ClusterStats::compute(points, &labels)?;
    let (mean, cov) = (&stats.means[0], &stats.covariances[0]);
    let det = cov[(0, 0)] * cov[(1, 1)] - cov[(0, 1)] * cov[(1, 0)];
    let trace = cov[(0, 0)] + cov[(1, 1)];
    Ok(Ellipse {
        center: [mean[0], mean[1]],
        covariance: [[cov[(0, 0)], cov[(0, 1)]], [cov[(1, 0)], cov[(1, 1)]]],
        scale: chi_square_2dof_quantile(confidence)?,
        degenerate: det <= 1e-12 * trace * trace,
    })
}

/// Top-`d` eigenvectors of `D^{−1/2} A D^{−1/2}` scaled by `√n`.
pub fn spectral_embedding(g: &Graph, d: usize) -> Result<EmbeddingMatrix> {
    let n = g.n();
    if d == 0 || d > n {
        return Err(Error::invalid(format!("dimension {d} must lie in 1..={n}")));
    }
    let deg = g.degrees();
    if let Some(node) = deg.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::DegenerateNode { node });
    }
    let inv_sqrt: Vec<f64> = deg.iter().map(|x| 1.0 / x.sqrt()).collect();
    let a = g.adjacency();
    let m = DMatrix::from_fn(n, n, |i, j| inv_sqrt[i] * a[(i, j)] * inv_sqrt[j]);
    let (_, vectors) = sym_eigen_desc(&m);
    let mut out = vectors.columns(0, d).into_owned() * (n as f64).sqrt();
    canonical_column_signs(&mut out, 1e-12);
    Ok(out)
}

/// `D^{−1/2} A D^{−1/2}`, exposed for residual checks.
pub fn normalized_adjacency(g: &Graph) -> Result<DMatrix<f64>> {
    let deg = g.degrees();
    if let Some(node) = deg.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::DegenerateNode { node });
    }
    let a = g.adjacency();
    let n = g.n();
    Ok(DMatrix::from_fn(n, n, |i, j| a[(i, j)] / (deg[i] * deg[j]).sqrt()))
}
