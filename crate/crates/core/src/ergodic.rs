//! Closed-form limits of normalized skip-bigram counts, PMI matrices, and the
//! rank-constrained PSD projection of the unconstrained Gram solution.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{connected_components, stationary_distribution, transition_matrix, Graph};
use crate::linalg::{ensure_symmetric, reconstruct, sym_eigen_desc};

/// Which asymptotic regime produced a pair of coefficient matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitRegime {
    /// `ℓ → ∞` with `r` fixed.
    Ergodic,
    /// `r → ∞` with walk length fixed.
    FiniteR { length: usize },
    /// Both limits, in either order.
    Double,
}

/// Limiting positive (`N̄⁺`) and negative (`N̄⁻`) coefficient matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitCoefficients {
    pub positive: DMatrix<f64>,
    pub negative: DMatrix<f64>,
    pub regime: LimitRegime,
}

/// Walk-distance weights, either an explicit finite sequence or an analytic
/// family evaluated by truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkWeights {
    Finite(Vec<f64>),
    /// `α_v = 1/v!`; the positive limit becomes `π_i (exp W − I)_ij`.
    InverseFactorial,
    /// `α_v = ρ^v` with `0 ≤ ρ < 1`.
    Geometric(f64),
}

/// Tail mass allowed to be dropped when truncating an analytic family.
pub const TAIL_TOLERANCE: f64 = 1e-12;

impl WalkWeights {
    pub fn hard_window(w: usize) -> Self {
        WalkWeights::Finite(vec![1.0; w])
    }

    /// Finite prefix `α_1..α_V` whose absolute tail `Σ_{v>V} |α_v|` is below
    /// [`TAIL_TOLERANCE`].
    pub fn truncated(&self) -> Result<Vec<f64>> {
        match self {
            WalkWeights::Finite(a) => {
                if a.is_empty() || a.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid("walk weights must be a nonempty finite sequence"));
                }
                Ok(a.clone())
            }
            WalkWeights::InverseFactorial => {
                let mut out = Vec::new();
                let mut term = 1.0;
                for v in 1.. {
                    term /= v as f64;
                    out.push(term);
                    // Σ_{u>v} 1/u! ≤ (1/(v+1)!)·(v+2)/(v+1)
                    let next = term / (v + 1) as f64;
                    if next * ((v + 2) as f64) / ((v + 1) as f64) < TAIL_TOLERANCE {
                        break;
                    }
                }
                Ok(out)
            }
            WalkWeights::Geometric(rho) => {
                if !(0.0..1.0).contains(rho) {
                    return Err(Error::invalid(format!("geometric ratio {rho} must lie in [0, 1)")));
                }
                let mut out = Vec::new();
                let mut term = 1.0;
                loop {
                    term *= rho;
                    out.push(term);
                    if term * rho / (1.0 - rho) < TAIL_TOLERANCE {
                        break;
                    }
                }
                Ok(out)
            }
        }
    }
}

/// `N̄⁺ = diag(π) Σ_v α_v W^v`, `N̄⁻ = k (Σ_v α_v) π πᵀ`. W is block diagonal
/// over components, so cross-component entries of `N̄⁺` vanish on their own.
fn limits_from_walk(w: &DMatrix<f64>, pi: &DVector<f64>, alpha: &[f64], negatives: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = w.nrows();
    let mut power = DMatrix::identity(n, n);
    let mut series = DMatrix::zeros(n, n);
    for &a in alpha {
        power = &power * w;
        if a != 0.0 {
            series += &power * a;
        }
    }
    for (i, mut row) in series.row_iter_mut().enumerate() {
        row *= pi[i];
    }
    let scale = negatives as f64 * alpha.iter().sum::<f64>();
    let negative = pi * pi.transpose() * scale;
    (series, negative)
}

/// Ergodic limits for a hard window `w` on a graph with any number of components.
pub fn ergodic_limits(g: &Graph, window: usize, negatives: usize) -> Result<LimitCoefficients> {
    if window == 0 {
        return Err(Error::invalid("window must be at least 1"));
    }
    let w = transition_matrix(g)?;
    let pi = stationary_distribution(g)?;
    let (positive, negative) = limits_from_walk(&w, &pi, &vec![1.0; window], negatives);
    Ok(LimitCoefficients { positive, negative, regime: LimitRegime::Ergodic })
}

fn require_connected(g: &Graph) -> Result<()> {
    let comps = connected_components(g);
    if comps.count() != 1 {
        return Err(Error::Disconnected { components: comps.count() });
    }
    Ok(())
}

/// Large-`ℓ` limits of walk-distance weighted counts on a connected graph.
pub fn weighted_ergodic_limits(g: &Graph, weights: &WalkWeights, negatives: usize) -> Result<LimitCoefficients> {
    require_connected(g)?;
    let alpha = weights.truncated()?;
    let w = transition_matrix(g)?;
    let pi = stationary_distribution(g)?;
    let (positive, negative) = limits_from_walk(&w, &pi, &alpha, negatives);
    Ok(LimitCoefficients { positive, negative, regime: LimitRegime::Ergodic })
}

/// Double limits (`r` and `ℓ` both to infinity, either order). They coincide
/// with the large-`ℓ` limits.
pub fn double_limits(g: &Graph, weights: &WalkWeights, negatives: usize) -> Result<LimitCoefficients> {
    let mut out = weighted_ergodic_limits(g, weights, negatives)?;
    out.regime = LimitRegime::Double;
    Ok(out)
}

/// Large-`r` limits at fixed walk length `ℓ`, normalized by `ℓ·n`:
///
/// positive: `(1/ℓn) Σ_m Σ_v α_v (W^v)_ij Σ_{s=1}^{ℓ−v} (W^{s−1})_mi`,
/// negative: `(k π⁽ℓ⁾_j/ℓn) Σ_m Σ_v α_v Σ_{s=1}^{ℓ−v} (W^{s−1})_mi`,
/// with `π⁽ℓ⁾_j = (1/ℓ) Σ_{u=1}^{ℓ} (1/n) 1ᵀ W^{u−1} e_j`. Empty sums are zero.
/// The negative matrix is not symmetric in general and is returned as is.
pub fn finite_r_limits(g: &Graph, weights: &WalkWeights, negatives: usize, length: usize) -> Result<LimitCoefficients> {
    require_connected(g)?;
    if length < 2 {
        return Err(Error::invalid("walk length must be at least 2"));
    }
    let alpha = weights.truncated()?;
    let w = transition_matrix(g)?;
    let n = g.n();
    let wt = w.transpose();

    // visits[t] = Σ_{s=1}^{t} 1ᵀ W^{s−1}, the expected visit counts over the
    // first t positions summed over all start nodes
    let mut visits = Vec::with_capacity(length + 1);
    visits.push(DVector::zeros(n));
    let mut h = DVector::from_element(n, 1.0);
    for t in 1..=length {
        let next = &visits[t - 1] + &h;
        visits.push(next);
        h = &wt * &h;
    }
    let norm = (length * n) as f64;
    let pi_len = &visits[length] / norm;

    let mut positive = DMatrix::zeros(n, n);
    let mut start_mass = DVector::zeros(n);
    let mut power = DMatrix::identity(n, n);
    for (idx, &a) in alpha.iter().enumerate() {
        let v = idx + 1;
        if v >= length {
            break;
        }
        power = &power * &w;
        if a == 0.0 {
            continue;
        }
        let mass = &visits[length - v];
        for i in 0..n {
            let scale = a * mass[i];
            for j in 0..n {
                positive[(i, j)] += scale * power[(i, j)];
            }
        }
        start_mass += mass * a;
    }
    positive /= norm;
    let negative = DMatrix::from_fn(n, n, |i, j| negatives as f64 * pi_len[j] * start_mass[i] / norm);
    Ok(LimitCoefficients { positive, negative, regime: LimitRegime::FiniteR { length } })
}

/// Default floor used when `−∞` PMI entries must be made finite.
pub const PMI_FLOOR: f64 = -30.0;

/// PMI-style matrix over the extended reals. `−∞` is stored as
/// `f64::NEG_INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct PmiMatrix {
    values: DMatrix<f64>,
}

impl PmiMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn finite_mask(&self) -> DMatrix<bool> {
        self.values.map(f64::is_finite)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Replace `−∞` entries by `floor`.
    pub fn clipped(&self, floor: f64) -> DMatrix<f64> {
        self.values.map(|x| if x.is_finite() { x } else { floor })
    }
}

/// `PMI_ℓ(i,j) = ln(p(i,j) / (p₁(i)·p₂(j)))` from hard-window counts, with the
/// joint normalized by `|D₊| = r·n·(ℓw − w(w+1)/2)`.
pub fn empirical_pmi(positive: &DMatrix<f64>, window: usize, walks_per_node: usize, length: usize) -> Result<PmiMatrix> {
    let n = positive.nrows();
    if positive.ncols() != n {
        return Err(Error::shape((n, n), positive.shape()));
    }
    if positive.iter().all(|&x| x == 0.0) {
        return Err(Error::EmptyInput("positive counts are all zero".into()));
    }
    let pairs = crate::walks::hard_window_positive_mass(walks_per_node * n, length, window);
    let joint = positive / pairs;
    let rows: Vec<f64> = joint.row_iter().map(|r| r.sum()).collect();
    let cols: Vec<f64> = joint.column_iter().map(|c| c.sum()).collect();
    let values = DMatrix::from_fn(n, n, |i, j| {
        let p = joint[(i, j)];
        if p > 0.0 {
            (p / (rows[i] * cols[j])).ln()
        } else {
            f64::NEG_INFINITY
        }
    });
    Ok(PmiMatrix { values })
}

/// Minimizer of the unconstrained Gram objective: `ln(N̄⁺_ij / N̄⁻_ij)`, or
/// `−∞` where `N̄⁺_ij = 0`.
pub fn pmi_from_coefficients(positive: &DMatrix<f64>, negative: &DMatrix<f64>) -> Result<PmiMatrix> {
    if positive.shape() != negative.shape() {
        return Err(Error::shape(positive.shape(), negative.shape()));
    }
    if let Some(bad) = negative.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::invalid(format!("negative coefficients must be strictly positive, found {bad}")));
    }
    if positive.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::invalid("positive coefficients must be nonnegative"));
    }
    let values = positive.zip_map(negative, |p, q| if p > 0.0 { (p / q).ln() } else { f64::NEG_INFINITY });
    Ok(PmiMatrix { values })
}

pub fn gram_ergo_pmi(limits: &LimitCoefficients) -> Result<PmiMatrix> {
    pmi_from_coefficients(&limits.positive, &limits.negative)
}

/// Frobenius-nearest PSD matrix of rank at most `d`: keep the `d` largest
/// eigenvalues, clipped below at zero.
pub fn project_psd_rank(x: &DMatrix<f64>, d: usize) -> Result<DMatrix<f64>> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries; clip -inf PMI values first"));
    }
    ensure_symmetric(x, 1e-9)?;
    let (values, vectors) = sym_eigen_desc(x);
    let kept: Vec<f64> = values.iter().take(d).map(|&l| l.max(0.0)).collect();
    Ok(reconstruct(&kept, &vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn edge() -> Graph {
        Graph::from_adjacency(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
    }

    fn triangle() -> Graph {
        Graph::from_adjacency(DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 })).unwrap()
    }

    #[test]
    fn single_edge_limits() {
        let l = ergodic_limits(&edge(), 1, 5).unwrap();
        assert_eq!(l.positive, DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]));
        assert_eq!(l.negative, DMatrix::from_element(2, 2, 1.25));
        let l = ergodic_limits(&edge(), 2, 1).unwrap();
        assert_eq!(l.positive, DMatrix::from_element(2, 2, 0.5));
        assert_eq!(l.negative, DMatrix::from_element(2, 2, 0.5));
    }

    #[test]
    fn triangle_limits() {
        let l = ergodic_limits(&triangle(), 1, 1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.0 } else { 1.0 / 6.0 };
                assert_abs_diff_eq!(l.positive[(i, j)], want, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn inverse_factorial_single_edge() {
        // 20-term series oracle: odd powers of W are the swap, even powers identity
        let mut sinh = 0.0;
        let mut cosh_minus_one = 0.0;
        let mut fact = 1.0;
        for v in 1..=20 {
            fact *= v as f64;
            if v % 2 == 1 {
                sinh += 1.0 / fact;
            } else {
                cosh_minus_one += 1.0 / fact;
            }
        }
        let l = weighted_ergodic_limits(&edge(), &WalkWeights::InverseFactorial, 1).unwrap();
        assert_abs_diff_eq!(l.positive[(0, 1)], 0.5 * sinh, epsilon = 1e-12);
        assert_abs_diff_eq!(l.positive[(0, 0)], 0.5 * cosh_minus_one, epsilon = 1e-12);
        assert_abs_diff_eq!(l.positive[(0, 1)], 0.587_600_596, epsilon = 1e-6);
        assert_abs_diff_eq!(l.negative[(0, 1)], 0.25 * (sinh + cosh_minus_one), epsilon = 1e-12);
        assert_abs_diff_eq!(l.negative[(0, 1)], 0.429_570_457, epsilon = 1e-6);
    }

    #[test]
    fn weighted_specializations() {
        let g = triangle();
        let hard = ergodic_limits(&g, 3, 2).unwrap();
        let ones = weighted_ergodic_limits(&g, &WalkWeights::hard_window(3), 2).unwrap();
        assert!((hard.positive - ones.positive).amax() < 1e-15);
        let single = weighted_ergodic_limits(&g, &WalkWeights::Finite(vec![1.0]), 2).unwrap();
        assert_eq!(single.positive, ergodic_limits(&g, 1, 2).unwrap().positive);
        let double = double_limits(&g, &WalkWeights::Geometric(0.5), 2).unwrap();
        let ergo = weighted_ergodic_limits(&g, &WalkWeights::Geometric(0.5), 2).unwrap();
        assert_eq!(double.positive, ergo.positive);
        assert_eq!(double.regime, LimitRegime::Double);
    }

    #[test]
    fn truncation_tails() {
        let geo = WalkWeights::Geometric(0.5).truncated().unwrap();
        let tail = 0.5f64.powi(geo.len() as i32 + 1) / 0.5;
        assert!(tail < TAIL_TOLERANCE);
        assert!(WalkWeights::Geometric(1.0).truncated().is_err());
        let fact = WalkWeights::InverseFactorial.truncated().unwrap();
        assert!(fact.len() < 20);
    }

    #[test]
    fn weighted_needs_connected_graph() {
        let two = Graph::from_adjacency(DMatrix::from_row_slice(
            4,
            4,
            &[0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.],
        ))
        .unwrap();
        assert!(matches!(
            weighted_ergodic_limits(&two, &WalkWeights::Geometric(0.5), 1),
            Err(Error::Disconnected { components: 2 })
        ));
        // the hard-window version handles components
        let l = ergodic_limits(&two, 1, 1).unwrap();
        assert_eq!(l.positive[(0, 2)], 0.0);
        assert!(l.negative[(0, 2)] > 0.0);
        let pmi = gram_ergo_pmi(&l).unwrap();
        assert_eq!(pmi.values()[(0, 3)], f64::NEG_INFINITY);
        assert!(!pmi.finite_mask()[(0, 3)]);
    }

    #[test]
    fn finite_r_enumeration() {
        // length-2 walks on one edge: each of the 2 start nodes contributes one
        // pair (start, other), so N⁺_01 / (ℓ n) = 1 / 4
        let l = finite_r_limits(&edge(), &WalkWeights::Finite(vec![1.0]), 1, 2).unwrap();
        assert_abs_diff_eq!(l.positive[(0, 1)], 0.25, epsilon = 1e-15);
        assert_eq!(l.positive[(0, 0)], 0.0);
        let none = finite_r_limits(&edge(), &WalkWeights::Finite(vec![0.0, 0.0, 1.0]), 1, 3).unwrap();
        assert_eq!(none.positive, DMatrix::zeros(2, 2));
    }

    #[test]
    fn finite_r_approaches_ergodic() {
        let g = edge();
        let weights = WalkWeights::Finite(vec![1.0]);
        let fin = finite_r_limits(&g, &weights, 1, 500).unwrap();
        let erg = weighted_ergodic_limits(&g, &weights, 1).unwrap();
        assert!((&fin.positive - &erg.positive).norm() / erg.positive.norm() < 0.01);
        assert!((&fin.negative - &erg.negative).norm() / erg.negative.norm() < 0.01);
    }

    #[test]
    fn pmi_examples() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(pmi_from_coefficients(&a, &a).unwrap().values(), &DMatrix::zeros(2, 2));
        let l = ergodic_limits(&edge(), 1, 5).unwrap();
        let x = gram_ergo_pmi(&l).unwrap();
        assert_abs_diff_eq!(x.values()[(0, 1)], 0.4f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(x.values()[(0, 1)], -0.916_291, epsilon = 1e-6);
        assert_eq!(x.values()[(0, 0)], f64::NEG_INFINITY);
        assert_eq!(x.clipped(PMI_FLOOR)[(0, 0)], PMI_FLOOR);
        assert!(pmi_from_coefficients(&a, &DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn empirical_pmi_independent_joint() {
        // rank-1 joint with the mass of r = 1, n = 2, ℓ = 4, w = 1 → |D₊| = 6
        let rows = [0.25, 0.75];
        let cols = [0.5, 0.5];
        let joint = DMatrix::from_fn(2, 2, |i, j| rows[i] * cols[j] * 6.0);
        let pmi = empirical_pmi(&joint, 1, 1, 4).unwrap();
        for x in pmi.values().iter() {
            assert_abs_diff_eq!(*x, 0.0, epsilon = 1e-12);
        }
        let mut holes = joint.clone();
        holes[(0, 1)] = 0.0;
        assert_eq!(empirical_pmi(&holes, 1, 1, 4).unwrap().values()[(0, 1)], f64::NEG_INFINITY);
        assert!(empirical_pmi(&DMatrix::zeros(2, 2), 1, 1, 4).is_err());
    }

    #[test]
    fn projection_examples() {
        let x = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -1.0]);
        let p = project_psd_rank(&x, 2).unwrap();
        assert!((p - DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0])).amax() < 1e-12);
        let x = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let p = project_psd_rank(&x, 1).unwrap();
        assert!((p - DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 0.0, 0.0]))).amax() < 1e-12);
        let v = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, -1.0, 2.0, 0.3, 0.0]);
        let psd = &v * v.transpose();
        assert!((project_psd_rank(&psd, 2).unwrap() - &psd).amax() < 1e-12);
        let skew = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(project_psd_rank(&skew, 1), Err(Error::NotSymmetric(_))));
        let inf = DMatrix::from_element(2, 2, f64::NEG_INFINITY);
        assert!(project_psd_rank(&inf, 1).is_err());
    }
}
