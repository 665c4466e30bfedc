//! Weighted undirected graphs, stochastic block model generation, smoothing,
//! and the natural random walk on a graph.
//!
//! Graphs are stored densely: every consumer downstream needs powers of the
//! transition matrix, which are dense regardless of the input sparsity.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weighted undirected simple graph with a dense symmetric adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: DMatrix<f64>,
    labels: Option<Vec<usize>>,
}

impl Graph {
    /// Build a graph from a symmetric, nonnegative adjacency matrix with zero diagonal.
    pub fn from_adjacency(adjacency: DMatrix<f64>) -> Result<Self> {
        let n = adjacency.nrows();
        if adjacency.ncols() != n {
            return Err(Error::shape((n, n), adjacency.shape()));
        }
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return Err(Error::invalid(format!("self-loop on node {i}")));
            }
            for j in 0..n {
                let a = adjacency[(i, j)];
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::invalid(format!("weight ({i},{j}) = {a} is not a finite nonnegative number")));
                }
                if a != adjacency[(j, i)] {
                    return Err(Error::NotSymmetric((a - adjacency[(j, i)]).abs()));
                }
            }
        }
        Ok(Self { adjacency, labels: None })
    }

    pub fn empty(n: usize) -> Self {
        Self { adjacency: DMatrix::zeros(n, n), labels: None }
    }

    /// Attach per-node community labels.
    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::invalid(format!("{} labels for {} nodes", labels.len(), self.n())));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency[(i, j)]
    }

    pub fn degrees(&self) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.adjacency.row_iter().map(|r| r.sum()))
    }

    /// Number of unordered node pairs joined by a positive weight.
    pub fn edge_count(&self) -> usize {
        let n = self.n();
        (0..n).map(|i| ((i + 1)..n).filter(|&j| self.adjacency[(i, j)] > 0.0).count()).sum()
    }
}

/// Degree-scaling regime used to evaluate SBM edge probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SbmRegime {
    /// Full K×K probability matrix, row-major.
    Explicit { probabilities: Vec<Vec<f64>> },
    /// Within-block `p`, cross-block `q`, constant in `n`.
    Linear { p: f64, q: f64 },
    /// `p = p_scale·ln(n)/n`, `q = q_scale·ln(n)/n`, clipped to `[0, 1]`.
    Logarithmic { p_scale: f64, q_scale: f64 },
}

/// Parameters of a stochastic block model with equal, contiguous blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub n: usize,
    pub blocks: usize,
    pub regime: SbmRegime,
}

impl SbmParams {
    pub fn two_block(n: usize, regime: SbmRegime) -> Self {
        Self { n, blocks: 2, regime }
    }

    /// The K×K edge probability matrix after evaluating the regime at `n`.
    pub fn edge_probabilities(&self) -> Result<DMatrix<f64>> {
        let k = self.blocks;
        if k == 0 {
            return Err(Error::invalid("block count must be positive"));
        }
        let b = match &self.regime {
            SbmRegime::Explicit { probabilities } => {
                if probabilities.len() != k || probabilities.iter().any(|r| r.len() != k) {
                    return Err(Error::invalid(format!("probability matrix must be {k}x{k}")));
                }
                DMatrix::from_fn(k, k, |i, j| probabilities[i][j])
            }
            SbmRegime::Linear { p, q } => block_matrix(k, *p, *q),
            SbmRegime::Logarithmic { p_scale, q_scale } => {
                if *p_scale < 0.0 || *q_scale < 0.0 {
                    return Err(Error::invalid("logarithmic scale factors must be nonnegative"));
                }
                let rate = (self.n as f64).ln() / self.n as f64;
                block_matrix(k, (p_scale * rate).min(1.0), (q_scale * rate).min(1.0))
            }
        };
        for i in 0..k {
            for j in 0..k {
                let p = b[(i, j)];
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::invalid(format!("edge probability B[{i}][{j}] = {p} outside [0, 1]")));
                }
                if p != b[(j, i)] {
                    return Err(Error::invalid("edge probability matrix must be symmetric"));
                }
            }
        }
        Ok(b)
    }

    /// Whether the two-block logarithmic regime clears the exact-recovery
    /// threshold `√p̃ − √q̃ > √2`. `None` for other regimes.
    pub fn exact_recovery_threshold(&self) -> Option<bool> {
        match self.regime {
            SbmRegime::Logarithmic { p_scale, q_scale } if self.blocks == 2 => {
                Some(p_scale.sqrt() - q_scale.sqrt() > std::f64::consts::SQRT_2)
            }
            _ => None,
        }
    }

    /// Block-contiguous labels: the first `n/K` nodes are block 0, and so on.
    pub fn labels(&self) -> Result<Vec<usize>> {
        if self.blocks == 0 || self.n % self.blocks != 0 {
            return Err(Error::invalid(format!(
                "n = {} is not divisible into {} equal blocks",
                self.n, self.blocks
            )));
        }
        let size = self.n / self.blocks;
        Ok((0..self.n).map(|i| i / size).collect())
    }
}

fn block_matrix(k: usize, within: f64, across: f64) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |i, j| if i == j { within } else { across })
}

/// Sample an SBM graph. Every unordered pair `{i, j}` is an edge of weight 1
/// with probability `B[y_i][y_j]`, independently; pairs are visited in
/// row-major upper-triangular order from a single seeded stream.
pub fn generate_sbm(params: &SbmParams, seed: u64) -> Result<Graph> {
    let b = params.edge_probabilities()?;
    let labels = params.labels()?;
    let n = params.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adjacency = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let p = b[(labels[i], labels[j])];
            if rng.random::<f64>() < p {
                adjacency[(i, j)] = 1.0;
                adjacency[(j, i)] = 1.0;
            }
        }
    }
    Ok(Graph { adjacency, labels: Some(labels) })
}

/// Expected graph of a balanced two-block SBM on `2m` nodes: weight `a`
/// within blocks, `b` across, zero diagonal.
pub fn expected_sbm_graph(m: usize, a: f64, b: f64) -> Result<Graph> {
    check_expected_params(m, a, b)?;
    let n = 2 * m;
    let adjacency = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else if (i < m) == (j < m) {
            a
        } else {
            b
        }
    });
    let labels = (0..n).map(|i| usize::from(i >= m)).collect();
    Ok(Graph { adjacency, labels: Some(labels) })
}

pub(crate) fn check_expected_params(m: usize, a: f64, b: f64) -> Result<()> {
    if m < 2 {
        return Err(Error::invalid("half-size m must be at least 2"));
    }
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(Error::invalid(format!("probabilities a = {a}, b = {b} must lie in [0, 1]")));
    }
    let mf = m as f64;
    if a <= mf / (mf - 1.0) * b {
        return Err(Error::AssumptionViolation(format!(
            "need a > m/(m-1)·b, got a = {a}, b = {b}, m = {m}"
        )));
    }
    Ok(())
}

/// Add `eps` to every off-diagonal weight. The diagonal stays zero.
pub fn smooth_graph(g: &Graph, eps: f64) -> Result<Graph> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!("smoothing eps = {eps} must be finite and nonnegative")));
    }
    let n = g.n();
    let mut adjacency = g.adjacency.clone();
    if eps > 0.0 {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    adjacency[(i, j)] += eps;
                }
            }
        }
    }
    Ok(Graph { adjacency, labels: g.labels.clone() })
}

/// Connected components under positive-weight reachability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentDecomposition {
    /// Component id per node, numbered from 0 in order of first appearance.
    pub assignment: Vec<usize>,
    /// Node count per component.
    pub sizes: Vec<usize>,
}

impl ComponentDecomposition {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

pub fn connected_components(g: &Graph) -> ComponentDecomposition {
    let n = g.n();
    let mut assignment = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if assignment[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        assignment[start] = id;
        stack.push(start);
        while let Some(u) = stack.pop() {
            size += 1;
            for v in 0..n {
                if assignment[v] == usize::MAX && g.adjacency[(u, v)] > 0.0 {
                    assignment[v] = id;
                    stack.push(v);
                }
            }
        }
        sizes.push(size);
    }
    ComponentDecomposition { assignment, sizes }
}

fn positive_degrees(g: &Graph) -> Result<DVector<f64>> {
    let degrees = g.degrees();
    if let Some(node) = degrees.iter().position(|&d| d <= 0.0) {
        return Err(Error::DegenerateNode { node });
    }
    Ok(degrees)
}

/// Natural random walk transition matrix `W = D⁻¹A`.
pub fn transition_matrix(g: &Graph) -> Result<DMatrix<f64>> {
    let degrees = positive_degrees(g)?;
    let mut w = g.adjacency.clone();
    for (i, mut row) in w.row_iter_mut().enumerate() {
        row /= degrees[i];
    }
    Ok(w)
}

/// Stationary distribution of the natural random walk with walks spread
/// uniformly over start nodes: within component `t`,
/// `π_i = (n_t / n)·d_i / Σ_{j∈t} d_j`.
pub fn stationary_distribution(g: &Graph) -> Result<DVector<f64>> {
    let degrees = positive_degrees(g)?;
    let comps = connected_components(g);
    let n = g.n() as f64;
    let mut volume = vec![0.0; comps.count()];
    for (i, &c) in comps.assignment.iter().enumerate() {
        volume[c] += degrees[i];
    }
    Ok(DVector::from_fn(g.n(), |i, _| {
        let c = comps.assignment[i];
        comps.sizes[c] as f64 / n * degrees[i] / volume[c]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn path(edges: &[(usize, usize)], n: usize) -> Graph {
        let mut a = DMatrix::zeros(n, n);
        for &(i, j) in edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        Graph::from_adjacency(a).unwrap()
    }

    #[test]
    fn sbm_extremes() {
        let full = SbmParams::two_block(4, SbmRegime::Explicit { probabilities: vec![vec![1.0, 1.0], vec![1.0, 1.0]] });
        let g = generate_sbm(&full, 17).unwrap();
        assert_eq!(g.edge_count(), 6);
        let none = SbmParams::two_block(4, SbmRegime::Linear { p: 0.0, q: 0.0 });
        assert_eq!(generate_sbm(&none, 17).unwrap().edge_count(), 0);
    }

    #[test]
    fn sbm_rejects_bad_probability() {
        let bad = SbmParams::two_block(4, SbmRegime::Linear { p: 1.2, q: 0.1 });
        assert!(matches!(generate_sbm(&bad, 0), Err(Error::InvalidParameter(_))));
        let odd = SbmParams::two_block(5, SbmRegime::Linear { p: 0.5, q: 0.1 });
        assert!(generate_sbm(&odd, 0).is_err());
    }

    #[test]
    fn sbm_is_deterministic_per_seed() {
        let p = SbmParams::two_block(60, SbmRegime::Linear { p: 0.3, q: 0.05 });
        assert_eq!(generate_sbm(&p, 9).unwrap(), generate_sbm(&p, 9).unwrap());
        assert_ne!(generate_sbm(&p, 9).unwrap(), generate_sbm(&p, 10).unwrap());
    }

    #[test]
    fn sbm_mean_degree_linear_regime() {
        let p = SbmParams::two_block(500, SbmRegime::Linear { p: 0.6, q: 0.06 });
        let mean: f64 = (0..20)
            .map(|seed| generate_sbm(&p, seed).unwrap().degrees().mean())
            .sum::<f64>()
            / 20.0;
        let expected = 0.6 * 249.0 + 0.06 * 250.0;
        assert!((mean - expected).abs() / expected < 0.05, "mean degree {mean}");
    }

    #[test]
    fn sbm_edge_count_within_three_sigma() {
        let p = SbmParams::two_block(40, SbmRegime::Linear { p: 0.4, q: 0.1 });
        let b = p.edge_probabilities().unwrap();
        let labels = p.labels().unwrap();
        let (mut mean, mut var) = (0.0, 0.0);
        for i in 0..40 {
            for j in (i + 1)..40 {
                let q = b[(labels[i], labels[j])];
                mean += q;
                var += q * (1.0 - q);
            }
        }
        let seeds = 50;
        let total: usize = (0..seeds).map(|s| generate_sbm(&p, s).unwrap().edge_count()).sum();
        let sd = (var * seeds as f64).sqrt();
        assert!((total as f64 - mean * seeds as f64).abs() < 3.0 * sd);
    }

    #[test]
    fn log_regime_probabilities_and_threshold() {
        let p = SbmParams::two_block(500, SbmRegime::Logarithmic { p_scale: 9.0, q_scale: 2.0 });
        let b = p.edge_probabilities().unwrap();
        let rate = 500f64.ln() / 500.0;
        assert_abs_diff_eq!(b[(0, 0)], 9.0 * rate, epsilon = 1e-15);
        assert_abs_diff_eq!(b[(0, 1)], 2.0 * rate, epsilon = 1e-15);
        assert_eq!(p.exact_recovery_threshold(), Some(true));
        let below = SbmParams::two_block(500, SbmRegime::Logarithmic { p_scale: 4.0, q_scale: 1.0 });
        assert_eq!(below.exact_recovery_threshold(), Some(false));
        // tiny n pushes p̃ ln n / n over 1; it is clipped, not rejected
        let tiny = SbmParams::two_block(4, SbmRegime::Logarithmic { p_scale: 9.0, q_scale: 2.0 });
        assert_eq!(tiny.edge_probabilities().unwrap()[(0, 0)], 1.0);
    }

    #[test]
    fn expected_graph_rows() {
        let g = expected_sbm_graph(2, 0.6, 0.06).unwrap();
        let row: Vec<f64> = g.adjacency().row(0).iter().copied().collect();
        assert_eq!(row, vec![0.0, 0.6, 0.06, 0.06]);
        let g = expected_sbm_graph(2, 1.0, 0.0).unwrap();
        assert_eq!(connected_components(&g).sizes, vec![2, 2]);
        assert_eq!(g.edge_count(), 2);
        let g = expected_sbm_graph(50, 0.6, 0.06).unwrap();
        for d in g.degrees().iter() {
            assert_abs_diff_eq!(*d, 49.0 * 0.6 + 50.0 * 0.06, epsilon = 1e-12);
        }
    }

    #[test]
    fn expected_graph_checks_assumption() {
        assert!(matches!(expected_sbm_graph(2, 0.1, 0.1), Err(Error::AssumptionViolation(_))));
        assert!(expected_sbm_graph(1, 0.6, 0.1).is_err());
    }

    #[test]
    fn smoothing() {
        let g = path(&[(0, 1)], 3);
        assert_eq!(smooth_graph(&g, 0.0).unwrap(), g);
        let s = smooth_graph(&Graph::empty(3), 0.5).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(s.weight(i, j), if i == j { 0.0 } else { 0.5 });
            }
        }
        assert_eq!(connected_components(&s).count(), 1);

        let p = SbmParams::two_block(100, SbmRegime::Linear { p: 0.05, q: 0.01 });
        let g = generate_sbm(&p, 3).unwrap();
        let eps = 1.0 / (10.0 * 100.0);
        let s = smooth_graph(&g, eps).unwrap();
        let diff = s.degrees() - g.degrees();
        for d in diff.iter() {
            assert_abs_diff_eq!(*d, eps * 99.0, epsilon = 1e-12);
            assert!(*d < 0.1);
        }
        assert!(smooth_graph(&g, -1.0).is_err());
    }

    #[test]
    fn components() {
        let complete = smooth_graph(&Graph::empty(5), 1.0).unwrap();
        assert_eq!(connected_components(&complete).count(), 1);
        assert_eq!(connected_components(&Graph::empty(3)).sizes, vec![1, 1, 1]);
        let two = path(&[(0, 1), (2, 3)], 4);
        let c = connected_components(&two);
        assert_eq!(c.assignment, vec![0, 0, 1, 1]);
        assert_eq!(c.sizes, vec![2, 2]);
    }

    #[test]
    fn transition_examples() {
        let edge = path(&[(0, 1)], 2);
        assert_eq!(transition_matrix(&edge).unwrap(), DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let tri = path(&[(0, 1), (1, 2), (0, 2)], 3);
        let w = transition_matrix(&tri).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(w[(i, j)], if i == j { 0.0 } else { 0.5 });
            }
        }
        let g = expected_sbm_graph(2, 0.6, 0.06).unwrap();
        let w = transition_matrix(&g).unwrap();
        assert_abs_diff_eq!(w[(0, 1)], 0.6 / 0.72, epsilon = 1e-15);
        assert_abs_diff_eq!(w[(0, 2)], 0.06 / 0.72, epsilon = 1e-15);
        assert!(matches!(transition_matrix(&path(&[(0, 1)], 3)), Err(Error::DegenerateNode { node: 2 })));
    }

    #[test]
    fn stationary_examples() {
        let cycle = path(&[(0, 1), (1, 2), (2, 3), (3, 0)], 4);
        for p in stationary_distribution(&cycle).unwrap().iter() {
            assert_abs_diff_eq!(*p, 0.25, epsilon = 1e-15);
        }
        let split = path(&[(0, 1), (2, 3)], 4);
        assert_eq!(stationary_distribution(&split).unwrap().as_slice(), &[0.25; 4]);
        let star = path(&[(0, 1), (0, 2), (0, 3)], 4);
        let pi = stationary_distribution(&star).unwrap();
        assert_abs_diff_eq!(pi[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(pi[1], 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn stationary_is_left_fixed_point() {
        let p = SbmParams::two_block(30, SbmRegime::Linear { p: 0.5, q: 0.1 });
        let g = smooth_graph(&generate_sbm(&p, 4).unwrap(), 1.0 / 300.0).unwrap();
        let w = transition_matrix(&g).unwrap();
        for row in w.row_iter() {
            assert_abs_diff_eq!(row.sum(), 1.0, epsilon = 1e-12);
        }
        let pi = stationary_distribution(&g).unwrap();
        let moved = w.transpose() * &pi;
        assert!((moved - &pi).amax() < 1e-12);
        assert_abs_diff_eq!(pi.sum(), 1.0, epsilon = 1e-12);
    }
}
