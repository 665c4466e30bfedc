//! Natural random walks and skip-bigram counting.
//!
//! Every walk owns an independent ChaCha8 stream, so sampling can run in
//! parallel while staying bit-identical to a sequential run. Negative draws
//! are addressed by occurrence index through the generator's word position,
//! which makes them independent of scheduling as well.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{transition_matrix, Graph};

/// Per-gap weights applied to skip-bigram occurrences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSpec {
    /// `α_v = 1` for `v ≤ w`, zero beyond.
    HardWindow(usize),
    /// Explicit `α_1, …, α_V`.
    Weights(Vec<f64>),
}

impl WeightSpec {
    /// The gap weights `α_1..α_V` as a vector.
    pub fn gap_weights(&self) -> Vec<f64> {
        match self {
            WeightSpec::HardWindow(w) => vec![1.0; *w],
            WeightSpec::Weights(a) => a.clone(),
        }
    }

    pub fn max_gap(&self) -> usize {
        match self {
            WeightSpec::HardWindow(w) => *w,
            WeightSpec::Weights(a) => a.len(),
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.gap_weights().iter().sum()
    }

    fn validate(&self, length: usize) -> Result<()> {
        match self {
            WeightSpec::HardWindow(w) if *w == 0 || *w >= length => Err(Error::invalid(format!(
                "window w = {w} must satisfy 1 <= w < walk length {length}"
            ))),
            WeightSpec::Weights(a) if a.is_empty() || a.len() >= length => Err(Error::invalid(format!(
                "{} gap weights must be nonempty and fewer than the walk length {length}",
                a.len()
            ))),
            WeightSpec::Weights(a) if a.iter().any(|x| !x.is_finite()) => {
                Err(Error::invalid("gap weights must be finite"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Walks launched from every node (`r`).
    pub walks_per_node: usize,
    /// Nodes observed per walk (`ℓ`), including the start node.
    pub length: usize,
    pub weights: WeightSpec,
    /// Negative pairs per positive pair (`k`).
    pub negatives: usize,
    pub seed: u64,
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walks_per_node == 0 {
            return Err(Error::invalid("walks per node must be at least 1"));
        }
        if self.length < 2 {
            return Err(Error::invalid("walk length must be at least 2"));
        }
        self.weights.validate(self.length)
    }
}

/// `r·n` walks of equal length; walk `(m, p)` starts at node `m` and is stored
/// at index `m·r + p`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSet {
    n: usize,
    walks_per_node: usize,
    length: usize,
    nodes: Vec<u32>,
}

impl WalkSet {
    /// Build from explicit walks. All walks must share one length and every
    /// node id must be below `n`.
    pub fn from_walks(n: usize, walks: &[Vec<usize>]) -> Result<Self> {
        let length = walks.first().map(Vec::len).ok_or_else(|| Error::EmptyInput("no walks".into()))?;
        let mut nodes = Vec::with_capacity(walks.len() * length);
        for walk in walks {
            if walk.len() != length {
                return Err(Error::invalid("walks must all have the same length"));
            }
            if let Some(&bad) = walk.iter().find(|&&x| x >= n) {
                return Err(Error::invalid(format!("node id {bad} out of range for n = {n}")));
            }
            nodes.extend(walk.iter().map(|&x| x as u32));
        }
        // start indexing is only meaningful for sampled sets
        let walks_per_node = if walks.len() % n.max(1) == 0 { walks.len() / n.max(1) } else { 0 };
        Ok(Self { n, walks_per_node, length, nodes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn walks_per_node(&self) -> usize {
        self.walks_per_node
    }

    pub fn len(&self) -> usize {
        if self.length == 0 {
            0
        } else {
            self.nodes.len() / self.length
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn walk(&self, index: usize) -> &[u32] {
        &self.nodes[index * self.length..(index + 1) * self.length]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.nodes.chunks_exact(self.length.max(1))
    }
}

/// Positive and negative skip-bigram count matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct BigramCounts {
    pub positive: DMatrix<f64>,
    pub negative: DMatrix<f64>,
}

impl BigramCounts {
    /// Multiply both matrices by `factor`, typically `1/(r·n·ℓ)`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { positive: &self.positive * factor, negative: &self.negative * factor }
    }
}

/// Inverse-CDF sampler over nonnegative weights.
#[derive(Debug, Clone)]
struct CumulativeSampler {
    cdf: Vec<f64>,
    last: usize,
}

impl CumulativeSampler {
    fn new(weights: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut acc = 0.0;
        let mut last = None;
        let cdf: Vec<f64> = weights
            .into_iter()
            .enumerate()
            .map(|(i, w)| {
                if w > 0.0 {
                    last = Some(i);
                }
                acc += w;
                acc
            })
            .collect();
        last.map(|last| Self { cdf, last })
    }

    fn sample(&self, u: f64) -> usize {
        let target = u * self.cdf[self.last];
        self.cdf.partition_point(|&c| c <= target).min(self.last)
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha stream id of walk `(m, p)`: `splitmix64(m·2³² + p)` with the top bit cleared.
pub fn walk_stream_id(start: usize, repeat: usize) -> u64 {
    splitmix64(((start as u64) << 32) | repeat as u64) & !(1 << 63)
}

/// Stream id reserved for negative sampling (top bit set, disjoint from walk streams).
pub const NEGATIVE_STREAM_ID: u64 = (1 << 63) | 0x6e_6567; // "neg"

fn walk_rng(seed: u64, start: usize, repeat: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(walk_stream_id(start, repeat));
    rng
}

/// Sample `r` natural random walks of length `ℓ` from every node.
pub fn sample_walks(g: &Graph, cfg: &WalkConfig) -> Result<WalkSet> {
    cfg.validate()?;
    let w = transition_matrix(g)?;
    let n = g.n();
    let rows: Vec<CumulativeSampler> = w
        .row_iter()
        .map(|row| CumulativeSampler::new(row.iter().copied()).expect("rows of W are nonzero"))
        .collect();
    let (r, len) = (cfg.walks_per_node, cfg.length);
    let mut nodes = vec![0u32; n * r * len];
    nodes.par_chunks_mut(len).enumerate().for_each(|(index, walk)| {
        let (start, repeat) = (index / r, index % r);
        let mut rng = walk_rng(cfg.seed, start, repeat);
        let mut current = start;
        walk[0] = current as u32;
        for slot in walk.iter_mut().skip(1) {
            current = rows[current].sample(rng.random::<f64>());
            *slot = current as u32;
        }
    });
    Ok(WalkSet { n, walks_per_node: r, length: len, nodes })
}

/// Empirical node frequencies over every position of every walk.
pub fn unigram_distribution(ws: &WalkSet) -> Result<DVector<f64>> {
    if ws.is_empty() {
        return Err(Error::EmptyInput("walk set has no positions".into()));
    }
    let mut counts = DVector::zeros(ws.n());
    for &x in &ws.nodes {
        counts[x as usize] += 1.0;
    }
    Ok(counts / ws.nodes.len() as f64)
}

/// Fixed partition of walk indices into contiguous groups. Each group is
/// reduced on its own and groups are summed in index order, so the result
/// does not depend on the thread count.
fn walk_groups(total: usize, n: usize) -> Vec<std::ops::Range<usize>> {
    // keep the per-group dense accumulators under ~256 MB in total
    let by_memory = (32usize << 20) / (n * n).max(1);
    let groups = total.div_ceil(64).clamp(1, by_memory.clamp(1, 16));
    let size = total.div_ceil(groups).max(1);
    (0..total).step_by(size).map(|lo| lo..(lo + size).min(total)).collect()
}

fn reduce_groups<F>(ws: &WalkSet, per_walk: F) -> DMatrix<f64>
where
    F: Fn(usize, &[u32], &mut DMatrix<f64>) + Sync,
{
    let n = ws.n();
    let parts: Vec<DMatrix<f64>> = walk_groups(ws.len(), n)
        .into_par_iter()
        .map(|range| {
            let mut acc = DMatrix::zeros(n, n);
            for index in range {
                per_walk(index, ws.walk(index), &mut acc);
            }
            acc
        })
        .collect();
    parts.into_iter().fold(DMatrix::zeros(n, n), |acc, part| acc + part)
}

/// Forward skip-bigram counts `N⁺_ij = Σ_walks Σ_v α_v Σ_s 1{X_s = i, X_{s+v} = j}`.
pub fn count_positive(ws: &WalkSet, weights: &WeightSpec) -> Result<DMatrix<f64>> {
    weights.validate(ws.length())?;
    let alpha = weights.gap_weights();
    Ok(reduce_groups(ws, |_, walk, acc| {
        for (s, &i) in walk.iter().enumerate() {
            for (v, &a) in alpha.iter().enumerate() {
                if let Some(&j) = walk.get(s + v + 1) {
                    acc[(i as usize, j as usize)] += a;
                }
            }
        }
    }))
}

/// Number of (position, gap) occurrences in one walk.
fn occurrences_per_walk(length: usize, max_gap: usize) -> u64 {
    (1..=max_gap.min(length - 1)).map(|v| (length - v) as u64).sum()
}

/// Negative counts: every positive occurrence `(X_s, X_{s+v})` draws `k`
/// nodes from the walk-set unigram distribution and adds `α_v` to
/// `N⁻[X_s][draw]`.
///
/// Occurrences are numbered walk by walk (in storage order), then by
/// position, then by gap; occurrence `o` reads its `k` uniforms from the
/// negative stream starting at word `2·k·o`.
pub fn sample_negative(ws: &WalkSet, weights: &WeightSpec, negatives: usize, seed: u64) -> Result<DMatrix<f64>> {
    weights.validate(ws.length())?;
    let n = ws.n();
    if negatives == 0 {
        return Ok(DMatrix::zeros(n, n));
    }
    let unigram = unigram_distribution(ws)?;
    let sampler = CumulativeSampler::new(unigram.iter().copied()).expect("unigram has mass");
    let alpha = weights.gap_weights();
    let per_walk = occurrences_per_walk(ws.length(), alpha.len());
    let words_per_occurrence = 2 * negatives as u128;
    Ok(reduce_groups(ws, |index, walk, acc| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(NEGATIVE_STREAM_ID);
        let mut occurrence = index as u64 * per_walk;
        for (s, &i) in walk.iter().enumerate() {
            for (v, &a) in alpha.iter().enumerate() {
                if s + v + 1 >= walk.len() {
                    break;
                }
                if a != 0.0 {
                    rng.set_word_pos(occurrence as u128 * words_per_occurrence);
                    for _ in 0..negatives {
                        let j = sampler.sample(rng.random::<f64>());
                        acc[(i as usize, j)] += a;
                    }
                }
                occurrence += 1;
            }
        }
    }))
}

/// Positive counts from `ws` and negative counts drawn with `cfg.seed`.
pub fn count_bigrams(ws: &WalkSet, cfg: &WalkConfig) -> Result<BigramCounts> {
    Ok(BigramCounts {
        positive: count_positive(ws, &cfg.weights)?,
        negative: sample_negative(ws, &cfg.weights, cfg.negatives, cfg.seed)?,
    })
}

/// Exact positive mass under a hard window: `r·n·(ℓw − w(w+1)/2)`.
pub fn hard_window_positive_mass(walks: usize, length: usize, window: usize) -> f64 {
    walks as f64 * (length * window) as f64 - walks as f64 * (window * (window + 1) / 2) as f64
}
