//! Graph preparation, the five embedding pipelines and per-run metrics.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use ergonode::ergodic::{ergodic_limits, gram_ergo_pmi, project_psd_rank, PMI_FLOOR};
use ergonode::graph::{expected_sbm_graph, generate_sbm, smooth_graph, Graph};
use ergonode::io::{edge_list_node_count, read_edge_list, read_labels};
use ergonode::metrics::{spectral_embedding, svd_coordinates};
use ergonode::nuclear::{solve_nuc, NucConfig, NucRecord};
use ergonode::objective::factorize_gram;
use ergonode::sgd::{solve_embeddings_sgd, EpochRecord, SgdConfig};
use ergonode::walks::{count_bigrams, sample_walks, WalkConfig, WeightSpec};
use ergonode::{Error, Result};

use crate::config::{Algorithm, ExperimentConfig, GraphSpec};

/// A graph ready for embedding, plus what was done to it.
#[derive(Debug, Clone)]
pub struct PreparedGraph {
    pub raw: Graph,
    pub graph: Graph,
    pub epsilon: f64,
}

impl PreparedGraph {
    pub fn labels(&self) -> Option<&[usize]> {
        self.graph.labels()
    }
}

pub fn load_raw_graph(spec: &GraphSpec, seed: u64) -> Result<Graph> {
    match spec {
        GraphSpec::Sbm(params) => generate_sbm(params, seed),
        GraphSpec::Expected { m, a, b } => expected_sbm_graph(*m, *a, *b),
        GraphSpec::File { edges, labels } => {
            let labels = labels.as_ref().map(|p| read_labels(p)).transpose()?;
            let n = match &labels {
                Some(l) => Some(l.len()),
                None => edge_list_node_count(edges)?,
            };
            let g = read_edge_list(edges, n)?;
            match labels {
                Some(l) => g.with_labels(l),
                None => Ok(g),
            }
        }
    }
}

/// Default smoothing: `1/(10n)` for sampled or loaded graphs, none for the
/// expected graph, which is already complete.
pub fn default_epsilon(spec: &GraphSpec, n: usize) -> f64 {
    match spec {
        GraphSpec::Expected { .. } => 0.0,
        _ => 1.0 / (10.0 * n as f64),
    }
}

pub fn prepare_graph(spec: &GraphSpec, epsilon: Option<f64>, seed: u64) -> Result<PreparedGraph> {
    let raw = load_raw_graph(spec, seed)?;
    let epsilon = epsilon.unwrap_or_else(|| default_epsilon(spec, raw.n()));
    let graph = smooth_graph(&raw, epsilon)?;
    Ok(PreparedGraph { raw, graph, epsilon })
}

/// Everything an embedding run needs besides the graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedParams {
    pub algorithm: Algorithm,
    pub w: usize,
    pub k: usize,
    pub d: usize,
    pub r: usize,
    pub length: usize,
    pub nu0: f64,
    pub seed: u64,
    pub sgd: SgdConfig,
    pub nuc: NucConfig,
}

impl EmbedParams {
    pub fn from_config(cfg: &ExperimentConfig, seed: u64) -> Self {
        EmbedParams {
            algorithm: cfg.algorithm,
            w: cfg.w,
            k: cfg.k,
            d: cfg.d,
            r: cfg.r,
            length: cfg.length,
            nu0: cfg.nu0,
            seed,
            sgd: cfg.sgd.clone(),
            nuc: cfg.nuc.clone(),
        }
    }

    fn sgd_config(&self) -> SgdConfig {
        SgdConfig { d: self.d, seed: self.seed, ..self.sgd.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct EmbedOutput {
    pub embedding: DMatrix<f64>,
    pub sgd_trace: Option<Vec<EpochRecord>>,
    pub nuc_trace: Option<Vec<NucRecord>>,
}

/// Skip-bigram counts from sampled walks, normalized by `r·n·ℓ` so they sit on
/// the same scale as the ergodic limits.
pub fn normalized_walk_counts(g: &Graph, p: &EmbedParams) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let cfg = WalkConfig {
        walks_per_node: p.r,
        length: p.length,
        weights: WeightSpec::HardWindow(p.w),
        negatives: p.k,
        seed: p.seed,
    };
    let walks = sample_walks(g, &cfg)?;
    let counts = count_bigrams(&walks, &cfg)?;
    let scale = 1.0 / (p.r * g.n() * p.length) as f64;
    let scaled = counts.scaled(scale);
    Ok((scaled.positive, scaled.negative))
}

pub fn embed(g: &Graph, p: &EmbedParams) -> Result<EmbedOutput> {
    let plain = |embedding| EmbedOutput { embedding, sgd_trace: None, nuc_trace: None };
    match p.algorithm {
        Algorithm::Vec => {
            let (pos, neg) = normalized_walk_counts(g, p)?;
            let (u, trace) = solve_embeddings_sgd(&pos, &neg, &p.sgd_config())?;
            Ok(EmbedOutput { embedding: u, sgd_trace: Some(trace), nuc_trace: None })
        }
        Algorithm::Ergovec => {
            let limits = ergodic_limits(g, p.w, p.k)?;
            let (u, trace) = solve_embeddings_sgd(&limits.positive, &limits.negative, &p.sgd_config())?;
            Ok(EmbedOutput { embedding: u, sgd_trace: Some(trace), nuc_trace: None })
        }
        Algorithm::Ergopmi => {
            let limits = ergodic_limits(g, p.w, p.k)?;
            let pmi = gram_ergo_pmi(&limits)?.clipped(PMI_FLOOR);
            let gram = project_psd_rank(&pmi, p.d)?;
            Ok(plain(factorize_gram(&gram, p.d)?))
        }
        Algorithm::Nucgram => {
            if !(p.nu0 >= 0.0) {
                return Err(Error::InvalidParameter(format!("nu0 must be nonnegative, got {}", p.nu0)));
            }
            let limits = ergodic_limits(g, p.w, p.k)?;
            let cfg = NucConfig { nu: p.nu0 * g.n() as f64, seed: p.seed, ..p.nuc.clone() };
            let sol = solve_nuc(&limits.positive, &limits.negative, &cfg)?;
            let u = factorize_gram(&sol.gram, p.d)?;
            Ok(EmbedOutput { embedding: u, sgd_trace: None, nuc_trace: Some(sol.trace) })
        }
        Algorithm::Spectral => Ok(plain(spectral_embedding(g, p.d)?)),
    }
}

/// Population variance of each SVD coordinate over all nodes.
pub fn coordinate_variances(u: &DMatrix<f64>) -> Result<Vec<f64>> {
    if u.iter().all(|&x| x == 0.0) {
        return Ok(vec![0.0; u.ncols()]);
    }
    let c = svd_coordinates(u)?;
    let n = c.nrows() as f64;
    Ok(c.column_iter()
        .map(|col| {
            let mean = col.sum() / n;
            col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
        })
        .collect())
}

pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
