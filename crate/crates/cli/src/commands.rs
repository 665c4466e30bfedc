//! The four subcommands. Each is a pure function of the config and the files
//! it reads, so re-running with the same config rewrites identical bytes.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use ergonode::io::{fmt_f64, read_embedding_csv, write_edge_list, write_embedding_csv, write_labels, write_nuc_trace, write_sgd_trace};
use ergonode::metrics::{gaussian_ellipse, gram_distance, procrustes_align, snr_1d, svd_coordinates, SnrMode};
use ergonode::Error;

use crate::config::{Algorithm, ExperimentConfig, GraphSpec, SweepAxis};
use crate::pipeline::{coordinate_variances, embed, load_raw_graph, prepare_graph, EmbedParams};

pub const ELLIPSE_CONFIDENCE: f64 = 0.95;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Divergence { .. }
            | Error::Numerical(_)
            | Error::NotPsd { .. }
            | Error::NotSymmetric(_)
            | Error::UndefinedMetric(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn seed_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed-{seed}"))
}

fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// JSON has no infinities, so non-finite values become the strings
/// `"inf"`, `"-inf"` and `"nan"`.
pub fn json_f64(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None => Value::String(fmt_f64(x)),
    }
}

/// One evaluation result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRecord {
    pub metric: String,
    pub value: Value,
    pub params: Map<String, Value>,
}

impl MetricRecord {
    fn new(metric: &str, value: Value, params: Value) -> Self {
        let params = match params {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        MetricRecord { metric: metric.to_string(), value, params }
    }
}

fn block_probabilities(spec: &GraphSpec) -> CliResult<Option<(f64, f64)>> {
    Ok(match spec {
        GraphSpec::Sbm(p) => {
            let b = p.edge_probabilities()?;
            if b.nrows() >= 2 { Some((b[(0, 0)], b[(0, 1)])) } else { None }
        }
        GraphSpec::Expected { a, b, .. } => Some((*a, *b)),
        GraphSpec::File { .. } => None,
    })
}

/// Write `edges.tsv`, `labels.txt` and `manifest.json` under `out/seed-S` for
/// every seed. The edge list is the unsmoothed graph; the manifest records
/// the ε that `embed` will apply.
pub fn cmd_generate(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    cfg.validate().map_err(CliError::Config)?;
    if matches!(cfg.graph, GraphSpec::File { .. }) {
        return Err(CliError::Config("generate needs an sbm or expected graph source".into()));
    }
    let (p, q) = match block_probabilities(&cfg.graph)? {
        Some((p, q)) => (Some(p), Some(q)),
        None => (None, None),
    };
    let threshold = match &cfg.graph {
        GraphSpec::Sbm(params) => params.exact_recovery_threshold(),
        _ => None,
    };
    let mut dirs = Vec::new();
    for &seed in &cfg.seeds {
        let g = load_raw_graph(&cfg.graph, seed)?;
        let dir = seed_dir(&cfg.out, seed);
        fs::create_dir_all(&dir)?;
        write_edge_list(&g, &dir.join("edges.tsv"))?;
        if let Some(labels) = g.labels() {
            write_labels(labels, &dir.join("labels.txt"))?;
        }
        let epsilon = cfg.epsilon.unwrap_or_else(|| crate::pipeline::default_epsilon(&cfg.graph, g.n()));
        let manifest = json!({
            "command": "generate",
            "seed": seed,
            "n": g.n(),
            "edges": g.edge_count(),
            "graph": cfg.graph,
            "p": p,
            "q": q,
            "exact_recovery_threshold": threshold,
            "epsilon": epsilon,
        });
        write_json(&manifest, &dir.join("manifest.json"))?;
        dirs.push(dir);
    }
    Ok(dirs)
}

/// Run the configured algorithm for every seed and write `embedding.csv`,
/// `trace.csv` (iterative solvers only) and `manifest.json`.
pub fn cmd_embed(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    cfg.validate().map_err(CliError::Config)?;
    let mut dirs = Vec::new();
    for &seed in &cfg.seeds {
        let prepared = prepare_graph(&cfg.graph, cfg.epsilon, seed)?;
        let params = EmbedParams::from_config(cfg, seed);
        let out = embed(&prepared.graph, &params)?;
        let dir = seed_dir(&cfg.out, seed);
        fs::create_dir_all(&dir)?;
        write_embedding_csv(&out.embedding, prepared.labels(), &dir.join("embedding.csv"))?;
        let mut final_objective = None;
        if let Some(trace) = &out.sgd_trace {
            write_sgd_trace(trace, &dir.join("trace.csv"))?;
            final_objective = trace.last().map(|r| r.objective);
        }
        if let Some(trace) = &out.nuc_trace {
            write_nuc_trace(trace, &dir.join("trace.csv"))?;
            final_objective = trace.last().map(|r| r.objective);
        }
        // record the solver settings that actually ran, not the config placeholders
        let mut recorded = params.clone();
        recorded.sgd.d = params.d;
        recorded.sgd.seed = seed;
        recorded.nuc.seed = seed;
        recorded.nuc.nu = params.nu0 * prepared.graph.n() as f64;
        let manifest = json!({
            "command": "embed",
            "seed": seed,
            "n": prepared.graph.n(),
            "graph": cfg.graph,
            "epsilon": prepared.epsilon,
            "params": recorded,
            "final_objective": final_objective.map(json_f64),
        });
        write_json(&manifest, &dir.join("manifest.json"))?;
        dirs.push(dir);
    }
    Ok(dirs)
}

/// SNR in both modes and per-coordinate variances of one embedding.
pub fn embedding_metrics(u: &DMatrix<f64>, labels: Option<&[usize]>) -> CliResult<Vec<(String, f64)>> {
    let mut out = Vec::new();
    if let Some(labels) = labels {
        out.push(("snr_1d_formula".to_string(), snr_1d(u, labels, SnrMode::Formula)?));
        out.push(("snr_1d_projection_normalized".to_string(), snr_1d(u, labels, SnrMode::ProjectionNormalized)?));
    }
    for (k, v) in coordinate_variances(u)?.into_iter().enumerate() {
        out.push((format!("variance_dim_{}", k + 1), v));
    }
    Ok(out)
}

/// Read every seed's embedding, write Procrustes-aligned SVD coordinates to
/// `aligned.csv` next to it and return the metric records, which also go to
/// `out/metrics.json`.
pub fn cmd_eval(cfg: &ExperimentConfig) -> CliResult<Vec<MetricRecord>> {
    cfg.validate().map_err(CliError::Config)?;
    let reference = match &cfg.reference {
        Some(path) => Some(read_embedding_csv(path)?.0),
        None => None,
    };
    let mut records = Vec::new();
    let mut coords: Vec<(u64, DMatrix<f64>)> = Vec::new();
    for &seed in &cfg.seeds {
        let dir = seed_dir(&cfg.out, seed);
        let path = dir.join("embedding.csv");
        if !path.exists() {
            return Err(CliError::Config(format!("{} not found; run embed first", path.display())));
        }
        let (u, labels) = read_embedding_csv(&path)?;
        for (name, value) in embedding_metrics(&u, labels.as_deref())? {
            records.push(MetricRecord::new(&name, json_f64(value), json!({ "seed": seed })));
        }
        if let Some(r) = &reference {
            records.push(MetricRecord::new("gram_distance", json_f64(gram_distance(&u, r, false)?), json!({ "seed": seed })));
            records.push(MetricRecord::new(
                "gram_distance_normalized",
                json_f64(gram_distance(&u, r, true)?),
                json!({ "seed": seed }),
            ));
        }
        let mut c = svd_coordinates(&u)?;
        if let Some((_, base)) = coords.first() {
            if base.shape() == c.shape() {
                let (p, _) = procrustes_align(base, &c)?;
                c = &c * p;
            }
        }
        write_embedding_csv(&c, labels.as_deref(), &dir.join("aligned.csv"))?;
        if let (Some(labels), true) = (&labels, c.ncols() >= 2) {
            let mut communities: Vec<usize> = labels.clone();
            communities.sort_unstable();
            communities.dedup();
            for community in communities {
                let rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == community).collect();
                let points = DMatrix::from_fn(rows.len(), 2, |i, j| c[(rows[i], j)]);
                let e = gaussian_ellipse(&points, ELLIPSE_CONFIDENCE)?;
                let value = Value::Array(
                    [e.center[0], e.center[1], e.covariance[0][0], e.covariance[0][1], e.covariance[1][1], e.scale]
                        .into_iter()
                        .map(json_f64)
                        .collect(),
                );
                records.push(MetricRecord::new(
                    "ellipse",
                    value,
                    json!({
                        "seed": seed,
                        "community": community,
                        "confidence": ELLIPSE_CONFIDENCE,
                        "degenerate": e.degenerate,
                        "layout": "center_x,center_y,cov_xx,cov_xy,cov_yy,scale",
                    }),
                ));
            }
        }
        coords.push((seed, c));
    }
    for i in 0..coords.len() {
        for j in (i + 1)..coords.len() {
            let (sa, a) = &coords[i];
            let (sb, b) = &coords[j];
            if a.shape() != b.shape() {
                continue;
            }
            let (_, dist) = procrustes_align(a, b)?;
            records.push(MetricRecord::new("procrustes_distance", json_f64(dist), json!({ "seed_a": sa, "seed_b": sb })));
        }
    }
    fs::create_dir_all(&cfg.out)?;
    write_json(&records, &cfg.out.join("metrics.json"))?;
    Ok(records)
}

/// One line of a sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: String,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

fn sweep_point(cfg: &ExperimentConfig, axis: SweepAxis, index: usize, seed: u64) -> CliResult<Vec<SweepRow>> {
    let mut params = EmbedParams::from_config(cfg, seed);
    let mut spec = cfg.graph.clone();
    let axis_value = match axis {
        SweepAxis::Nu0 => {
            params.nu0 = cfg.nu0_grid[index];
            format!("{}", params.nu0)
        }
        SweepAxis::N => {
            let n = cfg.n_grid[index];
            if let GraphSpec::Sbm(p) = &mut spec {
                p.n = n;
            }
            n.to_string()
        }
        SweepAxis::Ell => {
            params.length = cfg.ell_grid[index];
            params.length.to_string()
        }
    };
    let prepared = prepare_graph(&spec, cfg.epsilon, seed)?;
    let labels = prepared.labels();
    let mut rows = Vec::new();
    let mut push = |metric: String, value: f64| {
        rows.push(SweepRow { axis_value: axis_value.clone(), seed, metric, value });
    };
    if axis == SweepAxis::Ell {
        params.algorithm = Algorithm::Vec;
        let vec_u = embed(&prepared.graph, &params)?.embedding;
        params.algorithm = Algorithm::Ergovec;
        let ergo_u = embed(&prepared.graph, &params)?.embedding;
        push("gram_distance".into(), gram_distance(&vec_u, &ergo_u, false)?);
        push("gram_distance_normalized".into(), gram_distance(&vec_u, &ergo_u, true)?);
        for (name, value) in embedding_metrics(&vec_u, labels)? {
            push(name, value);
        }
    } else {
        let u = embed(&prepared.graph, &params)?.embedding;
        for (name, value) in embedding_metrics(&u, labels)? {
            push(name, value);
        }
    }
    Ok(rows)
}

/// Repeat embed and eval over one grid axis and every seed. Grid points run
/// in parallel; rows come out in grid order, then seed order.
///
/// The `ell` axis always compares VEC against ErgoVEC regardless of the
/// configured algorithm. ErgoVEC does not depend on `ℓ`, but it is recomputed
/// per point so that every point stays independent.
pub fn cmd_sweep(cfg: &ExperimentConfig, axis: SweepAxis) -> CliResult<PathBuf> {
    cfg.validate().map_err(CliError::Config)?;
    let len = match axis {
        SweepAxis::Nu0 => {
            if cfg.algorithm != Algorithm::Nucgram {
                return Err(CliError::Config("the nu0 axis needs algorithm nucgram".into()));
            }
            cfg.nu0_grid.len()
        }
        SweepAxis::N => {
            if !matches!(cfg.graph, GraphSpec::Sbm(_)) {
                return Err(CliError::Config("the n axis needs an sbm graph source".into()));
            }
            cfg.n_grid.len()
        }
        SweepAxis::Ell => {
            if let Some(&ell) = cfg.ell_grid.iter().find(|&&ell| ell <= cfg.w) {
                return Err(CliError::Config(format!("walk length {ell} must exceed w = {}", cfg.w)));
            }
            cfg.ell_grid.len()
        }
    };
    if len == 0 {
        return Err(CliError::Config("sweep grid is empty".into()));
    }
    let jobs: Vec<(usize, u64)> = (0..len).flat_map(|i| cfg.seeds.iter().map(move |&s| (i, s))).collect();
    let results: Vec<CliResult<Vec<SweepRow>>> = jobs.par_iter().map(|&(i, s)| sweep_point(cfg, axis, i, s)).collect();
    let mut text = format!("{},seed,metric,value\n", axis_name(axis));
    for rows in results {
        for r in rows? {
            text.push_str(&format!("{},{},{},{}\n", r.axis_value, r.seed, r.metric, fmt_f64(r.value)));
        }
    }
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join(format!("sweep-{}.csv", axis_name(axis)));
    let mut f = fs::File::create(&path)?;
    f.write_all(text.as_bytes())?;
    Ok(path)
}

pub fn axis_name(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::Nu0 => "nu0",
        SweepAxis::N => "n",
        SweepAxis::Ell => "ell",
    }
}

/// Parse a sweep CSV back into rows.
pub fn read_sweep_csv(path: &Path) -> CliResult<Vec<SweepRow>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let bad = || CliError::Config(format!("{}: malformed line {}", path.display(), lineno + 1));
        if fields.len() != 4 {
            return Err(bad());
        }
        rows.push(SweepRow {
            axis_value: fields[0].to_string(),
            seed: fields[1].parse().map_err(|_| bad())?,
            metric: fields[2].to_string(),
            value: ergonode::io::parse_f64(fields[3]).ok_or_else(bad)?,
        });
    }
    Ok(rows)
}
