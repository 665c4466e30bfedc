//! Plain-text formats: edge lists, label files, dense matrix CSV, walk dumps,
//! embeddings and solver traces. Floats are written with 17 significant
//! digits so files round-trip exactly.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::nuclear::NucRecord;
use crate::sgd::EpochRecord;
use crate::walks::WalkSet;

/// 17 significant digits; infinities as `inf` / `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_f64(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "+inf" | "Infinity" => Some(f64::INFINITY),
        "-inf" | "-Infinity" => Some(f64::NEG_INFINITY),
        t => t.parse().ok(),
    }
}

/// Read `i<TAB>j<TAB>weight` lines (weight optional, default 1). Blank lines
/// and `#` comments are skipped. Each undirected pair may appear in either
/// or both orientations, but repeated entries must agree. `n` defaults to
/// one more than the largest id.
pub fn read_edge_list(path: &Path, n: Option<usize>) -> Result<Graph> {
    let file = fs::File::open(path)?;
    let mut edges: Vec<(usize, usize, f64, usize)> = Vec::new();
    let mut max_id = 0usize;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse { line: lineno, msg: format!("expected 2 or 3 fields, found {}", fields.len()) });
        }
        let id = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse { line: lineno, msg: format!("bad node id {s:?}: {e}") });
        let (i, j) = (id(fields[0])?, id(fields[1])?);
        let w = match fields.get(2) {
            Some(s) => parse_f64(s).ok_or_else(|| Error::Parse { line: lineno, msg: format!("bad weight {s:?}") })?,
            None => 1.0,
        };
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::Parse { line: lineno, msg: format!("weight must be finite and nonnegative, got {w}") });
        }
        if i == j {
            return Err(Error::Parse { line: lineno, msg: "self-loops are not allowed".into() });
        }
        max_id = max_id.max(i).max(j);
        edges.push((i, j, w, lineno));
    }
    let n = match n {
        Some(n) if n <= max_id && !edges.is_empty() => {
            return Err(Error::invalid(format!("node id {max_id} out of range for n = {n}")));
        }
        Some(n) => n,
        None if edges.is_empty() => return Err(Error::EmptyInput("edge list has no edges".into())),
        None => max_id + 1,
    };
    let mut adjacency = DMatrix::zeros(n, n);
    let mut seen = DMatrix::from_element(n, n, false);
    for (i, j, w, lineno) in edges {
        let (a, b) = (i.min(j), i.max(j));
        if seen[(a, b)] && adjacency[(a, b)] != w {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("conflicting weights for pair ({a}, {b}): {} vs {w}", adjacency[(a, b)]),
            });
        }
        seen[(a, b)] = true;
        adjacency[(a, b)] = w;
        adjacency[(b, a)] = w;
    }
    Graph::from_adjacency(adjacency)
}

/// Write each positive-weight pair once, with `i < j`.
pub fn write_edge_list(g: &Graph, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "# n = {}", g.n())?;
    let a = g.adjacency();
    for i in 0..g.n() {
        for j in (i + 1)..g.n() {
            if a[(i, j)] > 0.0 {
                writeln!(out, "{i}\t{j}\t{}", fmt_f64(a[(i, j)]))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Node count recorded by [`write_edge_list`], if present.
pub fn edge_list_node_count(path: &Path) -> Result<Option<usize>> {
    let file = fs::File::open(path)?;
    for line in BufReader::new(file).lines() {
        let line = line?;
        if let Some(rest) = line.trim().strip_prefix("# n =") {
            return Ok(rest.trim().parse().ok());
        }
        if !line.trim().starts_with('#') && !line.trim().is_empty() {
            break;
        }
    }
    Ok(None)
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        labels.push(t.parse().map_err(|e| Error::Parse { line: idx + 1, msg: format!("bad label {t:?}: {e}") })?);
    }
    Ok(labels)
}

pub fn write_labels(labels: &[usize], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for l in labels {
        writeln!(out, "{l}")?;
    }
    out.flush()?;
    Ok(())
}

/// Dense matrix with a header row of column node ids.
pub fn write_matrix_csv(m: &DMatrix<f64>, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record((0..m.ncols()).map(|j| j.to_string()))?;
    for row in m.row_iter() {
        w.write_record(row.iter().map(|&x| fmt_f64(x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let ncols = r.headers()?.len();
    let mut values = Vec::new();
    let mut nrows = 0;
    for (idx, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != ncols {
            return Err(Error::Parse { line: idx + 2, msg: format!("expected {ncols} fields, found {}", rec.len()) });
        }
        for field in rec.iter() {
            values.push(parse_f64(field).ok_or_else(|| Error::Parse { line: idx + 2, msg: format!("bad number {field:?}") })?);
        }
        nrows += 1;
    }
    Ok(DMatrix::from_row_slice(nrows, ncols, &values))
}

/// One walk per line, space-separated node ids.
pub fn write_walks(ws: &WalkSet, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for walk in ws.iter() {
        let line: Vec<String> = walk.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

/// Header `node,label,x1..xd`; the label column is empty when unknown.
pub fn write_embedding_csv(u: &DMatrix<f64>, labels: Option<&[usize]>, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["node".to_string(), "label".to_string()];
    header.extend((1..=u.ncols()).map(|k| format!("x{k}")));
    w.write_record(&header)?;
    for (i, row) in u.row_iter().enumerate() {
        let mut rec = vec![i.to_string(), labels.map_or(String::new(), |l| l[i].to_string())];
        rec.extend(row.iter().map(|&x| fmt_f64(x)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_embedding_csv(path: &Path) -> Result<(DMatrix<f64>, Option<Vec<usize>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let d = r.headers()?.len().saturating_sub(2);
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut all_labelled = true;
    for (idx, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = idx + 2;
        if rec.len() != d + 2 {
            return Err(Error::Parse { line, msg: format!("expected {} fields, found {}", d + 2, rec.len()) });
        }
        let node: usize = rec[0].parse().map_err(|_| Error::Parse { line, msg: format!("bad node id {:?}", &rec[0]) })?;
        if node != idx {
            return Err(Error::Parse { line, msg: format!("rows must be ordered by node id, found {node}") });
        }
        match rec[1].trim() {
            "" => all_labelled = false,
            t => labels.push(t.parse().map_err(|_| Error::Parse { line, msg: format!("bad label {t:?}") })?),
        }
        for field in rec.iter().skip(2) {
            values.push(parse_f64(field).ok_or_else(|| Error::Parse { line, msg: format!("bad number {field:?}") })?);
        }
    }
    let n = values.len() / d.max(1);
    let labels = (all_labelled && labels.len() == n).then_some(labels);
    Ok((DMatrix::from_row_slice(n, d, &values), labels))
}

pub fn write_sgd_trace(trace: &[EpochRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epoch", "objective", "procrustes_change"])?;
    for r in trace {
        w.write_record([r.epoch.to_string(), fmt_f64(r.objective), fmt_f64(r.procrustes_change)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_nuc_trace(trace: &[NucRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iter", "objective", "fw_gap", "trace_norm"])?;
    for r in trace {
        w.write_record([r.iter.to_string(), fmt_f64(r.objective), fmt_f64(r.fw_gap), fmt_f64(r.trace_norm)])?;
    }
    w.flush()?;
    Ok(())
}
