//! JSON experiment configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ergonode::graph::SbmParams;
use ergonode::nuclear::{NucConfig, NucInit};
use ergonode::sgd::SgdConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Vec,
    Ergovec,
    Ergopmi,
    Nucgram,
    Spectral,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Vec => "vec",
            Algorithm::Ergovec => "ergovec",
            Algorithm::Ergopmi => "ergopmi",
            Algorithm::Nucgram => "nucgram",
            Algorithm::Spectral => "spectral",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum GraphSpec {
    Sbm(SbmParams),
    /// Expected graph of the balanced two-block SBM on `2m` nodes.
    Expected { m: usize, a: f64, b: f64 },
    File {
        edges: PathBuf,
        #[serde(default)]
        labels: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Nu0,
    N,
    Ell,
}

/// `0.018, 0.036, …, 0.216`.
pub fn default_nu0_grid() -> Vec<f64> {
    (1..=12).map(|i| (i as f64 * 0.018 * 1000.0).round() / 1000.0).collect()
}

fn default_sgd() -> SgdConfig {
    SgdConfig::default()
}

fn default_nuc() -> NucConfig {
    NucConfig { init: NucInit::ScaledPmi, ..NucConfig::default() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    /// `None` means `1/(10n)` for sampled or loaded graphs and 0 for the
    /// expected graph.
    pub epsilon: Option<f64>,
    pub algorithm: Algorithm,
    pub w: usize,
    pub k: usize,
    pub d: usize,
    pub r: usize,
    pub length: usize,
    pub nu0: f64,
    pub nu0_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub ell_grid: Vec<usize>,
    pub seeds: Vec<u64>,
    pub sgd: SgdConfig,
    pub nuc: NucConfig,
    /// Reference embedding for Gram distances in `eval`.
    pub reference: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            graph: GraphSpec::Sbm(SbmParams::two_block(
                100,
                ergonode::graph::SbmRegime::Logarithmic { p_scale: 9.0, q_scale: 2.0 },
            )),
            epsilon: None,
            algorithm: Algorithm::Ergovec,
            w: 8,
            k: 5,
            d: 2,
            r: 10,
            length: 100,
            nu0: 0.108,
            nu0_grid: default_nu0_grid(),
            n_grid: vec![100, 200, 500, 1000],
            ell_grid: vec![50, 100, 200, 500, 1000],
            seeds: vec![0],
            sgd: default_sgd(),
            nuc: default_nuc(),
            reference: None,
            out: PathBuf::from("out"),
        }
    }
}

/// Largest graph size the defaults are tuned for.
pub const DESK_SCALE_N: usize = 1000;

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.w == 0 || self.d == 0 || self.r == 0 {
            return Err("w, d and r must be positive".into());
        }
        if self.length < 2 || self.w >= self.length {
            return Err(format!("need 1 <= w < length, got w = {} and length = {}", self.w, self.length));
        }
        if self.seeds.is_empty() {
            return Err("seeds must not be empty".into());
        }
        if let Some(eps) = self.epsilon {
            if !(eps >= 0.0) || !eps.is_finite() {
                return Err(format!("epsilon must be finite and nonnegative, got {eps}"));
            }
        }
        if !(self.nu0 >= 0.0) || self.nu0_grid.iter().any(|v| !(*v >= 0.0)) {
            return Err("nu0 values must be nonnegative".into());
        }
        Ok(())
    }

    /// Graph node count if it is known without loading anything.
    pub fn declared_n(&self) -> Option<usize> {
        match &self.graph {
            GraphSpec::Sbm(p) => Some(p.n),
            GraphSpec::Expected { m, .. } => Some(2 * m),
            GraphSpec::File { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_protocol() {
        let c = ExperimentConfig::default();
        assert_eq!((c.w, c.k, c.d, c.r, c.length), (8, 5, 2, 10, 100));
        let grid = default_nu0_grid();
        assert_eq!(grid.len(), 12);
        assert_eq!(grid[0], 0.018);
        assert_eq!(grid[11], 0.216);
        assert!(grid.windows(2).all(|w| ((w[1] - w[0]) - 0.018).abs() < 1e-12));
    }

    #[test]
    fn json_round_trip_and_partial_configs() {
        let c = ExperimentConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), c);
        let partial: ExperimentConfig = serde_json::from_str(
            r#"{"graph": {"source": "expected", "m": 10, "a": 0.6, "b": 0.06}, "algorithm": "nucgram", "nu0": 0.2}"#,
        )
        .unwrap();
        assert_eq!(partial.algorithm, Algorithm::Nucgram);
        assert_eq!(partial.w, 8);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"window": 3}"#).is_err());
    }
}
