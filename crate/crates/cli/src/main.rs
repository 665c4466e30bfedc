use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ergonode_cli::commands::{cmd_embed, cmd_eval, cmd_generate, cmd_sweep, CliError};
use ergonode_cli::config::{Algorithm, ExperimentConfig, GraphSpec, SweepAxis, DESK_SCALE_N};

#[derive(Parser)]
#[command(name = "ergonode", version, about = "Random-walk node embedding experiments on block-model graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample graphs and write edge lists, labels and a manifest per seed.
    Generate(Overrides),
    /// Embed each seed's graph with the configured algorithm.
    Embed(Overrides),
    /// Compute SNR, variances, ellipses and alignments of existing embeddings.
    Eval(Overrides),
    /// Repeat embed and eval over a parameter grid into one long-form CSV.
    Sweep {
        #[arg(long, value_enum)]
        axis: SweepAxis,
        #[command(flatten)]
        overrides: Overrides,
    },
}

/// Flags override the matching fields of the JSON config.
#[derive(Args)]
struct Overrides {
    /// JSON experiment config; defaults apply to every missing field.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge-list TSV to use instead of the configured graph source.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Labels file for --graph.
    #[arg(long, requires = "graph")]
    labels: Option<PathBuf>,
    #[arg(long, value_enum)]
    algo: Option<Algorithm>,
    #[arg(long)]
    w: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    length: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    nu0: Option<f64>,
    /// Replaces the configured seed list with a single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Reference embedding CSV for Gram distances in eval.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn resolve(self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path).map_err(CliError::Config)?,
            None => ExperimentConfig::default(),
        };
        if let Some(edges) = self.graph {
            cfg.graph = GraphSpec::File { edges, labels: self.labels };
        }
        if let Some(a) = self.algo {
            cfg.algorithm = a;
        }
        if let Some(w) = self.w {
            cfg.w = w;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(d) = self.d {
            cfg.d = d;
        }
        if let Some(r) = self.r {
            cfg.r = r;
        }
        if let Some(l) = self.length {
            cfg.length = l;
        }
        if self.epsilon.is_some() {
            cfg.epsilon = self.epsilon;
        }
        if let Some(nu0) = self.nu0 {
            cfg.nu0 = nu0;
        }
        if let Some(seed) = self.seed {
            cfg.seeds = vec![seed];
        }
        if self.reference.is_some() {
            cfg.reference = self.reference;
        }
        if let Some(out) = self.out {
            cfg.out = out;
        }
        cfg.validate().map_err(CliError::Config)?;
        Ok(cfg)
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("ERGONODE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("ERGONODE_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn warn_scale(cfg: &ExperimentConfig, sweep: Option<SweepAxis>) {
    let largest = match sweep {
        Some(SweepAxis::N) => cfg.n_grid.iter().copied().max(),
        _ => cfg.declared_n(),
    };
    if let Some(n) = largest.filter(|&n| n > DESK_SCALE_N) {
        eprintln!("warning: n = {n} exceeds {DESK_SCALE_N}; dense O(n^2) memory and O(n^3) solvers will be slow");
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Generate(o) => {
            let cfg = o.resolve()?;
            warn_scale(&cfg, None);
            for dir in cmd_generate(&cfg)? {
                println!("{}", dir.display());
            }
        }
        Command::Embed(o) => {
            let cfg = o.resolve()?;
            warn_scale(&cfg, None);
            for dir in cmd_embed(&cfg)? {
                println!("{}", dir.display());
            }
        }
        Command::Eval(o) => {
            let cfg = o.resolve()?;
            let records = cmd_eval(&cfg)?;
            println!("{} records written to {}", records.len(), cfg.out.join("metrics.json").display());
        }
        Command::Sweep { axis, overrides } => {
            let cfg = overrides.resolve()?;
            warn_scale(&cfg, Some(axis));
            println!("{}", cmd_sweep(&cfg, axis)?.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
