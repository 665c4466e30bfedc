//! Random-walk node embeddings on dense weighted graphs: walk sampling and
//! skip-bigram counting, the ergodic limits of those counts, the shared
//! logistic objective with SGD and Frank–Wolfe solvers, closed forms for
//! expected two-block SBM graphs, and evaluation metrics.

pub mod ergodic;
pub mod error;
pub mod expected;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod nuclear;
pub mod objective;
pub mod sgd;
pub mod walks;

pub use error::{Error, Result};
