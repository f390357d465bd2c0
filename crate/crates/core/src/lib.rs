//! PageRank completion of sparse weighted networks.
//!
//! The completion `W̄ = D·PPR` of a symmetric graph is dense, keeps every
//! weighted degree, conforms to PageRank centrality and is spectrally close
//! to the input. Around it this crate provides the machinery that checks
//! those guarantees and that turns other network models (preferences,
//! incentive utilities, social influence) into centrality-conforming Markov
//! chains.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`graph`] | [`WeightedGraph`], edge-list I/O, Laplacians, conductance |
//! | [`markov`] | [`MarkovChain`], stationarity, detailed balance, symmetrizations |
//! | [`pagerank`] | personalized PageRank, the PPR matrix, PageRank centrality |
//! | [`completion`] | the completion and verification of its guarantees |
//! | [`clustering`] | eigensolver, Fiedler/Cheeger vectors, sweep, local clustering |
//! | [`models`] | preference, cooperative, incentive and influence models |

#![forbid(unsafe_code)]

pub mod clustering;
pub mod completion;
mod error;
pub mod graph;
pub mod markov;
pub mod models;
pub mod pagerank;

pub use clustering::{EigenPairs, SweepResult};
pub use completion::{Completion, CompletionReport, SimilarityReport};
pub use error::{Error, Result};
pub use graph::{LaplacianMatrix, WeightedGraph};
pub use markov::MarkovChain;
pub use pagerank::PprMatrix;

/// Truncation threshold for every PageRank power series: summation stops
/// once the remaining tail mass `(1 - alpha)^k` drops below this value.
pub const SERIES_EPS: f64 = 1e-14;

/// Tolerance used for symmetry detection on input weights.
pub const TOL_SYM: f64 = 1e-12;

/// Node count above which dense operations (PPR matrix, completion,
/// eigensolves) are refused.
pub const DEFAULT_DENSE_THRESHOLD: usize = 4096;

/// Environment variable overriding [`DEFAULT_DENSE_THRESHOLD`].
pub const DENSE_THRESHOLD_ENV: &str = "ESSENCE_DENSE_THRESHOLD";

/// The active dense cap, honoring [`DENSE_THRESHOLD_ENV`] when it parses.
pub fn dense_threshold() -> usize {
    std::env::var(DENSE_THRESHOLD_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_THRESHOLD)
}

pub(crate) fn ensure_dense(n: usize) -> Result<()> {
    let threshold = dense_threshold();
    if n > threshold {
        return Err(Error::TooDense { n, threshold });
    }
    Ok(())
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}
