use thiserror::Error;

/// Errors raised by graph ingestion and every downstream computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: negative weight {weight}")]
    NegativeWeight { line: usize, weight: f64 },

    #[error("line {line}: duplicate edge {from} -> {to}")]
    DuplicateEdge {
        line: usize,
        from: String,
        to: String,
    },

    #[error("line {line}: malformed line ({reason})")]
    MalformedLine { line: usize, reason: String },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("operation requires a symmetric (undirected) graph")]
    AsymmetricInput,

    #[error("node set must be non-empty and a proper subset of V")]
    EmptyOrFullSet,

    #[error("node set has zero volume on one side of the cut")]
    ZeroVolume,

    #[error("graph is not connected")]
    Disconnected,

    #[error("Markov chain is reducible (support not strongly connected)")]
    Reducible,

    #[error("node {0} has zero out-degree; repair dangling nodes first")]
    DanglingNode(usize),

    #[error("restart constant alpha = {0} must lie in (0, 1)")]
    AlphaOutOfRange(f64),

    #[error("not a probability distribution: {0}")]
    NotADistribution(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("node index {index} out of range for {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("unknown node label '{0}'")]
    UnknownNode(String),

    #[error("{n} nodes exceeds the dense threshold {threshold}")]
    TooDense { n: usize, threshold: usize },

    #[error("{n} players exceeds the limit {max}")]
    TooManyPlayers { n: usize, max: usize },

    #[error("{edges} probabilistic edges exceeds the enumeration limit {max}")]
    TooManyEdges { edges: usize, max: usize },

    #[error("instance too large for exact mode: {0}")]
    TooLarge(String),

    #[error("utility of player {player} is not monotonically non-decreasing")]
    NotMonotone { player: usize },

    #[error("utility of player {player} is negative on the empty set: {value}")]
    NegativeUtility { player: usize, value: f64 },

    #[error("utility of player {player} is not normalized: u(V \\ {{s}}) = {value}")]
    NotNormalized { player: usize, value: f64 },

    #[error("invalid ordered partition: {0}")]
    InvalidPartition(String),

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("influence probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
