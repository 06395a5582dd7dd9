use thiserror::Error;

/// Errors shared across the graph, numerics, and planning layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter must be positive: {0}")]
    NonPositiveParameter(String),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(u64, u64),
    #[error("self-loop at vertex {0}")]
    SelfLoop(u64),
    #[error("unknown vertex {0}")]
    UnknownVertex(u64),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("spanning-tree enumeration cap of {0} exceeded")]
    CapExceeded(usize),
    #[error("singular matrix")]
    SingularMatrix,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("degenerate rank-one update")]
    DegenerateUpdate,
    #[error("edge {0}-{1} already exists")]
    EdgeExists(u64, u64),
    #[error("cycles are not edge-disjoint")]
    CyclesNotDisjoint,
    #[error("base graph must be a tree for this operation")]
    NotATree,
    #[error("invalid spanning tree: {0}")]
    InvalidTree(String),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("integration step unstable (state norm exceeded 1e6)")]
    UnstableStep,
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
