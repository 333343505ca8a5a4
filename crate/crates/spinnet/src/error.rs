use thiserror::Error;

use crate::graph::{HalfEdgeId, VertexId};

/// Errors shared by the graph model and the evaluation engines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("half-edge {0:?} is dangling (appears in a rotation but no edge, or vice versa)")]
    DanglingHalfEdge(HalfEdgeId),
    #[error("half-edge {0:?} appears more than once")]
    DuplicateHalfEdge(HalfEdgeId),
    #[error("duplicate identifier {0}")]
    DuplicateId(u32),
    #[error("vertex {0:?} is not trivalent")]
    NonTrivalent(VertexId),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(VertexId),
    #[error("edge {0} has no decoration")]
    MissingDecoration(u32),
    #[error("invalid family parameter: {0}")]
    InvalidParameter(String),
    #[error("network is not admissible: {0}")]
    Inadmissible(String),
    #[error("state sum would visit {states} states, above the limit {limit}")]
    StateLimitExceeded { states: u64, limit: u64 },
    #[error("contraction intermediate would hold {entries} entries, above the limit {limit}")]
    IntermediateTooLarge { entries: usize, limit: usize },
    #[error("tensor axis mismatch: {0}")]
    AxisMismatch(String),
    #[error("micro diagram too large: {0} binary legs")]
    MicroTooLarge(usize),
    #[error("orientation is not smooth or does not cover the network")]
    BadOrientation,
    #[error("gate signage inconsistent with the orientation at vertex {0:?}")]
    BadGateSignage(VertexId),
    #[error("expected exactly two external legs, found {0}")]
    LegCount(usize),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("series has an all-zero tail; cannot estimate a growth rate")]
    AllZeroTail,
    #[error("engine cross-check failed: {0}")]
    CrossCheckMismatch(String),
    #[error("float-mode magnitude would overflow binary64 (log10 ≈ {0:.1})")]
    FloatRange(f64),
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code classification used by the command-line tool:
    /// 2 for schema problems, 3 for resource guards, 1 for domain errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema(_) => 2,
            Error::StateLimitExceeded { .. }
            | Error::IntermediateTooLarge { .. }
            | Error::MicroTooLarge(_)
            | Error::FloatRange(_) => 3,
            _ => 1,
        }
    }
}
