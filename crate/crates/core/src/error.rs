use thiserror::Error;

use crate::bayesnet::NodeId;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("directed cycle through nodes {0:?}")]
    CycleDetected(Vec<NodeId>),
    #[error("conditional probability table of node {0} does not match its parents")]
    CptShapeMismatch(NodeId),
    #[error("invalid probability row for node {node}: {reason}")]
    InvalidCpt { node: NodeId, reason: String },
    #[error("assignment has missing values where a full observation is required")]
    MissingValue,
    #[error("evidence has zero probability")]
    ZeroEvidenceProbability,
    #[error("sampling budget of {0} attempts exceeded")]
    BudgetExceeded(u64),
    #[error("evidence and target variables overlap at node {0}")]
    OverlappingVariables(NodeId),
    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("qubit {0} used more than once")]
    DuplicateQubit(usize),
    #[error("{requested} qubits exceed the cap of {cap}")]
    TooManyQubits { requested: usize, cap: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("unknown defect label {0:?}")]
    UnknownLabel(String),
    #[error("sample set is empty")]
    EmptySampleSet,
    #[error("no training samples for class {0}")]
    MissingClass(String),
    #[error("class {0} has too few samples")]
    EmptyClass(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("malformed document: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
