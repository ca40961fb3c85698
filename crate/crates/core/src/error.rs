use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex set must be a nonempty proper subset")]
    EmptyOrFullSet,
    #[error("set is not contained in the enclosing set")]
    NotSubset,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("instance too large for the dense path: n = {n} exceeds cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("half-edge matching impossible: {0}")]
    Parity(String),
    #[error("edge ({0}, {1}) is not present")]
    MissingEdge(usize, usize),
    #[error("operation not available in this access model")]
    WrongMode,
    #[error("sketch is degenerate: eigenvalue {eigenvalue:e} of the scaled Gram matrix is below floor {floor:e}")]
    DegenerateSketch { eigenvalue: f64, floor: f64 },
    #[error("seed sample has no vertex from cluster {cluster}; raise the sample scale")]
    EmptyClusterSample { cluster: usize },
    #[error("sampled set has no vertex from cluster {cluster}; raise the sample scale")]
    EmptySample { cluster: usize },
    #[error("feasibility solver stopped after {iterations} iterations with violation {violation:e}")]
    InfeasibleWithinBudget { violation: f64, iterations: usize },
    #[error("tree leaves do not match the item set")]
    LeafMismatch,
    #[error("{k} nodes exceeds the exhaustive limit {cap}")]
    TooManyNodes { k: usize, cap: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
