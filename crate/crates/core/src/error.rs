use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid dimensions {0:?}: need 2 or 3 axes, each at least 2")]
    InvalidDims(Vec<usize>),
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("face {face} is not a triangle ({arity} vertices)")]
    NonTriangleFace { face: usize, arity: usize },
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("link of vertex {0} is not a single cycle or path")]
    NonManifoldVertex(usize),
    #[error("non-finite value at vertex {0}")]
    NonFinite(usize),
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("vertex {0} is not an extremum of the order field")]
    NotAnExtremum(usize),
    #[error("vertex {0} is a global extremum and cannot be discarded")]
    GlobalExtremum(usize),
    #[error("constrained vertex {0} is not an extremum")]
    ConstraintNotExtremum(usize),
    #[error("region with saddle {saddle} did not converge within {cap} iterations")]
    IterationCapExceeded { saddle: usize, cap: usize },
    #[error("integration key collision at vertex {0}")]
    KeyCollision(usize),
    #[error("propagation from {0} exhausted the domain without reaching a saddle")]
    UnboundedRegion(usize),
    #[error("restoring vertex {vertex} would disturb vertex {other}")]
    RestorationConflict { vertex: usize, other: usize },
    #[error("constraints still violated after {passes} passes")]
    ConstraintsUnsatisfied { passes: usize },
    #[error("mesh has boundary; operation requires a closed surface")]
    MeshHasBoundary,
    #[error("operation requires an explicit triangle mesh")]
    NotExplicit,
    #[error("invalid synthesis spec: {0}")]
    InvalidSynth(String),
    #[error("invalid option: {0}")]
    InvalidOption(String),
}

pub type Result<T> = std::result::Result<T, Error>;
