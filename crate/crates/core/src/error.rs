use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported root system: {0}")]
    UnsupportedRootSystem(String),

    #[error("reflection closure exceeded {0} elements")]
    GroupTooLarge(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("not a unit vector (norm {0})")]
    NotUnit(f64),

    #[error("chamber certificate failed: <v, alpha_{root}> = {value:.3e} < -1e-9")]
    NotInChamber { root: usize, value: f64 },

    #[error("slope is parallel to factor {factor} of the product; the gap set is degenerate")]
    DegenerateSlope { factor: usize },

    #[error("good slope not found at grid resolution {resolution} (best margin {best_margin:.4})")]
    GoodSlopeNotFound { resolution: usize, best_margin: f64 },

    #[error("no skew hyperplane: every wall of the chamber contains or is orthogonal to the subspace")]
    NoSkewHyperplane,

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("trace is unbounded below on the flat")]
    UnboundedBelow,

    #[error("empty sublevel set at level {0}")]
    EmptyLevel(f64),

    #[error("point is below the requested level: value {value} < {level}")]
    BelowLevel { value: f64, level: f64 },

    #[error("facets are parallel; no face-pair path")]
    ParallelFacets,

    #[error("point is not on the level set (|value - t| = {0:.3e})")]
    OffLevel(f64),

    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("point is off the tube surface: |d(x,P) - R| = {0:.3e}")]
    OffTube(f64),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("inclusion fails at witness {witness:?}: {reason}")]
    Inclusion { witness: Vec<f64>, reason: String },

    #[error("strip classification failed for the polytope")]
    StripFails,

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("invalid mesh parameter {0}")]
    InvalidMesh(f64),

    #[error("construction did not reach mesh {target} (got {achieved})")]
    MeshNotReached { target: f64, achieved: f64 },

    #[error("{count} wild bricks cannot be subdivided without a recursive filler")]
    WildBricks { count: usize },

    #[error("partition rejected: {0}")]
    Partition(#[from] PartitionError),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("oracle complex too large: {cells} cells (limit {limit})")]
    OracleTooLarge { cells: usize, limit: usize },

    #[error("fit is degenerate: {0}")]
    DegenerateFit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

/// Ways a candidate filling partition can fail validation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("triangle {0} has a repeated vertex")]
    DegenerateTriangle(usize),

    #[error("vertex index {0} out of range")]
    BadIndex(usize),

    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),

    #[error("orientation flips across edge ({0}, {1}); Euler/orientation check failed")]
    Orientation(usize, usize),

    #[error("Euler characteristic V - E + F = {0}, expected 1")]
    Euler(i64),

    #[error("link of vertex {0} is not a cycle or a path")]
    VertexLink(usize),

    #[error("boundary does not match the loop: {0}")]
    BoundaryMismatch(String),

    #[error("non-constant loop with an empty partition")]
    Empty,
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
