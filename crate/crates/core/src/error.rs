use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge ({u}, {v}) has non-positive weight {weight}")]
    NonPositiveWeight { u: String, v: String, weight: f64 },
    #[error("edge ({u}, {v}) declared more than once")]
    DuplicateEdge { u: String, v: String },
    #[error("frontier vertex id {0:?} is not a valid vertex id")]
    FrontierVertexUnknown(String),
    #[error("vertex id {0:?} is not valid (empty, whitespace or comment marker)")]
    InvalidVertexId(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("set touches the frontier at vertex {0}")]
    FrontierViolation(String),
    #[error("set of {size} vertices exceeds the enumeration cap of {cap}")]
    TooLargeForEnumeration { size: usize, cap: usize },
    #[error("graph has no non-frontier vertex")]
    NoInteriorVertex,
    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
    },
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("induced weights are not symmetric on ({u}, {v}): {forward} vs {backward}")]
    AsymmetricInducedWeights {
        u: String,
        v: String,
        forward: f64,
        backward: f64,
    },
    #[error("no bridge connects {0} to the target set")]
    Unreachable(String),
    #[error("walk records carry no ocean trace (no decomposition was supplied)")]
    MissingDecomposition,
    #[error("empty input")]
    EmptyInput,
    #[error("bad offspring distribution: {0}")]
    BadDistribution(String),
    #[error("lazy generator cannot expand vertex {0}")]
    GeneratorExhausted(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
