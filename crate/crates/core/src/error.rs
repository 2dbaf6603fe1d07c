use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty vector passed to a reflector constructor")]
    EmptyVector,

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("data length {len} does not match {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid configuration field `{field}`: {message}")]
    InvalidConfig { field: &'static str, message: String },

    #[error("volume enumeration needs {needed} determinants, budget is {budget}")]
    VolumeBudget { needed: u128, budget: u128 },

    #[error(
        "patch {patch} is rank deficient at the given tolerance: \
         only {completed} of {rank} pivots could be selected"
    )]
    PatchRankDeficient {
        patch: usize,
        completed: usize,
        rank: usize,
    },

    #[error("solution path exceeded the budget of {budget} segments")]
    PathBudget { budget: usize },

    #[error("graph is disconnected: {components} components")]
    GraphDisconnected { components: usize },

    #[error("requested {requested} eigenpairs but only {available} are available above the zero tolerance")]
    SpectrumExhausted { requested: usize, available: usize },

    #[error("iterative eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    EigensolveFailed { iterations: usize, residual: f64 },

    #[error("interpolant at node {node} is singular for eigenfunction {eigenfunction}: |d_i - lambda| too small")]
    SingularInterpolant { node: usize, eigenfunction: usize },

    #[error("need at least {needed} neighbors, found {got}")]
    InsufficientNeighbors { needed: usize, got: usize },

    #[error("no tangent patches survived the quality filter")]
    NoPatchesSurvived,

    #[error("selected rows of the basis are rank deficient: {detail}")]
    SingularProjection { detail: String },

    #[error("requested rank {requested} exceeds numerical rank {numerical_rank}")]
    RankExceeded {
        requested: usize,
        numerical_rank: usize,
    },

    #[error("time integration became unstable at t = {time:.6} (CFL violation or blow-up)")]
    Instability { time: f64 },

    #[error("branch data error: {message}")]
    BranchData { message: String },

    #[error("malformed header in {path}: {detail}")]
    MalformedHeader { path: String, detail: String },

    #[error("truncated payload in {path}: expected {expected} bytes, found {got}")]
    TruncatedPayload {
        path: String,
        expected: usize,
        got: usize,
    },

    #[error("payload of {path} has {len} scalars but header declares {rows}x{cols}")]
    PayloadMismatch {
        path: String,
        rows: usize,
        cols: usize,
        len: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
