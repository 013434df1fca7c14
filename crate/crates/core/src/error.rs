use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty word")]
    EmptyWord,

    #[error("letter `{0}` is outside the alphabet of rank {1}")]
    LetterOutOfRange(char, usize),

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("geodesic endpoints coincide")]
    EqualEndpoints,

    #[error("vertex {0} does not lie on the geodesic")]
    OriginOffGeodesic(String),

    #[error("point {0} is an endpoint of the geodesic")]
    EndpointProjection(String),

    #[error("word-length budget {0} is too small")]
    BudgetTooSmall(usize),

    #[error("subset is empty: {0}")]
    EmptySubset(String),

    #[error("invalid subset description: {0}")]
    InvalidSubset(String),

    #[error("rank {0} is too small for this operation")]
    RankTooSmall(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("generator {0} is not invertible (condition number {1:e})")]
    NotInvertible(String, f64),

    #[error("no singular value gap at index {k} for word {word}")]
    NoGap { k: usize, word: String },

    #[error("index k={k} must satisfy 1 <= k < d={d}")]
    BadIndex { k: usize, d: usize },

    #[error("no convergence at {point}: {iterations} iterations, last step {last_step:e}, bound {bound:e}")]
    NoConvergence {
        point: String,
        iterations: usize,
        last_step: f64,
        bound: f64,
    },

    #[error("point {0} is not reachable from a geodesic of the subset")]
    NotInLimitSet(String),

    #[error("pair ({0}, {1}) does not lie in the subset")]
    PairNotInSubset(String, String),

    #[error("representation is not certified for k={k} (verdict {verdict})")]
    NotCertified { k: usize, verdict: String },

    #[error("seed subspace is not transverse (gap {0:e})")]
    NonTransverseSeed(f64),

    #[error("word {0} has no membership witness within radius {1}")]
    MembershipUnverified(String, usize),

    #[error("insufficient sample: {0} usable pairs, need at least {1}")]
    InsufficientSample(usize, usize),

    #[error("singular block in graph transform")]
    SingularBlock,

    #[error("graph-transform hypotheses fail at orbit point {index}: {detail}")]
    HypothesesFail { index: usize, detail: String },

    #[error("invalid configuration at {path}: {reason}")]
    Validation { path: String, reason: String },

    #[error("{0}")]
    Io(String),
}
