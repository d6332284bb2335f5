use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("elements belong to different groups (p = {0} and p = {1})")]
    MismatchedPrime(u32, u32),

    #[error("invalid group element ({a}, {b}) for p = {p}")]
    InvalidElement { p: u32, a: u32, b: u32 },

    #[error("presentation relation failed: {0}")]
    Presentation(String),

    #[error("representation index r = {r} out of range 1..={max}")]
    RepIndex { r: u32, max: u32 },

    #[error("subspace not action-invariant: {0}")]
    NotInvariant(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resolution mismatch: {0}")]
    Resolution(String),

    #[error("malformed complex: {0}")]
    Malformed(String),

    #[error("gluing failed: {0}")]
    Gluing(String),

    #[error("group action missing on surface")]
    MissingAction,

    #[error("action is not free: {0}")]
    NotFree(String),

    #[error("interior component detached from boundary ({0} vertices)")]
    DetachedInterior(usize),

    #[error("boundary is empty")]
    EmptyBoundary,

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("requested {requested} eigenpairs but boundary has {available} vertices")]
    CountTooLarge { requested: usize, available: usize },

    #[error("cluster around index {0} reaches the last computed eigenvalue; increase count")]
    TruncatedCluster(usize),

    #[error("zero boundary norm")]
    ZeroBoundaryNorm,

    #[error("domain is missing {0} boundary vertices")]
    DomainMissingBoundary(usize),

    #[error("symmetry broken: {0}")]
    SymmetryBroken(String),

    #[error("isomorphism check failed: {0}")]
    Isomorphism(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
