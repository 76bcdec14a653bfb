use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised while building instances or running the solvers.
///
/// User indices inside messages are printed 1-based, as in the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("number of users must be in 1..=63, got {0}")]
    UserCount(usize),
    #[error("user {} is out of range for {num_users} users", user + 1)]
    UserOutOfRange { user: usize, num_users: usize },
    #[error("subfile of user {} lists its own owner in the cache set", owner + 1)]
    OwnerInCacheSet { owner: usize },
    #[error("subfile of user {} has zero size", owner + 1)]
    ZeroSize { owner: usize },
    #[error("duplicate subfile W[{}, {cache_set:?}]", owner + 1)]
    DuplicateSubfile { owner: usize, cache_set: Vec<usize> },
    #[error("unknown subfile W[{}, {cache_set:?}]", owner + 1)]
    UnknownSubfile { owner: usize, cache_set: Vec<usize> },
    #[error("packet has two members requested by user {}", .0 + 1)]
    DuplicateOwner(usize),
    #[error("operation requires a nonempty packet")]
    EmptyPacket,
    #[error("operation requires a nonempty input")]
    EmptyInput,
    #[error("invalid user group: {0}")]
    InvalidGroup(String),
    #[error("oracle scale exceeded: at least {projected} cliques, cap is {cap}")]
    CapExceeded { projected: u64, cap: u64 },
    #[error("invalid vertex order: {0}")]
    InvalidOrder(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
