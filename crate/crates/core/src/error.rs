use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operator size mismatch: {0}")]
    SizeMismatch(String),

    #[error("operator values are not weakly increasing: {0:?}")]
    NotMonotone(Vec<usize>),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("simplicial set is only known through dimension {bound}, dimension {needed} required")]
    Truncated { bound: usize, needed: usize },

    #[error("map is not a monomorphism")]
    NotMono,

    #[error("not vertex-determined: {0}")]
    NotVertexDetermined(String),

    #[error("map is outside the class admitted by subdivision: {0}")]
    NotSubdividable(String),

    #[error("malformed simplicial set: {0}")]
    Malformed(String),

    #[error("invalid simplicial map: {0}")]
    InvalidMap(String),

    #[error("invalid category: {0}")]
    InvalidCategory(String),

    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
