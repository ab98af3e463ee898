use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("maps do not chain: {0}")]
    ChainMismatch(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("classes live over different cohomology presentations")]
    PresentationMismatch,

    #[error("generator of target factor {factor} has no image in the source")]
    UnmappedGenerator { factor: usize },

    #[error("classes share generator {generator}; blocks must be disjoint")]
    OverlappingBlocks { generator: usize },

    #[error("bundle bases differ")]
    BaseMismatch,

    #[error("invalid bundle: {0}")]
    InvalidBundle(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{what} needs {required} terms but the budget allows {budget}")]
    BudgetExceeded { what: String, required: String, budget: u64 },

    #[error("value too large for an explicit presentation: {0}")]
    TooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
