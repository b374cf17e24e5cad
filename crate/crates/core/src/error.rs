use thiserror::Error;

/// Errors surfaced by the agent library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("world load error: {0}")]
    WorldLoad(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("lexicon error: {0}")]
    Lexicon(String),

    #[error("logical form syntax error: {0}")]
    LfSyntax(String),

    #[error("type error: {0}")]
    Type(String),

    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),

    #[error("grounding error: {0}")]
    Grounding(String),

    #[error("concept error: {0}")]
    Concept(String),

    #[error("unknown object `{0}`")]
    UnknownObject(String),

    #[error("belief error: {0}")]
    Belief(String),

    #[error("dialog error: {0}")]
    Dialog(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
