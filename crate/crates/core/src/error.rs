use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line} is not valid UTF-8")]
    Encoding { path: PathBuf, line: usize },
    #[error("corpus `{0}` has no sentences")]
    EmptyCorpus(String),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}, column {column}: {message}")]
    TreeParse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("operation needs a {expected} corpus, `{corpus}` is {found}")]
    Tier {
        corpus: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("abstract-term list is empty")]
    EmptyLexicon,
    #[error("n-gram order {0} outside 1..=9")]
    BadOrder(usize),
    #[error("training corpus `{0}` has no tokens")]
    DegenerateCounts(String),
    #[error("duplicate corpus name `{0}`")]
    DuplicateName(String),
    #[error("captions reference images without annotations: {}", .0.join(", "))]
    MissingAnnotation(Vec<String>),
    #[error("no annotations or captions to score")]
    EmptyInput,
    #[error("report bundle has no rows")]
    EmptyBundle,
    #[error("no corpus in the bundle has part-of-speech data")]
    NoPosData,
    #[error("need at least two corpora, got {0}")]
    TooFewCorpora(usize),
    #[error("corpus `{name}`: {source}")]
    InCorpus {
        name: String,
        #[source]
        source: Box<Error>,
    },
    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_corpus(self, name: &str) -> Self {
        match self {
            e @ Error::InCorpus { .. } => e,
            e => Error::InCorpus {
                name: name.to_string(),
                source: Box::new(e),
            },
        }
    }
}
