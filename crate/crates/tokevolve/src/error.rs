use thiserror::Error;

pub type TokenId = u32;

#[derive(Debug, Error)]
pub enum Error {
    #[error("token id {0} out of range (vocab size {1})")]
    IdOutOfRange(TokenId, usize),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed {file} at line {line}: {msg}")]
    Malformed {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("tokenizer validation failed: {0}")]
    Invalid(String),
    #[error("merge rule `{left} {right}` references a token not in the vocabulary")]
    UnknownMergeToken { left: String, right: String },
    #[error("tokenizers disagree on {0}; cannot merge")]
    MergeMismatch(&'static str),
    #[error("rule `{left} {right}` has operands unreachable in the merged tokenizer")]
    UnreachableRule { left: String, right: String },
    #[error("embedding matrix has {got} rows but tokenizer vocab size is {expected}")]
    RowCountMismatch { got: usize, expected: usize },
    #[error("unknown embedding init strategy `{0}`")]
    UnknownStrategy(String),
    #[error("unreadable corpus document at index {index}: {msg}")]
    CorpusDocument { index: usize, msg: String },
    #[error("{0}")]
    InvalidConfig(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
