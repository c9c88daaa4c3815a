use thiserror::Error;

/// Errors that stop the CLI before any check runs (exit code 2).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("line {line}: undeclared coordinate `{name}`")]
    UndeclaredCoordinate { line: usize, name: String },

    #[error("line {line}: {source}")]
    Engine { line: usize, source: gcbundle::Error },

    #[error("{0}")]
    Build(#[from] gcbundle::Error),

    #[error("unknown example `{0}`; run `gcb examples` for the list")]
    UnknownExample(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}
