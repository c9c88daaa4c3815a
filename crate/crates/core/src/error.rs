use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("denominator is identically zero")]
    ZeroDenominator,

    #[error("cannot contract a degree-zero form")]
    DegreeZero,

    #[error("objects live on different charts")]
    ChartMismatch,

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("bad arity: {0}")]
    BadArity(String),

    #[error("cocycle is not invertible")]
    NonInvertibleCocycle,

    #[error("form is degenerate over the rational-function field")]
    Degenerate,

    #[error("not a contact-Hitchin pair")]
    NotHitchin,

    #[error("not a generalized almost contact structure")]
    NotAlmost,

    #[error("generalized complex data is not homogeneous")]
    NotHomogeneous,

    #[error("form is not multiplicative")]
    NotMultiplicative,

    #[error("invalid Lie algebroid presentation: {0}")]
    InvalidAlgebroid(String),

    #[error("unsupported groupoid: {0}")]
    UnsupportedGroupoid(String),

    #[error("L-valued forms cannot be wedged with each other")]
    ValueMismatch,

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("undeclared coordinate `{0}`")]
    UndeclaredCoordinate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
