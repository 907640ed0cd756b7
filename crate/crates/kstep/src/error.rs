use thiserror::Error;

/// Errors from the solver stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: operator is {n}x{n} but vector has length {len}")]
    DimensionMismatch { n: usize, len: usize },

    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,

    #[error("rank deficiency at column {column}: norm collapsed below 1e-13 of its input")]
    RankDeficient { column: usize },

    #[error(
        "QR iteration did not converge within {sweeps} sweeps \
         ({deflated} of {size} eigenvalues deflated)"
    )]
    QrNoConvergence {
        sweeps: usize,
        deflated: usize,
        size: usize,
        /// Eigenvalues that did deflate before the cap, as (re, im).
        partial: Vec<(f64, f64)>,
    },

    #[error("Gram matrix numerically singular (condition estimate {cond:.3e})")]
    IllConditionedGram { cond: f64 },

    #[error("dominant Ritz value is a complex conjugate pair ({re:.6e} ± {im:.6e}i)")]
    ComplexDominantRitz { re: f64, im: f64 },

    #[error("dynamic extrapolation parameter undefined for lambda1 = 0")]
    ZeroLambda1,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Market(#[from] MarketError),
}

/// Matrix Market parse failures, one variant per rejection cause.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarketError {
    #[error("malformed Matrix Market header: {0}")]
    MalformedHeader(String),

    #[error("unsupported format `array`: only `coordinate` files are accepted")]
    ArrayFormat,

    #[error("unsupported field `complex`")]
    ComplexField,

    #[error("unsupported field `{0}`")]
    UnsupportedField(String),

    #[error("unsupported symmetry `{0}`: expected `general` or `symmetric`")]
    UnsupportedSymmetry(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("entry index ({row}, {col}) out of range for a {n}x{n} matrix (line {line})")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        n: usize,
        line: usize,
    },

    #[error("cannot parse line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("file ends after {got} of {expected} declared entries")]
    TooFewEntries { got: usize, expected: usize },

    #[error("more entries than the {expected} declared in the size line")]
    TooManyEntries { expected: usize },

    #[error("I/O error while reading: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
