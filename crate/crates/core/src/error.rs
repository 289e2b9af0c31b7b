use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong between a CSV file and a frontier.
///
/// Variants split into two families: malformed or insufficient input, and
/// numeric failures of well-formed input (see [`Error::is_numeric`]). The CLI
/// maps them to distinct exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty file")]
    EmptyFile,

    #[error("bad header at line 1: expected `date,close`, found `{found}`")]
    BadHeader { found: String },

    #[error("malformed row at line {line}: {message}")]
    MalformedRow { line: u64, message: String },

    #[error("non-positive price at line {line}")]
    NonPositivePrice { line: u64 },

    #[error("duplicate date {date} at line {line}")]
    DuplicateDate { date: String, line: u64 },

    #[error("invalid series `{asset}`: {message}")]
    InvalidSeries { asset: String, message: String },

    #[error("empty intersection of trading dates")]
    EmptyIntersection,

    #[error("insufficient data: need at least {required} observations, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    #[error("invalid window `{name}`: {message}")]
    InvalidWindow { name: String, message: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("return at index {index} is {value}; growth factor must stay positive")]
    TotalLoss { index: usize, value: f64 },

    #[error("zero variance in {0}")]
    ZeroVariance(String),

    #[error("zero volatility: Sharpe ratio undefined")]
    ZeroVolatility,

    #[error("zero beta: Treynor ratio undefined")]
    ZeroBeta,

    #[error("zero risk: Sharpe ratio undefined")]
    ZeroRisk,

    #[error("matrix is not symmetric at ({row}, {col}): difference {difference:e}")]
    NotSymmetric { row: usize, col: usize, difference: f64 },

    #[error("matrix is not positive definite: pivot {index} is {pivot:e}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("inverse failed its certificate: max |A*inv(A) - I| = {residual:e}")]
    InverseCertificate { residual: f64 },

    #[error("degenerate frontier: delta = {delta:e} (all expected returns equal)")]
    DegenerateFrontier { delta: f64 },

    #[error("tangency undefined: B - alpha*rf = {denominator:e}")]
    TangencyUndefined { denominator: f64 },

    #[error("negative radicand {value:e} in frontier risk")]
    NegativeRadicand { value: f64 },

    #[error("window is not viable: {0}")]
    NonViable(String),

    #[error("grid oracle: {0}")]
    Grid(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("window `{window}`: {source}")]
    InWindow {
        window: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap with the pipeline stage that produced the error.
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for failures of the mathematics on well-formed input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Stage { source, .. } | Error::InWindow { source, .. } => source.is_numeric(),
            Error::TotalLoss { .. }
            | Error::ZeroVariance(_)
            | Error::ZeroVolatility
            | Error::ZeroBeta
            | Error::ZeroRisk
            | Error::NotPositiveDefinite { .. }
            | Error::InverseCertificate { .. }
            | Error::DegenerateFrontier { .. }
            | Error::TangencyUndefined { .. }
            | Error::NegativeRadicand { .. } => true,
            _ => false,
        }
    }

    /// The innermost error, with stage labels stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } | Error::InWindow { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}
