use thiserror::Error;

/// Every failure the library can report.
///
/// Several variants are not bugs but verdict signals: `SingularPivot`,
/// `StepTooSmall` and `TransversalityFailure` tell the caller to subdivide
/// or widen and try again.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by an interval containing zero: {0}")]
    DivisionByZeroInterval(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("empty intersection of {0} and {1}")]
    EmptyIntersection(String, String),
    #[error("invalid interval endpoints [{0}, {1}]")]
    InvalidInterval(f64, f64),
    #[error("cannot parse interval from {0:?}")]
    IntervalParse(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("pivot interval contains zero in column {0}")]
    SingularPivot(usize),
    #[error("matrix is numerically rank deficient")]
    RankDeficient,
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("field has {vars} variables but {funs} component functions")]
    ArityMismatch { vars: usize, funs: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("step size {h:e} fell below h_min at t = {t}")]
    StepTooSmall { h: f64, t: f64 },
    #[error("maximum number of steps ({0}) exceeded")]
    MaxStepsExceeded(usize),
    #[error("no admissible section crossing before t = {0}")]
    NoCrossing(f64),
    #[error("transversality failure: {0}")]
    TransversalityFailure(String),
    #[error("subdivision depth limit reached on {0}")]
    DepthLimit(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{piece}: {source}")]
    InPiece { piece: String, source: Box<Error> },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Attaches the name of the subdivision piece that failed.
    pub fn in_piece(self, piece: impl Into<String>) -> Error {
        Error::InPiece { piece: piece.into(), source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
