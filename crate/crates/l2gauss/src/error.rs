use thiserror::Error;

/// Errors reported by the library. Conditions that cannot be decided are
/// reported rather than guessed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coordinate {index} is zero")]
    ZeroCoordinate { index: usize },
    #[error("tail rule cannot bound the remaining factors")]
    TailNotCertified,
    #[error("log-tail of the density weight is not summable")]
    TailDivergent,
    #[error("sample produced a non-finite value")]
    NonFiniteSample,
    #[error("malformed perturbation block: {0}")]
    MalformedBlock(String),
    #[error("local finiteness bound violated on the region")]
    LocalFinitenessViolated,
    #[error("region is not shared by both charts")]
    ChartMismatch,
    #[error("co-dimension {codim} exceeds the supported limit {limit}")]
    UnsupportedCodimension { codim: usize, limit: usize },
    #[error("form is not closed: S f has norm {norm:e}")]
    NotClosed { norm: f64 },
    #[error("basis too small: residual {residual:e} exceeds tolerance")]
    BasisTooSmall { residual: f64 },
    #[error("point is not near infinity: gauge diverges")]
    NotNearInfinity,
    #[error("ratio test inconclusive")]
    RatioTestInconclusive,
    #[error("chart condition violated: {0}")]
    ConditionViolated(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
