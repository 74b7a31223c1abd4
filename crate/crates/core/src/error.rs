use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("truncation orders differ ({left} vs {right})")]
    OrderMismatch { left: usize, right: usize },

    #[error("series constant term {0} must be strictly positive")]
    SingularConstantTerm(f64),

    #[error("coefficient {index} = {value:e} is not a valid probability")]
    InvalidPgf { index: usize, value: f64 },

    #[error("parameter `{name}` = {value} outside its domain ({expected})")]
    ParameterDomain {
        name: String,
        value: f64,
        expected: String,
    },

    #[error("moment does not exist: {0}")]
    MomentDivergence(String),

    #[error("incompatible parameters: {0}")]
    IncompatibleParameters(String),

    #[error("conditional expectation undefined: {0}")]
    CeUndefined(String),

    #[error("conditional supports differ at (x={x}, y={y}): incompatibility of type (i)")]
    DomainMismatch { x: usize, y: usize },

    #[error("degenerate specification: {0}")]
    DegenerateSpec(String),

    #[error("unsupported law: {0}")]
    UnsupportedLaw(String),

    #[error("slope product ac = {0} violates the correlation bound ac < 1")]
    CorrelationBound(f64),

    #[error("outside supported range: {0}")]
    OutOfScope(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("conditioning slice has probability {0:e}")]
    NullConditioning(f64),

    #[error("affine fit underdetermined: {found} configurations, need at least {needed}")]
    UnderdeterminedFit { found: usize, needed: usize },

    #[error("divergence detected at sweep {sweep}: coordinate {coordinate} reached {value}")]
    DivergenceDetected {
        sweep: usize,
        coordinate: usize,
        value: u64,
    },

    #[error("diagnostic inconclusive: no conditioning value with at least {min_visits} visits")]
    InconclusiveDiagnostic { min_visits: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

impl Error {
    pub(crate) fn domain(name: &str, value: f64, expected: &str) -> Self {
        Error::ParameterDomain {
            name: name.to_string(),
            value,
            expected: expected.to_string(),
        }
    }
}
