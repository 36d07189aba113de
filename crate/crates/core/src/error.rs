use thiserror::Error;

/// Errors raised by the operator and region machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operation requires a nonempty region")]
    EmptyRegion,

    #[error("no sample of the region landed inside the window")]
    EmptyIntersection,

    #[error("index {index} exceeds truncation level {truncation}")]
    IndexBeyondTruncation { index: usize, truncation: usize },

    #[error("lambda coincides with multiplier m_{0}; resolvent entry is singular")]
    SingularEntry(usize),

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("step factor exp(lambda*h) is not finite for lambda = {re}+{im}i, h = {h}; refine the grid or rescale lambda")]
    OverflowGuard { re: f64, im: f64, h: f64 },

    #[error("power iteration did not reach tolerance after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("grid with {n_cells} cells cannot resolve sin({k}*pi*t); need at least {required}")]
    GridTooCoarse {
        n_cells: usize,
        k: usize,
        required: usize,
    },

    #[error("no multiplier with modulus above the threshold within {reached} indices")]
    SearchBudgetExhausted { reached: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A region-spec or exact-number parse failure.
///
/// `pointer` is a JSON pointer (RFC 6901) to the offending value when the
/// failure is located inside a document, e.g. `/primitives/2`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message}{}", pointer.as_deref().map(|p| format!(" (at {p})")).unwrap_or_default())]
pub struct ParseError {
    pub index: Option<usize>,
    pub pointer: Option<String>,
    pub message: String,
}

impl ParseError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            index: None,
            pointer: None,
            message: message.into(),
        }
    }

    pub fn at_primitive(index: usize, message: impl Into<String>) -> Self {
        Self {
            index: Some(index),
            pointer: Some(format!("/primitives/{index}")),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
