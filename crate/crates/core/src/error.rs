use thiserror::Error;

/// Errors produced by the model, analytic, walk and statistics layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range (NaN and infinities included).
    #[error("parameter `{name}` out of range: {value} ({detail})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        detail: &'static str,
    },

    /// Parameters are individually in range but violate a model assumption
    /// (e.g. no node-creating events, or a zero attachment weight axis).
    #[error("model assumption violated: {0}")]
    AssumptionViolated(String),

    /// A parameter was supplied that does not belong to the requested model kind.
    #[error("inconsistent parameters for model `{kind}`: {detail}")]
    InconsistentKind { kind: &'static str, detail: String },

    /// An operation was invoked with parameters of the wrong model kind.
    #[error("operation requires a {expected} model, got {got}")]
    WrongKind {
        expected: &'static str,
        got: &'static str,
    },

    /// The requested computation method does not support this model kind.
    #[error("method `{method}` does not support {kind} parameters")]
    MethodUnsupported {
        method: &'static str,
        kind: &'static str,
    },

    /// Floating-point evaluation of an alternating sum lost too much precision;
    /// the estimated relative error is attached. Callers should fall back to the
    /// absorbing-walk computation.
    #[error("alternating sum numerically unstable (estimated relative error {estimate:.3e})")]
    NumericallyUnstable { estimate: f64 },

    /// Adaptive integration failed to reach the requested tolerance.
    #[error("quadrature did not converge (requested {requested:.3e}, achieved {achieved:.3e})")]
    NoConvergence { requested: f64, achieved: f64 },

    /// The absorbing-walk grid leaked more mass than the configured ceiling.
    #[error("grid too small: leaked mass {leaked:.6} exceeds ceiling {ceiling:.6}")]
    GridTooSmall { leaked: f64, ceiling: f64 },

    /// Two PMFs were combined but their grids differ.
    #[error("grid mismatch: ({0}, {1}) vs ({2}, {3})")]
    GridMismatch(u32, u32, u32, u32),

    /// A fit was requested on fewer support points than the estimator needs.
    #[error("insufficient support for fit: need at least {needed}, got {got}")]
    InsufficientSupport { needed: usize, got: usize },

    /// Malformed input while reading one of the on-disk formats.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
