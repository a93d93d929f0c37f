use thiserror::Error;

/// Errors raised by the evaluation engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar expression hit a singular operation while being lifted to a jet.
    #[error("domain fault in `{op}` at {point:?}: offending sub-expression `{expr}`")]
    DomainFault {
        op: &'static str,
        expr: String,
        point: Vec<f64>,
    },

    /// A partial derivative of higher degree than the jet order was requested.
    #[error("multi-index degree {requested} exceeds jet order {order}")]
    InsufficientOrder { requested: usize, order: usize },

    /// Mismatched jet dimensions in an arithmetic operation.
    #[error("jet dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    /// A Christoffel symbol or tensor component failed to evaluate to a finite number.
    #[error("non-finite value while evaluating `{what}` at {point:?}")]
    NonFinite { what: &'static str, point: Vec<f64> },

    /// The Ricci tensor is not skew-symmetric within tolerance; the connection
    /// is outside the class handled by the recurrence machinery.
    #[error("Ricci tensor has symmetric part {0:.3e}; connection is not Ricci-skew")]
    NotSkewRicci(f64),

    /// |rho_12| fell below the degeneracy margin at a sample point.
    #[error("Ricci component rho_12 = {0:.3e} below degeneracy margin at {1:?}")]
    DegenerateRho(f64, Vec<f64>),

    /// An operator restricted to the generic regime was applied at a point
    /// where det Q is below the margin (or vice versa for the special regime).
    #[error("regime violation: {0}")]
    RegimeViolation(String),

    /// The moving frame is (numerically) linearly dependent at a point.
    #[error("frame degenerate at {0:?}: determinant {1:.3e}")]
    FrameDegenerate(Vec<f64>, f64),

    /// A declared frame-connection relation failed its residual gate.
    #[error("frame connection gate failed: {0} (residual {1:.3e})")]
    FrameGate(String, f64),

    /// Rejection sampling could not produce a point off the excluded loci.
    #[error("could not sample {0} chart points off the excluded loci")]
    SamplingExhausted(usize),

    /// The 4-metric is degenerate or has the wrong signature at a point.
    #[error("metric fault at {point:?}: {what}")]
    MetricFault { what: String, point: Vec<f64> },

    /// Precondition violation of a public operation.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Unknown catalog id or malformed id string.
    #[error("unknown or malformed catalog id `{0}`")]
    BadCatalogId(String),

    /// Expression parse error (CLI-facing `wong:<expr>` ids).
    #[error("expression parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
