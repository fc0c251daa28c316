use thiserror::Error;

use crate::algebra::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dilation factor must be nonnegative")]
    NegativeScale,

    #[error("subspace is not closed under the bracket")]
    NotSubalgebra,

    #[error("hypothesis failed: {0}")]
    Hypothesis(Hypothesis),

    #[error("no escaping adjoint found after {attempts} attempts")]
    SearchExhausted { attempts: usize },

    #[error("defining polynomial is not affine with constant coefficient in any variable")]
    NoAffineVariable,

    #[error("graph leaves the box: |g| <= {bound} exceeds half-width {width}")]
    GraphExitsBox { bound: f64, width: f64 },

    #[error("direction has a nonzero horizontal component")]
    HorizontalComponent,

    #[error("base point is not on the boundary (P(x) = {value})")]
    NotOnBoundary { value: String },

    #[error("operation requires a step-2 algebra, found step {0}")]
    StepNotTwo(usize),

    #[error("defining polynomial is identically zero")]
    ZeroPolynomial,

    #[error("algebra failed validation")]
    Validation(Box<ValidationReport>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// Which hypothesis of the escaping-adjoint search failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    Subalgebra,
    Codimension,
    NotInSubalgebra,
    Generation,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Hypothesis::Subalgebra => "g' is not a subalgebra",
            Hypothesis::Codimension => "dim g' + 2 > dim g",
            Hypothesis::NotInSubalgebra => "x lies in g'",
            Hypothesis::Generation => "g' + Rx does not generate g",
        };
        f.write_str(s)
    }
}

impl Error {
    /// Machine-readable code used by the command line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::NegativeScale => "negative-scale",
            Error::NotSubalgebra => "not-subalgebra",
            Error::Hypothesis(_) => "hypothesis-failure",
            Error::SearchExhausted { .. } => "search-exhausted",
            Error::NoAffineVariable => "no-affine-variable",
            Error::GraphExitsBox { .. } => "graph-exits-box",
            Error::HorizontalComponent => "horizontal-component",
            Error::NotOnBoundary { .. } => "basepoint-not-on-boundary",
            Error::StepNotTwo(_) => "step-not-two",
            Error::ZeroPolynomial => "zero-polynomial",
            Error::Validation(_) => "validation-failure",
            Error::Parse(_) => "parse-error",
            Error::Invalid(_) => "invalid-argument",
        }
    }
}
