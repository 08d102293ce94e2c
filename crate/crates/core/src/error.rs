use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid probability table: {0}")]
    InvalidTable(String),

    #[error("all counts are zero")]
    EmptyData,

    #[error("input tuple {inputs:?} has zero probability mass")]
    ZeroInputMass { inputs: Vec<usize> },

    #[error("input tuple {inputs:?} has no joint detections")]
    NoDetections { inputs: Vec<usize> },

    #[error("invalid detection efficiency {value} (must lie in (0, 1])")]
    InvalidEfficiency { value: f64 },

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("degenerate detection bounds: eta_min must be positive")]
    DegenerateBounds,

    #[error("operation requires {expected}, got {found}")]
    Shape { expected: String, found: String },

    #[error("enumeration would produce {count} vertices, above the cap of {cap}")]
    TooLarge { count: u128, cap: u128 },

    #[error("ill-formed linear program: {0}")]
    IllFormed(String),

    #[error("simplex stopped after {iterations} iterations without a verdict")]
    Unsolved { iterations: usize },

    #[error("solver produced a certificate that failed verification: {0}")]
    Numerical(String),

    #[error("behavior is signaling (deviation {deviation:.3e}); marginals are ill-defined")]
    SignalingInput { deviation: f64 },

    #[error("convention {0} is not supported by this operation")]
    UnsupportedConvention(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn shape(expected: impl Into<String>, found: impl Into<String>) -> Self {
        Error::Shape {
            expected: expected.into(),
            found: found.into(),
        }
    }
}
