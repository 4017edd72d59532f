use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    /// A point or parameter lies outside the open set where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A stencil would reach past the end of the sampled data.
    #[error("stencil at index {index} needs {needed} neighbour(s) but only {available} exist")]
    Boundary {
        index: usize,
        needed: usize,
        available: usize,
    },

    #[error("non-finite value at {location}")]
    NonFinite { location: String },

    #[error("need at least {needed} points, got {got}")]
    Arity { needed: usize, got: usize },

    /// Coordinate singularity (r = 0, rho = 0) reached by a formula that divides by it.
    #[error("singular point: {0}")]
    Singular(String),

    /// The discriminant 1 - u_t^2 + |grad u|^2 (or the profile gap) fell below its floor.
    #[error("degenerate: {what} = {value:e} <= {floor:e}")]
    Degeneracy {
        what: String,
        value: f64,
        floor: f64,
    },

    #[error("regularity violated: {0}")]
    Regularity(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("{}", config_message(*line, message))]
    Config { line: usize, message: String },

    #[error("io: {0}")]
    Io(String),
}

fn config_message(line: usize, message: &str) -> String {
    match line {
        0 => format!("config: {message}"),
        l => format!("config line {l}: {message}"),
    }
}

impl LabError {
    pub fn domain(msg: impl Into<String>) -> Self {
        LabError::Domain(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        LabError::Invalid(msg.into())
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
