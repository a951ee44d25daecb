use std::fmt;

/// A single configuration problem, tied to the line it came from when known.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

fn join(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid configuration: {}", join(.0))]
    ConfigDiagnostics(Vec<Diagnostic>),

    #[error("grid mismatch: {left} vs {right} modes per axis")]
    GridMismatch { left: usize, right: usize },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("integration diverged at t = {t}")]
    Diverged { t: f64 },

    #[error("time step {dt} exceeds the CFL limit {limit:.6e} at t = {t}")]
    Cfl { dt: f64, limit: f64, t: f64 },

    #[error("forcing mode {mode:?} is not admissible: {reason}")]
    ForcingMode { mode: [i64; 3], reason: String },

    #[error("exponent p = {0} is outside [2, inf]")]
    InvalidExponent(f64),

    #[error("{name} must be strictly positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },

    #[error("slope fit needs at least 3 nonempty shells in range, found {found}")]
    InsufficientShells { found: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("artifact: {0}")]
    Artifact(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value })
    }
}
