use serde_json::{json, Value};
use stark_weierstrass::Error as CoreError;
use thiserror::Error;

/// Everything a subcommand can fail with; each variant maps onto one exit
/// status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("orbit escapes before {grid} = {at}; output truncated after {rows} rows")]
    Escaped { grid: &'static str, at: f64, rows: usize },
    #[error("verification failed: max error {max:e} exceeds tolerance {tol:e}")]
    ToleranceExceeded { max: f64, tol: f64 },
}

pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ESCAPED: i32 = 3;

/// Core errors caused by the input itself rather than by the numerics.
fn is_input_error(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::InvalidModel
            | CoreError::InvalidState(_)
            | CoreError::InvalidTarget(_)
            | CoreError::InvalidConfig(_)
            | CoreError::OnPolarAxis
            | CoreError::OutOfScopeBidimensional
            | CoreError::BeyondEquilibriumLimit { .. }
    )
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if is_input_error(e) => EXIT_USAGE,
            CliError::Core(_) | CliError::Io { .. } | CliError::ToleranceExceeded { .. } => EXIT_NUMERICAL,
            CliError::Escaped { .. } => EXIT_ESCAPED,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.code(),
            CliError::Io { .. } => "io",
            CliError::Escaped { .. } => "escaped",
            CliError::ToleranceExceeded { .. } => "tolerance_exceeded",
        }
    }

    /// The `{code, message, context}` object written to stderr.
    pub fn to_json(&self, command: &str) -> Value {
        let mut context = match self {
            CliError::Usage(_) => json!({}),
            CliError::Core(e) => json!({ "detail": format!("{e:?}") }),
            CliError::Io { path, .. } => json!({ "path": path }),
            CliError::Escaped { grid, at, rows } => json!({ "grid": grid, "at": at, "rows": rows }),
            CliError::ToleranceExceeded { max, tol } => json!({ "max_error": max, "tol": tol }),
        };
        context["command"] = json!(command);
        json!({ "code": self.code(), "message": self.to_string(), "context": context })
    }
}
