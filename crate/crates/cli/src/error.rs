use std::path::PathBuf;

use bergman::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or parameters.
    #[error("{0}")]
    Usage(String),
    /// A run finished but its evidence contradicts itself.
    #[error("inconsistency: {0}")]
    Inconsistent(String),
    #[error("numerical budget exhausted: {0}")]
    Budget(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Inconsistent(_) => 1,
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Budget(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// Attach the config field a core error came from.
    pub fn core(field: &str) -> impl FnOnce(CoreError) -> Self + '_ {
        move |e| classify_core(field, e)
    }
}

fn classify_core(field: &str, e: CoreError) -> CliError {
    let msg = if field.is_empty() { e.to_string() } else { format!("{field}: {e}") };
    match e {
        _ if e.is_budget() => CliError::Budget(msg),
        // results that left the representable range or the mesh count as spent budget
        CoreError::Underflow(_) | CoreError::Overflow(_) | CoreError::Resolution(_) => CliError::Budget(msg),
        _ => CliError::Usage(msg),
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        classify_core("", e)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let budget = CoreError::NonConvergence { terms: 10, modulus: 0.9 };
        assert_eq!(CliError::from(budget).exit_code(), 3);
        assert_eq!(CliError::from(CoreError::Domain(1.0)).exit_code(), 2);
        assert_eq!(CliError::Inconsistent("x".into()).exit_code(), 1);
        let e = CliError::core("weight.a")(CoreError::Parameter("a > -1".into()));
        assert!(e.to_string().starts_with("weight.a: "), "{e}");
    }
}
