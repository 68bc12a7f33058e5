use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Engine(#[from] balducci_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),

    #[error("closed form and quadrature differ by {relative:e} relative, above {limit:e}")]
    Tolerance { relative: f64, limit: f64 },
}

impl CliError {
    /// 1 for invalid input, 2 for a failed comparison, 3 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Engine(_) | CliError::Usage(_) => 1,
            CliError::Tolerance { .. } => 2,
            CliError::Read { .. } | CliError::Write(_) => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(
            CliError::from(balducci_core::Error::Format("x".into())).exit_code(),
            1
        );
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(
            CliError::Tolerance {
                relative: 1e-3,
                limit: 1e-6
            }
            .exit_code(),
            2
        );
        let io = std::io::Error::new(std::io::ErrorKind::NotFound, "gone");
        assert_eq!(CliError::Write(io).exit_code(), 3);
    }
}
