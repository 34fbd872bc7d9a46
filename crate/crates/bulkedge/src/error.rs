use std::path::PathBuf;

/// Failures of the command-line layer, each mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A config or model file that does not parse or validate.
    #[error("{}{field}: {message}", location(.path, *.line))]
    Parse { path: Option<PathBuf>, line: usize, field: String, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] bulkedge_core::Error),
}

/// `path: line N: `, leaving out what is unknown (line 0 means the value
/// came from an override).
fn location(path: &Option<PathBuf>, line: usize) -> String {
    let mut s = path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default();
    if line > 0 {
        s.push_str(&format!("line {line}: "));
    }
    s
}

/// Converged and agreeing (or single index computed).
pub const EXIT_OK: i32 = 0;
/// Bad config or model, or an IO failure.
pub const EXIT_CONFIG: i32 = 1;
/// A ladder or a numerical step did not converge.
pub const EXIT_NOT_CONVERGED: i32 = 2;
/// All ladders converged but the indices differ.
pub const EXIT_UNEQUAL: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use bulkedge_core::Error as E;
        match self {
            CliError::Parse { .. } | CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Core(e) => match e {
                E::Domain(_) | E::Config(_) | E::Model(_) | E::Unsupported(_) | E::Gap(_) | E::Contour(_) => EXIT_CONFIG,
                E::RefineGrid(_)
                | E::Conditioning { .. }
                | E::InconsistentFiber(_)
                | E::SpectralLocalization(_)
                | E::NotConverged(_) => EXIT_NOT_CONVERGED,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
