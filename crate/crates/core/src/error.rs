use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("degenerate tetrahedron (singular field system)")]
    DegenerateTet,

    #[error("identical hyperplanes have no bisector")]
    IdenticalHyperplanes,

    #[error("multiplicative weight for patch {patch} must be positive, got {weight}")]
    NonPositiveWeight { patch: usize, weight: f64 },

    #[error("negative distance {0}")]
    NegativeDistance(f64),

    #[error("patch {patch} out of range (surface has {count} patches)")]
    PatchOutOfRange { patch: usize, count: usize },

    #[error("empty index scope")]
    EmptyScope,

    #[error("edge endpoints lie on the same side of the cutting hyperplane")]
    SameSide,

    #[error("the four hyperplanes do not meet in a single point")]
    SingularEncoding,

    #[error("polytope supports at most {0} hyperplanes")]
    TooManyPlanes(usize),

    /// Raised by tolerance-mode cutting when the combinatorial structure
    /// becomes inconsistent; the exact backend is the remedy.
    #[error("numerical inconsistency while cutting: {0}")]
    Inconsistent(String),

    #[error("propagation did not terminate in tet {tet}: {discovered} generators discovered, only {patches} exist")]
    PropagationAbort { tet: usize, discovered: usize, patches: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), line, msg: msg.into() }
    }

    /// True for failures that retrying with exact arithmetic can fix.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Inconsistent(_))
    }
}
