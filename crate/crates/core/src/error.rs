use std::path::PathBuf;

use thiserror::Error;

/// Position of a token inside a Hamiltonian source text (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourcePos {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for SourcePos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {pos}: {message}")]
    Parse { pos: SourcePos, message: String },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("qubit {0} appears more than once in a single Pauli term")]
    DuplicateQubit(usize),

    #[error("{n_qubits} qubits exceeds the dense-matrix cap of {cap}")]
    QubitCapExceeded { n_qubits: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("atoms {0} and {1} coincide")]
    CoincidentAtoms(usize, usize),

    #[error("invalid register: {0}")]
    InvalidRegister(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("genome does not match the ansatz: {0}")]
    GenomeMismatch(String),

    #[error("error-threshold stopping needs a reference ground state")]
    MissingReference,

    #[error("reference energy is zero; relative error undefined")]
    ZeroReferenceEnergy,

    #[error("non-finite energy {energy} for candidate {candidate} at iteration {iteration}")]
    NonFiniteEnergy {
        energy: f64,
        iteration: usize,
        candidate: usize,
    },

    #[error("target fidelity {0} is not reachable within the search bracket")]
    UnreachableTarget(f64),

    #[error("eigendecomposition failed to converge")]
    Eigen,

    #[error("invalid pulse schedule: {0}")]
    InvalidSchedule(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors caused by malformed user input rather than by numerics or IO.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::QubitOutOfRange { .. }
                | Error::DuplicateQubit(_)
                | Error::QubitCapExceeded { .. }
                | Error::DimensionMismatch { .. }
                | Error::CoincidentAtoms(..)
                | Error::InvalidRegister(_)
                | Error::InvalidConfig(_)
                | Error::GenomeMismatch(_)
                | Error::MissingReference
                | Error::InvalidSchedule(_)
                | Error::Json(_)
                | Error::TomlDe(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
