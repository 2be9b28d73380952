use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the reconstruction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("recurrence overflow at order {order} for argument {argument}")]
    Overflow { order: usize, argument: f64 },

    #[error("coincident points: separation {separation:e} is below {threshold:e}")]
    CoincidentPoints { separation: f64, threshold: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "degenerate mode system at degree {degree} ({family}): condition number {condition:e}"
    )]
    DegenerateModes {
        degree: usize,
        family: &'static str,
        condition: f64,
    },

    #[error("source at {radius} is outside the expansion region (cavity radius {cavity_radius})")]
    SourceOutsideCavity { radius: f64, cavity_radius: f64 },

    #[error("source at the expansion center is not supported")]
    SourceAtOrigin,

    #[error("sampling point lies on the measurement sphere (|z| = {radius})")]
    SamplingOnSurface { radius: f64 },

    #[error("assembly failed for node pair ({i}, {j}): {source}")]
    Assembly {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("right-hand side is identically zero")]
    ZeroRhs,

    #[error("no active sampling points outside the mask")]
    EmptyActiveSet,

    #[error("malformed near-field header: {0}")]
    MalformedHeader(String),

    #[error("dimension mismatch: header declares {declared} nodes, file holds {found}")]
    DimensionMismatch { declared: usize, found: usize },

    #[error("file length mismatch: expected {expected} bytes, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },

    #[error("wavenumber mismatch: data has k = {data}, configuration has k = {config}")]
    WavenumberMismatch { data: f64, config: f64 },

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("unsupported geometry `{0}`: only concentric spheres can be simulated; supply external data through the NFEM1 format")]
    UnsupportedGeometry(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
