use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("element {element} references vertex {index}, but the mesh has {n_vertices} vertices")]
    DanglingIndex {
        element: usize,
        index: usize,
        n_vertices: usize,
    },

    #[error("element {element} is degenerate (volume {volume:e})")]
    DegenerateElement { element: usize, volume: f64 },

    #[error("facet {facet:?} is shared by {count} elements; the mesh is not a manifold")]
    NonManifold { facet: Vec<usize>, count: usize },

    #[error("diffusion tensor of element {element} is not symmetric positive definite")]
    NotSpd { element: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("lumped mass row {row} has nonpositive sum {value:e}")]
    NonPositiveMass { row: usize, value: f64 },

    #[error("spectral function is not finite at lambda = {lambda:e}")]
    NonFiniteSpectral { lambda: f64 },

    #[error("SPDE symbol changes sign or vanishes on [{lo:e}, {hi:e}]")]
    SymbolZeroCrossing { lo: f64, hi: f64 },

    #[error("degenerate spectral interval [{lo:e}, {hi:e}]")]
    DegenerateInterval { lo: f64, hi: f64 },

    #[error("spectrum [{spec_lo:e}, {spec_hi:e}] is not enclosed by expansion interval [{lo:e}, {hi:e}]")]
    IntervalMismatch {
        lo: f64,
        hi: f64,
        spec_lo: f64,
        spec_hi: f64,
    },

    #[error("Chebyshev order cap {cap} reached with sup-error {achieved:e} > {target:e}")]
    OrderCapReached {
        cap: usize,
        achieved: f64,
        target: f64,
    },

    #[error("sampler produced a non-finite weight (sample {sample})")]
    NonFiniteSample { sample: usize },

    #[error("dense oracle limited to n <= {limit}, got {n}")]
    DenseGuard { n: usize, limit: usize },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("matrix is indefinite beyond tolerance (min eigenvalue {min_eig:e})")]
    Indefinite { min_eig: f64 },

    #[error("point {point:?} lies outside the mesh (distance {distance:e} to the nearest element)")]
    OutsideMesh { point: Vec<f64>, distance: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("tail sum did not converge within {cutoff} terms")]
    NonConvergentTail { cutoff: usize },

    #[error("{0}")]
    Analysis(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
