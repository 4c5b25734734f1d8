use std::path::PathBuf;

use thiserror::Error;

use crate::niggli::ReductionResult;

pub type Result<T> = std::result::Result<T, XtalError>;

/// Unified error type for the toolkit.
///
/// Variant vocabulary matches the terms used in module documentation
/// (DegenerateCell, ParseError, SchemaError, ...), so rendered errors read
/// like the docs. The CLI maps these onto exit codes; see
/// [`XtalError::is_io_like`].
#[derive(Debug, Error)]
pub enum XtalError {
    /// Cell with (near-)zero volume, non-positive lengths, or an angle
    /// triple that cannot close a parallelepiped.
    #[error("degenerate cell: {0}")]
    DegenerateCell(String),

    /// NaN or infinity where a finite number is required.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// Symbol not in the H..Og periodic table.
    #[error("unknown element symbol {0:?}")]
    UnknownElement(String),

    /// Array lengths that must agree do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Niggli reduction hit the iteration cap. The best cell found so far
    /// is carried along so diagnostics can still inspect it.
    #[error("niggli reduction did not converge within {iterations} iterations")]
    NoConvergence {
        iterations: usize,
        best_effort: Box<ReductionResult>,
    },

    /// Structure-file parse failure; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Recognized but deliberately unsupported input (e.g. Cartesian POSCAR).
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    /// Dataset JSON does not match the selected schema; the message names
    /// the offending field and record index.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("network error fetching {url}: {detail}")]
    Network { url: String, detail: String },

    /// Download or cache entry whose SHA-256 does not match the manifest.
    #[error("checksum mismatch for {path}: expected {expected}, got {actual}")]
    ChecksumMismatch {
        path: PathBuf,
        expected: String,
        actual: String,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid ratios: {0}")]
    InvalidRatios(String),

    #[error("duplicate id {0:?}")]
    DuplicateId(String),

    /// KL divergence over histograms requires identical bin edges.
    #[error("histogram edge mismatch: {0}")]
    EdgeMismatch(String),

    /// Atom matching requires equal species multisets.
    #[error("species mismatch: {0}")]
    SpeciesMismatch(String),

    #[error("no evaluable pairs (all pairs were skipped)")]
    NoEvaluablePairs,

    /// Plot spec violates an emitter precondition.
    #[error("invalid plot spec: {0}")]
    SpecError(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

impl XtalError {
    /// True for errors caused by the environment (filesystem, network)
    /// rather than by the data itself. The CLI exits 4 for these, 3 for
    /// data errors.
    pub fn is_io_like(&self) -> bool {
        matches!(self, XtalError::Io(_) | XtalError::Network { .. })
    }
}
