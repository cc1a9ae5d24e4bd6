//! Error type shared by all pipeline stages.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate disc (zero radius)")]
    DegenerateSlice,

    #[error("line does not cut the domain in a genuine disc")]
    NonTransverseLine,

    #[error("map vanishes on the boundary (|value| = {modulus:.3e} at sample {index})")]
    ZeroOnBoundary { modulus: f64, index: usize },

    #[error("map vanishes on the slice boundary circle (|value| = {modulus:.3e})")]
    ZeroOnSliceBoundary { modulus: f64 },

    #[error("winding certification failed: angular steps still ≥ π/2 at {samples} samples")]
    NoConvergence { samples: usize },

    #[error("irregular zero near {location:?} (|det DG| = {det:.3e}); perturb the map and retry")]
    IrregularZero { location: Vec<f64>, det: f64 },

    #[error("zero sets found at grid densities {coarse} and {fine} disagree; raise the density")]
    SuspectMissedZeros { coarse: usize, fine: usize },

    #[error("real-linear map is singular")]
    SingularMap,

    #[error("map is complex-linear; every invertible complex-linear completion preserves orientation")]
    IsComplexLinear,

    #[error("boundary data extends holomorphically; no negative-degree witness exists")]
    DataExtends,

    #[error("no admissible target value found on the interior search grid")]
    NoValidB,

    #[error("scale search exceeded the cap 2^40")]
    TCapExceeded,

    #[error("independently computed degrees disagree: {lhs} vs {rhs}")]
    DegreeMismatch { lhs: i64, rhs: i64 },
}

pub type Result<T> = std::result::Result<T, Error>;
