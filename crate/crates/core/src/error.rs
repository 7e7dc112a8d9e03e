//! Error type shared across the crate.

use thiserror::Error;

/// Unified error type. Variants carry enough context to point at the offending
/// mode, grid point, or time without the caller re-deriving it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("symbol evaluated to a non-finite value at mode {k:?}")]
    NonFiniteSymbol { k: Vec<i64> },

    #[error("operation requires a zero-mean field, found |mean| = {mean:.3e}")]
    NonZeroMean { mean: f64 },

    #[error("coefficients are not Hermitian-symmetric at mode {k:?}")]
    NonHermitian { k: Vec<i64> },

    #[error("depth positivity violated: depth = {depth:.6e} at point index {index} (t = {time})")]
    Depth { depth: f64, index: usize, time: f64 },

    #[error("time step {dt:.3e} exceeds the advective stability limit {limit:.3e}")]
    Cfl { dt: f64, limit: f64 },

    #[error(
        "resonance guard violated at {violations} point(s); worst offender: \
         slow index {index}, mode {k:?}, margin = {margin:.6e} within threshold {threshold:.6e}"
    )]
    Resonance { violations: usize, index: usize, k: Vec<i64>, margin: f64, threshold: f64 },

    #[error(
        "fast period 2*pi*gamma = {fast_period:.9e} is not commensurate with the box length \
         {box_length:.9e}; nearest commensurate gamma = {suggested:.12e}"
    )]
    Commensurability { fast_period: f64, box_length: f64, suggested: f64 },

    #[error(
        "realizing fast mode k = {k:?} lands on slow frequency {slow_index}, beyond the \
         grid's Nyquist limit {nyquist}; refine the slow grid or lower the cutoff"
    )]
    RealizeAliased { k: Vec<i64>, slow_index: i64, nyquist: i64 },

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("{0} not supported: {1}")]
    Unsupported(&'static str, String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
