//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Landau gap closed: the window around a Landau level is empty, the
    /// semiclassical expansion hypotheses are violated.
    #[error("gap closed for band n={n} at B={b}: window ({lo}, {hi}) is empty")]
    GapClosed { n: i32, b: f64, lo: f64, hi: f64 },

    /// Test-function support leaks into a gap-closed spectral region.
    #[error("support violation: {0}")]
    SupportViolation(String),

    /// Quasi-momentum lies on the dual lattice, the resolvent is singular.
    #[error("k in dual lattice: {0}")]
    SingularResolvent(String),

    /// Square-root branch of the squeezing condition undefined, |W| too small.
    #[error("branch ambiguity: |W(z)| = {0:.3e} < 1e-14")]
    BranchAmbiguity(f64),

    /// Target value unattainable within the search bracket.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Invalid run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Numerical failure (eigensolver breakdown, non-convergence, ...).
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
