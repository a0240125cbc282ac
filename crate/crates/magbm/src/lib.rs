//! Magnetic Bistritzer-MacDonald continuum model of twisted bilayer graphene.
//!
//! The crate is organized around the moire translation lattice and the
//! tunneling potentials built on it:
//!
//! - [`lattice`]: moire lattice geometry, dual lattice, fundamental-cell
//!   quadrature grids.
//! - [`potentials`]: the tunneling potentials `U`, `V`, `U_-`, the matrix
//!   potential `T(z)`, cell averages and sup-norms, and the squeezing
//!   condition functional.
//! - [`theta`] / [`landau`]: Jacobi theta functions, Landau levels and
//!   magnetic-torus zero modes for constant and periodic fields.
//! - [`grid`]: spectral (FFT) differentiation on the fundamental cell and
//!   the zero-mode residual harness.
//! - [`spectra`]: plane-wave discretizations — the Birman-Schwinger
//!   magic-angle problem, Floquet bands of the chiral/anti-chiral
//!   Hamiltonians, and the small-angle band-squeezing experiment.
//! - [`dos`]: semiclassical expansions of the regularized trace (density
//!   of states) and their analytic B-derivatives.
//! - [`response`]: magnetic response observables (Shubnikov-de Haas,
//!   de Haas-van Alphen, quantum Hall) built on the trace expansions.
//! - [`config`] / [`output`]: run configuration parsing and CSV/JSON
//!   emission used by the command-line driver.

pub mod config;
pub mod dos;
pub mod error;
pub mod grid;
pub mod landau;
pub mod lattice;
pub mod linalg;
pub mod output;
pub mod potentials;
pub mod response;
pub mod spectra;
pub mod testfn;
pub mod theta;

pub use error::{Error, Result};

/// Library version embedded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
