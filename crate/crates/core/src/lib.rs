//! Core library for simulating long waves over a rapidly varying periodic bed
//! and for verifying the two-scale approximation against direct elliptic solves.
//!
//! The crate is organized bottom-up:
//!
//! - [`spectral`]: periodic fields on the slow box, Fourier-multiplier
//!   operators, fast-torus spectra, and two-scale realization;
//! - [`bathymetry`]: periodic bottom profiles and presets;
//! - [`shallow_water`]: the effective nonlinear shallow-water evolution;
//! - [`cell_problem`]: the vertical cell problem on the fast torus, its closed
//!   form, and a finite-difference oracle;
//! - [`corrector`]: the oscillatory corrector modes, their exact propagator,
//!   and the stationary (bound) corrector;
//! - [`resonance`]: Bragg-resonance margins, certification, and Froude
//!   diagnostics;
//! - [`effective_dn`]: the homogenized Dirichlet-Neumann expansion and the
//!   two-scale ansatz assembly;
//! - [`elliptic_oracle`]: a direct variational solve of the full potential
//!   problem on the fluid strip, used as ground truth;
//! - [`residual`]: consistency residuals of the ansatz in the full water-wave
//!   system and the rate study over a range of depth ratios;
//! - [`config`] / [`io`]: run configuration and deterministic output.
//!
//! With the default `parallel` feature the embarrassingly parallel loops fan
//! out over rayon; without it every routine runs sequentially with identical
//! results (see [`par`]).

pub mod bathymetry;
pub mod cell_problem;
pub mod config;
pub mod corrector;
pub mod effective_dn;
pub mod elliptic_oracle;
pub mod error;
pub mod io;
pub mod par;
pub mod resonance;
pub mod residual;
pub mod shallow_water;
mod sparse;
pub mod spectral;

pub use error::{Error, Result};
