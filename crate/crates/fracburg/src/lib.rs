//! Pseudo-spectral solver and analysis harness for the space-periodic
//! fractional Burgers equation
//!
//! ```text
//! u_t + (f(u))_x + nu Lambda^alpha u = 0,   x in S^1 = R/Z,
//! ```
//!
//! with a strongly convex flux `f`, fractional dissipation exponent
//! `alpha` in (1, 2] and small viscosity `nu`. The crate provides
//!
//! * a zero-mean periodic spectral representation with fractional
//!   Laplacian multipliers and the full family of Sobolev norms
//!   ([`spectral`]),
//! * flux hypothesis validation and the dealiased nonlinear term
//!   ([`flux`]),
//! * exponential (ETDRK) time integration built on the exact fractional
//!   heat semigroup ([`stepper`]),
//! * decaying-turbulence diagnostics: structure functions, flatness,
//!   layer-averaged energy spectrum, dissipation budget ([`diagnostics`]),
//! * viscosity sweeps with log-log scaling-exponent regression
//!   ([`scaling`]),
//! * config parsing, binary snapshots and CSV/JSON outputs ([`config`],
//!   [`snapshot`], [`output`]),
//! * the self-checking verification suite ([`verify`]).

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod flux;
pub mod output;
pub mod scaling;
pub mod snapshot;
pub mod spectral;
pub mod stepper;
pub mod verify;

pub use error::{Error, Result};
pub use spectral::{Grid, NormKind, NormRequest, SpectralField};
