//! Bounds on spontaneous collapse models (CSL and Diosi-Penrose) from the
//! acceleration noise of macroscopic test masses, plus a noise-budget
//! forecast for a dual torsion balance.
//!
//! Module map:
//! - [`types`]: constants, test masses, typed noise spectra and conversions.
//! - [`collapse`]: CSL and DP effective force-noise levels.
//! - [`constraints`]: bound inversion and exclusion curves.
//! - [`budget`]: per-source torsion-balance noise budget.
//! - [`spectral`]: simulator, Welch estimator and fits used as oracles.
//! - [`io`] and [`cli`]: configuration, file formats and the command line.

pub mod budget;
pub mod cli;
pub mod collapse;
pub mod constraints;
pub mod error;
pub mod io;
pub mod spectral;
pub mod types;

pub use error::{Error, Result};
