//! Numerical oracles: a stochastic oscillator simulator, a Welch PSD
//! estimator, the white-plus-colored spectral decomposition and the
//! power-law fit of the Brownian level decay.

mod decay;
mod decompose;
mod simulate;
mod welch;

pub use decay::{fit_powerlaw_decay, BrownianRunRecord, DecayFit};
pub use decompose::{decompose_white_plus_colored, ColorModel, Decomposition};
pub use simulate::{simulate_oscillator, OscillatorDrive, SimulationRun, RNG_ALGORITHM};
pub use welch::{welch_psd, welch_segment_count, Window};
