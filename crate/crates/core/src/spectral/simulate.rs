use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{require_non_negative, require_positive};

/// Recorded in artifact headers so runs can be reproduced elsewhere.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9), StandardNormal ziggurat (rand_distr 0.5)";

/// Minimum number of samples a run must have.
pub const MIN_SAMPLES: usize = 1 << 14;

/// Largest allowed `dt * omega_m`.
pub const MAX_PHASE_STEP: f64 = 0.1;

/// A viscously damped oscillator driven by white force noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatorDrive {
    /// kg
    pub effective_mass: f64,
    /// rad/s
    pub omega_m: f64,
    pub q: f64,
    /// One-sided white force PSD, N^2/Hz.
    pub force_psd: f64,
    /// s
    pub dt: f64,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRun {
    pub dt: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Position at `t = k dt`, starting from rest at the origin.
    pub trajectory: Vec<f64>,
    /// Force held constant over `[k dt, (k+1) dt)`.
    pub force_trace: Vec<f64>,
}

/// Exact zero-order-hold discretization of `x'' + (w/Q) x' + w^2 x = F/M`:
/// `state[k+1] = phi * state[k] + gamma * F[k]`.
struct Discretization {
    phi: [[f64; 2]; 2],
    gamma: [f64; 2],
}

impl Discretization {
    fn new(mass: f64, w0: f64, q: f64, dt: f64) -> Self {
        let damping = w0 / q;
        let half = damping / 2.0;
        let wd = (w0 * w0 - half * half).sqrt();
        let decay = (-half * dt).exp();
        let (s, c) = (wd * dt).sin_cos();
        let phi = [
            [decay * (c + s * half / wd), decay * s / wd],
            [-decay * s * w0 * w0 / wd, decay * (c - s * half / wd)],
        ];
        // 1 - phi22 - damping * phi12 written to avoid cancelling O(1) terms.
        let one_minus = -(-half * dt).exp_m1() * c + 2.0 * (wd * dt / 2.0).sin().powi(2)
            - decay * s * half / wd;
        let gamma = [one_minus / (mass * w0 * w0), phi[0][1] / mass];
        Discretization { phi, gamma }
    }
}

/// Integrates the oscillator from rest with a piecewise-constant Gaussian
/// force whose one-sided PSD is `force_psd` (per-sample variance
/// `force_psd / (2 dt)`). Deterministic per seed.
pub fn simulate_oscillator(drive: &OscillatorDrive) -> Result<SimulationRun> {
    let mass = require_positive("effective mass", drive.effective_mass)?;
    let w0 = require_positive("omega_m", drive.omega_m)?;
    let q = require_positive("Q", drive.q)?;
    let dt = require_positive("dt", drive.dt)?;
    let psd = require_non_negative("force PSD", drive.force_psd)?;
    if q <= 0.5 {
        return Err(Error::invalid(format!("simulator needs an underdamped oscillator, Q = {q}")));
    }
    if dt * w0 >= MAX_PHASE_STEP {
        return Err(Error::invalid(format!(
            "dt * omega_m = {} must be below {MAX_PHASE_STEP}",
            dt * w0
        )));
    }
    if drive.n_samples < MIN_SAMPLES {
        return Err(Error::invalid(format!(
            "simulation needs at least {MIN_SAMPLES} samples, got {}",
            drive.n_samples
        )));
    }

    let disc = Discretization::new(mass, w0, q, dt);
    let sigma = (psd / (2.0 * dt)).sqrt();
    let mut rng = ChaCha20Rng::seed_from_u64(drive.seed);
    let n = drive.n_samples;
    let mut trajectory = Vec::with_capacity(n);
    let mut force_trace = Vec::with_capacity(n);
    let (mut x, mut v) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let z: f64 = StandardNormal.sample(&mut rng);
        let force = sigma * z;
        trajectory.push(x);
        force_trace.push(force);
        let nx = disc.phi[0][0] * x + disc.phi[0][1] * v + disc.gamma[0] * force;
        let nv = disc.phi[1][0] * x + disc.phi[1][1] * v + disc.gamma[1] * force;
        x = nx;
        v = nv;
    }
    Ok(SimulationRun {
        dt,
        n_samples: n,
        seed: drive.seed,
        trajectory,
        force_trace,
    })
}
