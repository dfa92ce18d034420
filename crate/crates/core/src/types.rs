//! Shared data model: physical constants, test-mass geometry, typed noise
//! spectra and the explicit conversions between spectrum kinds.
//!
//! All spectra are one-sided power spectral densities. The amplitude
//! spectral density is the pointwise square root.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Atomic mass unit, CODATA 2018.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Proton mass, CODATA 2018.
pub const PROTON_MASS: f64 = 1.672_621_923_69e-27;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Newtonian constant of gravitation, m^3 kg^-1 s^-2.
    pub g: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Reference nucleon mass used by CSL, kg.
    pub m0: f64,
    /// Speed of light, m/s.
    pub c: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        hbar: 1.054_571_817e-34,
        g: 6.674_30e-11,
        k_b: 1.380_649e-23,
        m0: ATOMIC_MASS_UNIT,
        c: 299_792_458.0,
    };

    /// CODATA 2018 with the proton mass as CSL reference mass.
    pub fn with_proton_reference() -> Self {
        PhysicalConstants {
            m0: PROTON_MASS,
            ..Self::CODATA_2018
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hbar", self.hbar),
            ("G", self.g),
            ("k_B", self.k_b),
            ("m0", self.m0),
            ("c", self.c),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!(
                    "constant {name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Short label of the constants set, written into artifact headers.
    pub fn label(&self) -> String {
        if *self == Self::CODATA_2018 {
            "CODATA-2018 (m0 = amu)".to_string()
        } else if *self == Self::with_proton_reference() {
            "CODATA-2018 (m0 = proton mass)".to_string()
        } else {
            format!(
                "custom (hbar={:e}, G={:e}, k_B={:e}, m0={:e}, c={:e})",
                self.hbar, self.g, self.k_b, self.m0, self.c
            )
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

pub(crate) fn require_positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")))
    }
}

pub(crate) fn require_non_negative(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")))
    }
}

/// A cuboid test mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestMass {
    /// kg
    pub mass: f64,
    /// kg/m^3
    pub density: f64,
    /// Cube edge, m.
    pub side: f64,
    /// Crystal lattice constant, m.
    pub lattice_constant: f64,
}

/// Relative mass/geometry mismatch above which a test mass is flagged.
pub const MASS_CONSISTENCY_TOLERANCE: f64 = 0.25;

impl TestMass {
    pub fn new(mass: f64, density: f64, side: f64, lattice_constant: f64) -> Result<Self> {
        Ok(TestMass {
            mass: require_positive("mass", mass)?,
            density: require_positive("density", density)?,
            side: require_positive("side", side)?,
            lattice_constant: require_positive("lattice_constant", lattice_constant)?,
        })
    }

    /// Solid cube whose edge follows from mass and density.
    pub fn solid_cube(mass: f64, density: f64, lattice_constant: f64) -> Result<Self> {
        let mass = require_positive("mass", mass)?;
        let density = require_positive("density", density)?;
        Self::new(mass, density, (mass / density).cbrt(), lattice_constant)
    }

    /// LISA Pathfinder gold-platinum test mass.
    pub fn lpf() -> Self {
        TestMass {
            mass: 1.928,
            density: 19_881.0,
            side: 0.046,
            lattice_constant: 4.0e-10,
        }
    }

    /// 1 kg fused-silica cube of the proposed torsion balance.
    pub fn fused_silica_1kg() -> Self {
        let mass = 1.0;
        let density = 2330.0;
        TestMass {
            mass,
            density,
            side: (mass / density).cbrt(),
            lattice_constant: 5.0e-10,
        }
    }

    /// |M - rho b^3| / M.
    pub fn mass_mismatch(&self) -> f64 {
        (self.mass - self.density * self.side.powi(3)).abs() / self.mass
    }

    pub fn consistency_warning(&self) -> Option<String> {
        let mismatch = self.mass_mismatch();
        (mismatch > MASS_CONSISTENCY_TOLERANCE).then(|| {
            format!(
                "mass {} kg differs from density*side^3 = {} kg by {:.1}%",
                self.mass,
                self.density * self.side.powi(3),
                100.0 * mismatch
            )
        })
    }

    /// Largest correlation length for which the small-r geometry factor is used.
    pub fn r_valid_max(&self) -> f64 {
        self.side / 10.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PsdKind {
    /// m^2 s^-4 / Hz
    #[serde(rename = "AccelPSD")]
    Accel,
    /// N^2 / Hz
    #[serde(rename = "ForcePSD")]
    Force,
    /// N^2 m^2 / Hz
    #[serde(rename = "TorquePSD")]
    Torque,
    /// m^2 / Hz
    #[serde(rename = "DisplacementPSD")]
    Displacement,
    /// rad^2 / Hz
    #[serde(rename = "AnglePSD")]
    Angle,
}

impl PsdKind {
    pub const ALL: [PsdKind; 5] = [
        PsdKind::Accel,
        PsdKind::Force,
        PsdKind::Torque,
        PsdKind::Displacement,
        PsdKind::Angle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PsdKind::Accel => "AccelPSD",
            PsdKind::Force => "ForcePSD",
            PsdKind::Torque => "TorquePSD",
            PsdKind::Displacement => "DisplacementPSD",
            PsdKind::Angle => "AnglePSD",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            PsdKind::Accel => "m^2 s^-4 Hz^-1",
            PsdKind::Force => "N^2 Hz^-1",
            PsdKind::Torque => "N^2 m^2 Hz^-1",
            PsdKind::Displacement => "m^2 Hz^-1",
            PsdKind::Angle => "rad^2 Hz^-1",
        }
    }
}

impl fmt::Display for PsdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PsdKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PsdKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown spectrum kind `{s}`")))
    }
}

/// A frequency-independent PSD level of a given kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WhiteLevel {
    pub value: f64,
    pub kind: PsdKind,
}

impl WhiteLevel {
    pub fn new(value: f64, kind: PsdKind) -> Result<Self> {
        Ok(WhiteLevel {
            value: require_non_negative("PSD level", value)?,
            kind,
        })
    }

    pub fn accel(value: f64) -> Result<Self> {
        Self::new(value, PsdKind::Accel)
    }

    pub fn force(value: f64) -> Result<Self> {
        Self::new(value, PsdKind::Force)
    }

    pub fn asd(&self) -> f64 {
        self.value.sqrt()
    }

    /// Converts between the frequency-independent kinds (acceleration,
    /// force, torque). Displacement and angle need a frequency; use
    /// [`convert_spectrum`] for those.
    pub fn convert(&self, target: PsdKind, ctx: &ConversionContext) -> Result<Self> {
        if target == self.kind {
            return Ok(*self);
        }
        for k in [self.kind, target] {
            if matches!(k, PsdKind::Displacement | PsdKind::Angle) {
                return Err(Error::NoConversionPath {
                    from: self.kind,
                    to: target,
                });
            }
        }
        let factor = ctx.factor(self.kind, target, f64::NAN)?;
        Ok(WhiteLevel {
            value: self.value * factor,
            kind: target,
        })
    }
}

/// A one-sided noise PSD sampled on a strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpectrum {
    freqs: Vec<f64>,
    values: Vec<f64>,
    kind: PsdKind,
}

impl NoiseSpectrum {
    pub fn new(freqs: Vec<f64>, values: Vec<f64>, kind: PsdKind) -> Result<Self> {
        if freqs.is_empty() {
            return Err(Error::invalid("spectrum needs at least one sample"));
        }
        if freqs.len() != values.len() {
            return Err(Error::invalid(format!(
                "spectrum has {} frequencies but {} values",
                freqs.len(),
                values.len()
            )));
        }
        if let Some(f) = freqs.iter().find(|f| !(f.is_finite() && **f >= 0.0)) {
            return Err(Error::invalid(format!("invalid frequency {f}")));
        }
        if let Some(w) = freqs.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "frequencies must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!("PSD values must be finite and >= 0, got {v}")));
        }
        Ok(NoiseSpectrum { freqs, values, kind })
    }

    /// Evaluates `level(f)` on the given grid.
    pub fn from_fn(freqs: &[f64], kind: PsdKind, level: impl Fn(f64) -> f64) -> Result<Self> {
        let values = freqs.iter().map(|&f| level(f)).collect();
        Self::new(freqs.to_vec(), values, kind)
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> PsdKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn asd(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.sqrt()).collect()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.freqs.clone(),
            self.values.iter().map(|v| v * c).collect(),
            self.kind,
        )
    }

    pub fn band(&self) -> (f64, f64) {
        (self.freqs[0], self.freqs[self.freqs.len() - 1])
    }

    /// Interpolated value at `f`: log-log between positive neighbours, linear
    /// in log f when either neighbour is zero. Errors outside the sampled band.
    pub fn value_at(&self, f: f64) -> Result<f64> {
        let (lo, hi) = self.band();
        if !(f >= lo && f <= hi) {
            return Err(Error::Coverage {
                requested: f,
                lo,
                hi,
            });
        }
        let idx = self.freqs.partition_point(|&x| x < f);
        if idx < self.freqs.len() && self.freqs[idx] == f {
            return Ok(self.values[idx]);
        }
        let (f0, f1) = (self.freqs[idx - 1], self.freqs[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        if f0 <= 0.0 {
            let t = (f - f0) / (f1 - f0);
            return Ok(v0 + t * (v1 - v0));
        }
        let t = (f / f0).ln() / (f1 / f0).ln();
        if v0 > 0.0 && v1 > 0.0 {
            Ok((v0.ln() + t * (v1 / v0).ln()).exp())
        } else {
            Ok(v0 + t * (v1 - v0))
        }
    }

    /// Resamples onto `grid`, which must lie inside the sampled band.
    pub fn resample(&self, grid: &[f64]) -> Result<Self> {
        let values = grid
            .iter()
            .map(|&f| self.value_at(f))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid.to_vec(), values, self.kind)
    }
}

/// Magnitude and phase of a mechanical susceptibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    /// m/N
    pub magnitude: f64,
    /// rad
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Damping {
    /// Frequency-independent loss angle 1/Q.
    Structural,
    /// Velocity damping with rate omega_m/Q.
    Viscous,
}

/// Damped harmonic oscillator referred to a linear coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillator {
    pub effective_mass: f64,
    pub omega_m: f64,
    pub q: f64,
    pub damping: Damping,
}

impl Oscillator {
    pub fn new(effective_mass: f64, omega_m: f64, q: f64, damping: Damping) -> Result<Self> {
        Ok(Oscillator {
            effective_mass: require_positive("effective mass", effective_mass)?,
            omega_m: require_positive("omega_m", omega_m)?,
            q: require_positive("Q", q)?,
            damping,
        })
    }

    pub fn response(&self, f: f64) -> Result<Response> {
        let f = require_positive("frequency", f)?;
        let w = 2.0 * std::f64::consts::PI * f;
        let w0 = self.omega_m;
        let re = w0 * w0 - w * w;
        let im = match self.damping {
            Damping::Structural => w0 * w0 / self.q,
            Damping::Viscous => w * w0 / self.q,
        };
        Ok(Response {
            magnitude: 1.0 / (self.effective_mass * re.hypot(im)),
            phase: -im.atan2(re),
        })
    }

    /// |chi(f)|^2 in m^2/N^2.
    pub fn gain(&self, f: f64) -> Result<f64> {
        let m = self.response(f)?.magnitude;
        Ok(m * m)
    }
}

/// Quantities that conversions between spectrum kinds may need.
///
/// Force is the hub: acceleration <-> force uses the differential two-mass
/// relation `S_a = 4 S_F / M^2`, torque <-> force uses the lever arm,
/// displacement <-> force uses `|chi|^2` and angle <-> displacement uses the
/// lever arm again.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConversionContext {
    /// Single test-mass mass, kg.
    pub mass: Option<f64>,
    /// Distance from the rotation axis to the point where force acts, m.
    pub lever_arm: Option<f64>,
    pub oscillator: Option<Oscillator>,
}

impl ConversionContext {
    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = Some(mass);
        self
    }

    pub fn with_lever_arm(mut self, lever_arm: f64) -> Self {
        self.lever_arm = Some(lever_arm);
        self
    }

    pub fn with_oscillator(mut self, oscillator: Oscillator) -> Self {
        self.oscillator = Some(oscillator);
        self
    }

    fn mass(&self, from: PsdKind, to: PsdKind) -> Result<f64> {
        let m = self.mass.ok_or(Error::MissingContext {
            from,
            to,
            field: "mass",
        })?;
        require_positive("mass", m)
    }

    fn lever(&self, from: PsdKind, to: PsdKind) -> Result<f64> {
        let l = self.lever_arm.ok_or(Error::MissingContext {
            from,
            to,
            field: "lever_arm",
        })?;
        require_positive("lever_arm", l)
    }

    fn gain(&self, from: PsdKind, to: PsdKind, f: f64) -> Result<f64> {
        self.oscillator
            .ok_or(Error::MissingContext {
                from,
                to,
                field: "oscillator",
            })?
            .gain(f)
    }

    /// Multiplier taking a `kind` PSD to the force PSD at frequency `f`.
    fn force_factor(&self, kind: PsdKind, from: PsdKind, to: PsdKind, f: f64) -> Result<f64> {
        Ok(match kind {
            PsdKind::Force => 1.0,
            PsdKind::Accel => {
                let m = self.mass(from, to)?;
                m * m / 4.0
            }
            PsdKind::Torque => {
                let l = self.lever(from, to)?;
                1.0 / (l * l)
            }
            PsdKind::Displacement => 1.0 / self.gain(from, to, f)?,
            PsdKind::Angle => {
                let l = self.lever(from, to)?;
                l * l / self.gain(from, to, f)?
            }
        })
    }

    fn factor(&self, from: PsdKind, to: PsdKind, f: f64) -> Result<f64> {
        let into = self.force_factor(from, from, to, f)?;
        let out = self.force_factor(to, from, to, f)?;
        Ok(into / out)
    }
}

/// Converts a spectrum to another kind, pointwise.
pub fn convert_spectrum(
    s: &NoiseSpectrum,
    target: PsdKind,
    ctx: &ConversionContext,
) -> Result<NoiseSpectrum> {
    if s.kind == target {
        return Ok(s.clone());
    }
    let values = s
        .freqs
        .iter()
        .zip(&s.values)
        .map(|(&f, &v)| Ok(v * ctx.factor(s.kind, target, f)?))
        .collect::<Result<Vec<_>>>()?;
    NoiseSpectrum::new(s.freqs.clone(), values, target)
}

/// CSL parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CslParams {
    /// Collapse rate, 1/s.
    pub lambda: f64,
    /// Correlation length, m.
    pub r: f64,
}

impl CslParams {
    pub fn new(lambda: f64, r: f64) -> Result<Self> {
        Ok(CslParams {
            lambda: require_non_negative("lambda_CSL", lambda)?,
            r: require_positive("r_CSL", r)?,
        })
    }
}

/// Diosi-Penrose cut-off length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpParams {
    /// m
    pub sigma: f64,
}

impl DpParams {
    pub fn new(sigma: f64) -> Result<Self> {
        Ok(DpParams {
            sigma: require_positive("sigma_DP", sigma)?,
        })
    }
}
