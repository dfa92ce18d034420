//! Noise budget of the dual torsion-balance experiment.
//!
//! Everything is referred to the differential torsion coordinate
//! `x = theta * L/2` (displacement of one cube along the beam), whose
//! effective inertial mass is `M_eff = I / (L/2)^2 = 2M` for two point-like
//! cubes at the arm ends. Forces are the generalized force on that
//! coordinate, `F = torque / (L/2)`.
//!
//! Model choices:
//! - suspension thermal noise uses structural damping (constant loss angle);
//! - gas damping is the free-molecular-flow result for an isolated cube with
//!   diffuse re-emission, no proximity enhancement;
//! - seismic rotation couples through the fiber spring `kappa = I omega_m^2`
//!   and survives the dual-balance combination with amplitude fraction
//!   `cmrr_seismic`;
//! - components are combined as an uncorrelated power sum.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::types::{
    require_non_negative, require_positive, Damping, NoiseSpectrum, Oscillator, PhysicalConstants,
    PsdKind, Response, TestMass,
};

/// Reference frequency of the Table-I style 1/f laser noise laws.
pub const LASER_REFERENCE_FREQUENCY: f64 = 1e-3;

/// N2 molecular mass, kg.
pub const NITROGEN_MOLECULE_MASS: f64 = 4.65e-26;

/// Ground rotation-rate ASD (rad s^-1 Hz^-1/2) of the built-in surrogate.
/// Flat in rotation rate, so the rotation angle PSD falls as 1/f^2. The
/// level puts the dual-balance residual at 1e-17 N/rtHz near 1 mHz for the
/// `table1` geometry.
pub const SURROGATE_ROTATION_RATE_ASD: f64 = 1.6e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Thermal,
    GasDamping,
    SeismicRotation,
    RadiationPressure,
    LaserFrequency,
    Thermoelastic,
    Newtonian,
    ShotNoise,
    Sql,
}

impl Source {
    pub const ALL: [Source; 9] = [
        Source::Thermal,
        Source::GasDamping,
        Source::SeismicRotation,
        Source::RadiationPressure,
        Source::LaserFrequency,
        Source::Thermoelastic,
        Source::Newtonian,
        Source::ShotNoise,
        Source::Sql,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Source::Thermal => "thermal",
            Source::GasDamping => "gas_damping",
            Source::SeismicRotation => "seismic_rotation",
            Source::RadiationPressure => "radiation_pressure",
            Source::LaserFrequency => "laser_frequency",
            Source::Thermoelastic => "thermoelastic",
            Source::Newtonian => "newtonian",
            Source::ShotNoise => "shot_noise",
            Source::Sql => "sql",
        }
    }

    /// Sources that auxiliary measurements of T, p and Q allow to subtract.
    pub fn is_calibrated(self) -> bool {
        matches!(self, Source::Thermal | Source::GasDamping)
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Source::ALL
            .into_iter()
            .find(|src| src.name() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown noise source `{s}`")))
    }
}

impl Serialize for Source {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

/// Where the ground rotation spectrum comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum RotationSource {
    /// Flat rotation-rate ASD, rad s^-1 Hz^-1/2.
    Surrogate { rate_asd: f64 },
    /// Measured ground rotation angle PSD (AnglePSD).
    Spectrum(NoiseSpectrum),
}

impl RotationSource {
    fn angle_psd(&self, f: f64) -> Result<f64> {
        match self {
            RotationSource::Surrogate { rate_asd } => Ok((rate_asd / (2.0 * PI * f)).powi(2)),
            RotationSource::Spectrum(s) => s.value_at(f),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            RotationSource::Surrogate { rate_asd } => {
                format!("surrogate, flat rotation rate {rate_asd:e} rad/s/rtHz")
            }
            RotationSource::Spectrum(s) => {
                let (lo, hi) = s.band();
                format!("ingested AnglePSD, {} points over [{lo:e}, {hi:e}] Hz", s.len())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceConfig {
    /// One of the cubes.
    pub test_mass: TestMass,
    /// Full torsion arm length L, m.
    pub arm_length: f64,
    /// Torsion resonance, rad/s.
    pub omega_m: f64,
    pub q: f64,
    /// K
    pub temperature: f64,
    /// Temperature stability ASD, K/rtHz (white).
    pub temperature_stability: f64,
    /// Pa
    pub pressure: f64,
    /// Residual gas molecule mass, kg.
    pub gas_molecule_mass: f64,
    /// W
    pub laser_power: f64,
    /// m
    pub laser_wavelength: f64,
    /// Relative intensity noise at 1 mHz, 1/rtHz, falling as 1/f.
    pub rin_1mhz: f64,
    /// Laser frequency noise at 1 mHz, Hz/rtHz, falling as 1/f.
    pub freq_noise_1mhz: f64,
    /// Interferometer arm-length mismatch, m.
    pub arm_mismatch: f64,
    /// Thermal expansion coefficient, 1/K.
    pub expansion_coefficient: f64,
    /// Amplitude fraction of common seismic/Newtonian noise left after
    /// combining the two balances.
    pub cmrr_seismic: f64,
    /// Amplitude fraction of thermal expansion left after common-mode
    /// rejection within one balance.
    pub cmrr_thermal: f64,
    /// Amplitude fraction of radiation-pressure noise acting on the torsion
    /// mode (both cubes are pushed by beams from the same laser).
    pub rin_residual: f64,
    pub seismic_rotation: RotationSource,
    /// Single-balance Newtonian force PSD; disabled when `None`.
    pub newtonian: Option<NoiseSpectrum>,
    /// White sensing shot-noise displacement ASD, m/rtHz; disabled when `None`.
    pub shot_noise_asd: Option<f64>,
    pub disabled: BTreeSet<Source>,
}

impl DeviceConfig {
    /// Parameters of the proposed underground dual torsion balance.
    pub fn table1() -> Self {
        DeviceConfig {
            test_mass: TestMass::fused_silica_1kg(),
            arm_length: 0.1,
            omega_m: 2.0 * PI * 1e-3,
            q: 1e6,
            temperature: 300.0,
            temperature_stability: 1e-4,
            pressure: 1e-7,
            gas_molecule_mass: NITROGEN_MOLECULE_MASS,
            laser_power: 1e-3,
            laser_wavelength: 1064e-9,
            rin_1mhz: 1e-5,
            freq_noise_1mhz: 1e4,
            arm_mismatch: 1e-3,
            expansion_coefficient: 5.5e-7,
            cmrr_seismic: 0.1,
            cmrr_thermal: 0.1,
            rin_residual: 0.1,
            seismic_rotation: RotationSource::Surrogate {
                rate_asd: SURROGATE_ROTATION_RATE_ASD,
            },
            newtonian: None,
            shot_noise_asd: None,
            disabled: BTreeSet::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("arm_length", self.arm_length)?;
        require_positive("omega_m", self.omega_m)?;
        require_positive("Q", self.q)?;
        require_positive("temperature", self.temperature)?;
        require_positive("gas_molecule_mass", self.gas_molecule_mass)?;
        require_positive("laser_wavelength", self.laser_wavelength)?;
        for (name, v) in [
            ("temperature_stability", self.temperature_stability),
            ("pressure", self.pressure),
            ("laser_power", self.laser_power),
            ("rin", self.rin_1mhz),
            ("frequency_noise", self.freq_noise_1mhz),
            ("arm_mismatch", self.arm_mismatch),
            ("expansion_coefficient", self.expansion_coefficient),
        ] {
            require_non_negative(name, v)?;
        }
        if !(self.cmrr_seismic > 0.0 && self.cmrr_seismic <= 1.0) {
            return Err(Error::invalid(format!(
                "cmrr_seismic must lie in (0, 1], got {}",
                self.cmrr_seismic
            )));
        }
        for (name, v) in [("cmrr_thermal", self.cmrr_thermal), ("rin_residual", self.rin_residual)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if let RotationSource::Spectrum(s) = &self.seismic_rotation {
            if s.kind() != PsdKind::Angle {
                return Err(Error::invalid(format!(
                    "seismic rotation spectrum must be AnglePSD, got {}",
                    s.kind()
                )));
            }
        }
        if let Some(s) = &self.newtonian {
            if s.kind() != PsdKind::Force {
                return Err(Error::invalid(format!(
                    "Newtonian noise spectrum must be ForcePSD, got {}",
                    s.kind()
                )));
            }
        }
        if let Some(v) = self.shot_noise_asd {
            require_non_negative("shot_noise_asd", v)?;
        }
        Ok(())
    }

    /// Distance from the fiber to a cube, L/2.
    pub fn lever_arm(&self) -> f64 {
        self.arm_length / 2.0
    }

    pub fn effective_mass(&self) -> f64 {
        2.0 * self.test_mass.mass
    }

    pub fn moment_of_inertia(&self) -> f64 {
        self.effective_mass() * self.lever_arm().powi(2)
    }

    pub fn oscillator(&self) -> Oscillator {
        Oscillator {
            effective_mass: self.effective_mass(),
            omega_m: self.omega_m,
            q: self.q,
            damping: Damping::Structural,
        }
    }

    pub fn resonance_frequency(&self) -> f64 {
        self.omega_m / (2.0 * PI)
    }

    pub fn is_enabled(&self, source: Source) -> bool {
        !self.disabled.contains(&source)
    }
}

/// Torsion-mode susceptibility with structural damping.
pub fn susceptibility(cfg: &DeviceConfig, f: f64) -> Result<Response> {
    cfg.oscillator().response(f)
}

/// Suspension thermal force PSD, `4 k_B T M_eff omega_m^2 / (Q 2 pi f)`.
pub fn thermal_force_psd(cfg: &DeviceConfig, f: f64, consts: &PhysicalConstants) -> Result<f64> {
    let f = require_positive("frequency", f)?;
    Ok(4.0 * consts.k_b * cfg.temperature * cfg.effective_mass() * cfg.omega_m.powi(2)
        / (cfg.q * 2.0 * PI * f))
}

/// Free-molecular damping coefficient of one cube moving face-on, kg/s:
/// `beta = (1 + pi/8) p b^2 sqrt(32 m / (pi k_B T))`.
pub fn gas_damping_coefficient(cfg: &DeviceConfig, consts: &PhysicalConstants) -> f64 {
    let kt = consts.k_b * cfg.temperature;
    (1.0 + PI / 8.0)
        * cfg.pressure
        * cfg.test_mass.side.powi(2)
        * (32.0 * cfg.gas_molecule_mass / (PI * kt)).sqrt()
}

/// Residual-gas force PSD on the torsion coordinate. Each cube contributes
/// `4 k_B T beta`; the two cubes are independent, so the differential force
/// carries twice that. White.
pub fn gas_damping_psd(cfg: &DeviceConfig, f: f64, consts: &PhysicalConstants) -> Result<f64> {
    require_positive("frequency", f)?;
    let per_cube = 4.0 * consts.k_b * cfg.temperature * gas_damping_coefficient(cfg, consts);
    Ok(2.0 * per_cube)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaserNoise {
    /// Radiation-pressure force PSD from intensity noise, N^2/Hz.
    pub radiation_pressure: f64,
    /// Displacement PSD from frequency noise, m^2/Hz.
    pub frequency_sensing: f64,
}

/// Raw single-beam laser noise: `(2P/c) RIN(f)` in force and
/// `delta_f(f) / nu * arm_mismatch` in displacement (amplitudes).
pub fn laser_noise_psd(cfg: &DeviceConfig, f: f64, consts: &PhysicalConstants) -> Result<LaserNoise> {
    let f = require_positive("frequency", f)?;
    let scale = LASER_REFERENCE_FREQUENCY / f;
    let rp_asd = 2.0 * cfg.laser_power / consts.c * cfg.rin_1mhz * scale;
    let nu = consts.c / cfg.laser_wavelength;
    let sensing_asd = cfg.freq_noise_1mhz * scale / nu * cfg.arm_mismatch;
    Ok(LaserNoise {
        radiation_pressure: rp_asd * rp_asd,
        frequency_sensing: sensing_asd * sensing_asd,
    })
}

/// Single-balance thermal expansion ASD before common-mode rejection, m/rtHz.
pub fn thermoelastic_asd_unrejected(cfg: &DeviceConfig) -> f64 {
    cfg.expansion_coefficient * cfg.test_mass.side * cfg.temperature_stability
}

/// Thermal-expansion displacement PSD after common-mode rejection. White.
pub fn thermoelastic_psd(cfg: &DeviceConfig, f: f64) -> Result<f64> {
    require_positive("frequency", f)?;
    Ok((thermoelastic_asd_unrejected(cfg) * cfg.cmrr_thermal).powi(2))
}

/// Seismic-rotation force PSD left after combining the two balances:
/// `cmrr^2 (I omega_m^2)^2 S_phi(f) / (L/2)^2`.
pub fn seismic_rotation_psd(cfg: &DeviceConfig, f: f64) -> Result<f64> {
    let f = require_positive("frequency", f)?;
    let s_phi = cfg.seismic_rotation.angle_psd(f)?;
    let kappa = cfg.moment_of_inertia() * cfg.omega_m.powi(2);
    let torque = kappa * kappa * s_phi;
    Ok(cfg.cmrr_seismic.powi(2) * torque / cfg.lever_arm().powi(2))
}

/// Standard quantum limit for force sensing on a free mass, `hbar M (2 pi f)^2`.
pub fn sql_force_psd(effective_mass: f64, f: f64, consts: &PhysicalConstants) -> Result<f64> {
    let m = require_positive("effective mass", effective_mass)?;
    let f = require_positive("frequency", f)?;
    Ok(consts.hbar * m * (2.0 * PI * f).powi(2))
}

fn newtonian_psd(cfg: &DeviceConfig, f: f64) -> Result<f64> {
    match &cfg.newtonian {
        Some(s) => Ok(cfg.cmrr_seismic.powi(2) * s.value_at(f)?),
        None => Ok(0.0),
    }
}

/// Native form of a component before referral to the other view.
enum Native {
    Force(f64),
    Displacement(f64),
}

fn component_at(cfg: &DeviceConfig, source: Source, f: f64, consts: &PhysicalConstants) -> Result<Native> {
    Ok(match source {
        Source::Thermal => Native::Force(thermal_force_psd(cfg, f, consts)?),
        Source::GasDamping => Native::Force(gas_damping_psd(cfg, f, consts)?),
        Source::SeismicRotation => Native::Force(seismic_rotation_psd(cfg, f)?),
        Source::RadiationPressure => Native::Force(
            cfg.rin_residual.powi(2) * laser_noise_psd(cfg, f, consts)?.radiation_pressure,
        ),
        Source::LaserFrequency => {
            Native::Displacement(laser_noise_psd(cfg, f, consts)?.frequency_sensing)
        }
        Source::Thermoelastic => Native::Displacement(thermoelastic_psd(cfg, f)?),
        Source::Newtonian => Native::Force(newtonian_psd(cfg, f)?),
        Source::ShotNoise => Native::Displacement(cfg.shot_noise_asd.unwrap_or(0.0).powi(2)),
        Source::Sql => Native::Force(sql_force_psd(cfg.effective_mass(), f, consts)?),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetComponent {
    pub source: Source,
    pub calibrated: bool,
    pub force: NoiseSpectrum,
    pub displacement: NoiseSpectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetReport {
    pub band: (f64, f64),
    pub freqs: Vec<f64>,
    pub components: Vec<BudgetComponent>,
    pub total_force: NoiseSpectrum,
    pub total_displacement: NoiseSpectrum,
    /// Total without the calibrated sources.
    pub residual_force: NoiseSpectrum,
    pub residual_displacement: NoiseSpectrum,
    pub assumptions: Vec<String>,
}

impl BudgetReport {
    pub fn component(&self, source: Source) -> Option<&BudgetComponent> {
        self.components.iter().find(|c| c.source == source)
    }

    /// Residual force PSD at `f`, interpolated on the report grid.
    pub fn residual_force_at(&self, f: f64) -> Result<f64> {
        self.residual_force.value_at(f)
    }
}

fn sum_spectra<'a>(
    freqs: &[f64],
    kind: PsdKind,
    parts: impl Iterator<Item = &'a NoiseSpectrum>,
) -> Result<NoiseSpectrum> {
    let mut acc = vec![0.0; freqs.len()];
    for s in parts {
        for (a, v) in acc.iter_mut().zip(s.values()) {
            *a += v;
        }
    }
    NoiseSpectrum::new(freqs.to_vec(), acc, kind)
}

/// Evaluates every enabled source on an `n_points` log grid over
/// `[f_min, f_max]`.
pub fn build_budget(
    cfg: &DeviceConfig,
    f_min: f64,
    f_max: f64,
    n_points: usize,
    consts: &PhysicalConstants,
) -> Result<BudgetReport> {
    cfg.validate()?;
    if n_points < 2 {
        return Err(Error::invalid("budget needs at least two frequency points"));
    }
    if !(f_min > 0.0 && f_max > f_min && f_max.is_finite()) {
        return Err(Error::invalid(format!(
            "budget band must satisfy 0 < f_min < f_max, got [{f_min:e}, {f_max:e}]"
        )));
    }
    let freqs = crate::constraints::log_grid(f_min, f_max, n_points)?;
    let osc = cfg.oscillator();
    let gains = freqs
        .iter()
        .map(|&f| osc.gain(f))
        .collect::<Result<Vec<_>>>()?;

    let mut components = Vec::new();
    for source in Source::ALL {
        let wanted = cfg.is_enabled(source)
            && match source {
                Source::Newtonian => cfg.newtonian.is_some(),
                Source::ShotNoise => cfg.shot_noise_asd.is_some(),
                _ => true,
            };
        if !wanted {
            continue;
        }
        let mut force = Vec::with_capacity(freqs.len());
        for (&f, &gain) in freqs.iter().zip(&gains) {
            force.push(match component_at(cfg, source, f, consts)? {
                Native::Force(v) => v,
                Native::Displacement(v) => v / gain,
            });
        }
        let displacement = force.iter().zip(&gains).map(|(v, g)| v * g).collect();
        components.push(BudgetComponent {
            source,
            calibrated: source.is_calibrated(),
            force: NoiseSpectrum::new(freqs.clone(), force, PsdKind::Force)?,
            displacement: NoiseSpectrum::new(freqs.clone(), displacement, PsdKind::Displacement)?,
        });
    }

    let total_force = sum_spectra(&freqs, PsdKind::Force, components.iter().map(|c| &c.force))?;
    let total_displacement = sum_spectra(
        &freqs,
        PsdKind::Displacement,
        components.iter().map(|c| &c.displacement),
    )?;
    let residual = || components.iter().filter(|c| !c.calibrated);
    let residual_force = sum_spectra(&freqs, PsdKind::Force, residual().map(|c| &c.force))?;
    let residual_displacement = sum_spectra(
        &freqs,
        PsdKind::Displacement,
        residual().map(|c| &c.displacement),
    )?;

    Ok(BudgetReport {
        band: (f_min, f_max),
        freqs,
        components,
        total_force,
        total_displacement,
        residual_force,
        residual_displacement,
        assumptions: assumptions(cfg, consts),
    })
}

fn assumptions(cfg: &DeviceConfig, consts: &PhysicalConstants) -> Vec<String> {
    let nu = consts.c / cfg.laser_wavelength;
    let per_mm = cfg.freq_noise_1mhz / nu * 1e-3;
    let mut notes = vec![
        format!(
            "coordinate: differential torsion displacement at lever arm L/2 = {} m, M_eff = {} kg",
            cfg.lever_arm(),
            cfg.effective_mass()
        ),
        "thermal: structural damping, S_F = 4 k_B T M_eff omega_m^2 / (Q 2 pi f)".to_string(),
        format!(
            "gas damping: free molecular flow, isolated cube, beta = (1 + pi/8) p b^2 sqrt(32 m / (pi k_B T)), m_gas = {:e} kg, two cubes",
            cfg.gas_molecule_mass
        ),
        format!("seismic rotation: {}, dual-balance residual {}", cfg.seismic_rotation.describe(), cfg.cmrr_seismic),
        format!("radiation pressure: torsion-mode residual {}", cfg.rin_residual),
        format!(
            "laser frequency coupling: arm mismatch {:e} m; {:e} m/rtHz per mm of mismatch at 1 mHz",
            cfg.arm_mismatch, per_mm
        ),
        format!("thermal expansion: common-mode residual {}", cfg.cmrr_thermal),
        "combination: uncorrelated power sum; residual excludes thermal and gas damping".to_string(),
    ];
    if cfg.newtonian.is_none() {
        notes.push("newtonian: disabled (no spectrum supplied)".to_string());
    }
    if cfg.shot_noise_asd.is_none() {
        notes.push("shot noise: disabled (no cavity parameters)".to_string());
    }
    notes
}
