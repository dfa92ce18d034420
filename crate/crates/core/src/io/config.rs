//! Configuration files.
//!
//! Grammar (line oriented):
//!
//! ```text
//! # comment lines before the first entry are kept as provenance
//! profile = "table1"          # or "lpf"; optional
//!
//! [mass]
//! mass = 1 kg
//! density = 2.33 g/cm3
//! side = 75.4 mm              # optional, derived from mass/density
//! lattice_constant = 5.0 A
//!
//! [device]
//! resonance_frequency = 1 mHz
//! ...
//!
//! [constants]
//! nucleon_mass = "amu"        # "amu", "proton" or a mass
//! ```
//!
//! Values are a quoted string or a number with an optional unit suffix; a
//! bare number is read in SI units. Unknown keys, repeated keys and units of
//! the wrong dimension are errors carrying line and column.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::budget::{DeviceConfig, RotationSource, Source};
use crate::error::{Error, Result};
use crate::io::formats::read_spectrum;
use crate::io::units::{parse_quantity, Dimension};
use crate::types::{PhysicalConstants, PsdKind, TestMass, PROTON_MASS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// The proposed fused-silica dual torsion balance.
    Table1,
    /// LISA Pathfinder test mass (device section defaults to `table1`).
    Lpf,
}

impl Profile {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "table1" => Ok(Profile::Table1),
            "lpf" => Ok(Profile::Lpf),
            other => Err(Error::invalid(format!(
                "unknown profile `{other}` (expected `table1` or `lpf`)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Table1 => "table1",
            Profile::Lpf => "lpf",
        }
    }

    pub fn test_mass(self) -> TestMass {
        match self {
            Profile::Table1 => TestMass::fused_silica_1kg(),
            Profile::Lpf => TestMass::lpf(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    pub profile: Option<Profile>,
    pub mass: TestMass,
    /// `device.test_mass` equals `mass`.
    pub device: DeviceConfig,
    pub constants: PhysicalConstants,
    pub provenance: Vec<String>,
    /// SHA-256 of the configuration source.
    pub hash: String,
}

impl ConfigDocument {
    /// Document for a built-in profile with no overrides.
    pub fn from_profile(profile: Profile) -> Self {
        let text = format!("profile = \"{}\"\n", profile.name());
        parse_config(&text, "<builtin>", Path::new("."))
            .expect("built-in profiles are valid")
    }

    pub fn mass_warning(&self) -> Option<String> {
        self.mass.consistency_warning()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads and validates a configuration file. Relative data-file paths are
/// resolved against the file's directory.
pub fn load_config(path: &Path) -> Result<ConfigDocument> {
    let text = fs::read_to_string(path).map_err(|e| Error::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, &path.display().to_string(), base)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Top,
    Mass,
    Device,
    Constants,
}


#[derive(Debug, Clone, PartialEq)]
enum Value {
    Text(String),
    Raw(String),
}

#[derive(Debug, Clone)]
struct Entry {
    section: Section,
    key: String,
    value: Value,
    line: usize,
    key_col: usize,
    value_col: usize,
}

struct Parser<'a> {
    path: &'a str,
}

impl Parser<'_> {
    fn err(&self, line: usize, column: usize, message: impl Into<String>) -> Error {
        Error::Config {
            path: self.path.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    fn entries(&self, text: &str) -> Result<(Vec<String>, Vec<Entry>)> {
        let mut provenance = Vec::new();
        let mut entries: Vec<Entry> = Vec::new();
        let mut section = Section::Top;
        let mut seen_sections = BTreeSet::new();
        let mut header_done = false;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let indent = raw.len() - raw.trim_start().len();
            let body = strip_comment(raw);
            let trimmed = body.trim();
            if trimmed.is_empty() {
                if !header_done {
                    if let Some(c) = raw.trim_start().strip_prefix('#') {
                        provenance.push(c.trim().to_string());
                    }
                }
                continue;
            }
            header_done = true;

            if let Some(rest) = trimmed.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| {
                    self.err(line, indent + 1, "unterminated section header")
                })?;
                section = match name.trim() {
                    "mass" => Section::Mass,
                    "device" => Section::Device,
                    "constants" => Section::Constants,
                    other => {
                        return Err(self.err(line, indent + 2, format!("unknown section `[{other}]`")))
                    }
                };
                if !seen_sections.insert(name.trim().to_string()) {
                    return Err(self.err(line, indent + 1, format!("section `[{}]` repeated", name.trim())));
                }
                continue;
            }

            let eq = body.find('=').ok_or_else(|| {
                self.err(line, indent + 1, "expected `key = value`")
            })?;
            let key = body[..eq].trim().to_string();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(self.err(line, indent + 1, format!("invalid key `{key}`")));
            }
            let after = &body[eq + 1..];
            let value_col = eq + 2 + (after.len() - after.trim_start().len());
            let value_text = after.trim();
            if value_text.is_empty() {
                return Err(self.err(line, value_col, format!("missing value for `{key}`")));
            }
            let value = if let Some(inner) = value_text.strip_prefix('"') {
                let inner = inner.strip_suffix('"').ok_or_else(|| {
                    self.err(line, value_col, "unterminated string")
                })?;
                Value::Text(inner.to_string())
            } else {
                Value::Raw(value_text.to_string())
            };
            if let Some(prev) = entries.iter().find(|e| e.section == section && e.key == key) {
                return Err(self.err(
                    line,
                    indent + 1,
                    format!("key `{key}` already set on line {}", prev.line),
                ));
            }
            entries.push(Entry {
                section,
                key,
                value,
                line,
                key_col: indent + 1,
                value_col,
            });
        }
        Ok((provenance, entries))
    }

    fn quantity(&self, e: &Entry, dim: Dimension) -> Result<f64> {
        match &e.value {
            Value::Raw(text) => parse_quantity(text, dim)
                .map_err(|q| self.err(e.line, e.value_col, format!("`{}`: {q}", e.key))),
            Value::Text(_) => Err(self.err(
                e.line,
                e.value_col,
                format!("`{}` expects a number, got a string", e.key),
            )),
        }
    }

    fn text<'e>(&self, e: &'e Entry) -> Result<&'e str> {
        match &e.value {
            Value::Text(t) => Ok(t),
            Value::Raw(_) => Err(self.err(
                e.line,
                e.value_col,
                format!("`{}` expects a quoted string", e.key),
            )),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    let mut in_string = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_string = !in_string,
            '#' if !in_string => return &line[..i],
            _ => {}
        }
    }
    line
}

const MASS_KEYS: &[(&str, Dimension)] = &[
    ("mass", Dimension::Mass),
    ("density", Dimension::Density),
    ("side", Dimension::Length),
    ("lattice_constant", Dimension::Length),
];

const DEVICE_KEYS: &[(&str, Dimension)] = &[
    ("arm_length", Dimension::Length),
    ("resonance_frequency", Dimension::Frequency),
    ("omega_m", Dimension::AngularFrequency),
    ("quality_factor", Dimension::Dimensionless),
    ("temperature", Dimension::Temperature),
    ("temperature_stability", Dimension::TemperatureAsd),
    ("pressure", Dimension::Pressure),
    ("gas_molecule_mass", Dimension::Mass),
    ("laser_power", Dimension::Power),
    ("laser_wavelength", Dimension::Length),
    ("rin", Dimension::InverseRootHz),
    ("frequency_noise", Dimension::FrequencyAsd),
    ("arm_mismatch", Dimension::Length),
    ("expansion_coefficient", Dimension::InverseTemperature),
    ("cmrr_seismic", Dimension::Dimensionless),
    ("cmrr_thermal", Dimension::Dimensionless),
    ("rin_residual", Dimension::Dimensionless),
    ("rotation_rate_asd", Dimension::RotationRateAsd),
    ("shot_noise_asd", Dimension::LengthAsd),
];

const DEVICE_TEXT_KEYS: &[&str] = &["seismic_rotation_file", "newtonian_file", "disable"];

const CONSTANT_KEYS: &[(&str, Dimension)] = &[
    ("hbar", Dimension::Action),
    ("G", Dimension::GravitationalConstant),
    ("k_B", Dimension::EnergyPerKelvin),
    ("c", Dimension::Velocity),
];

fn dimension_of(table: &[(&str, Dimension)], key: &str) -> Option<Dimension> {
    table.iter().find(|(k, _)| *k == key).map(|&(_, d)| d)
}

/// Parses configuration text. `path` labels errors; `base` resolves data files.
pub fn parse_config(text: &str, path: &str, base: &Path) -> Result<ConfigDocument> {
    let parser = Parser { path };
    let (provenance, entries) = parser.entries(text)?;

    let mut profile = None;
    for e in entries.iter().filter(|e| e.section == Section::Top) {
        match e.key.as_str() {
            "profile" => {
                let name = parser.text(e)?;
                profile = Some(Profile::parse(name).map_err(|err| {
                    parser.err(e.line, e.value_col, err.to_string())
                })?);
            }
            other => {
                return Err(parser.err(
                    e.line,
                    e.key_col,
                    format!("unknown key `{other}` at top level"),
                ))
            }
        }
    }

    let mut mass_values: Vec<(&str, f64)> = Vec::new();
    let mut device_values: Vec<(&Entry, f64)> = Vec::new();
    let mut device_text: Vec<&Entry> = Vec::new();
    let mut constants = PhysicalConstants::CODATA_2018;

    for e in &entries {
        match e.section {
            Section::Top => {}
            Section::Mass => {
                let dim = dimension_of(MASS_KEYS, &e.key).ok_or_else(|| {
                    parser.err(e.line, e.key_col, format!("unknown key `{}` in [mass]", e.key))
                })?;
                let v = parser.quantity(e, dim)?;
                mass_values.push((MASS_KEYS.iter().find(|(k, _)| *k == e.key).unwrap().0, v));
            }
            Section::Device => {
                if DEVICE_TEXT_KEYS.contains(&e.key.as_str()) {
                    parser.text(e)?;
                    device_text.push(e);
                    continue;
                }
                let dim = dimension_of(DEVICE_KEYS, &e.key).ok_or_else(|| {
                    parser.err(e.line, e.key_col, format!("unknown key `{}` in [device]", e.key))
                })?;
                device_values.push((e, parser.quantity(e, dim)?));
            }
            Section::Constants => {
                if e.key == "nucleon_mass" {
                    constants.m0 = match &e.value {
                        Value::Text(t) if t == "amu" => crate::types::ATOMIC_MASS_UNIT,
                        Value::Text(t) if t == "proton" => PROTON_MASS,
                        Value::Text(t) => {
                            return Err(parser.err(
                                e.line,
                                e.value_col,
                                format!("nucleon_mass must be \"amu\", \"proton\" or a mass, got \"{t}\""),
                            ))
                        }
                        Value::Raw(_) => parser.quantity(e, Dimension::Mass)?,
                    };
                    continue;
                }
                let dim = dimension_of(CONSTANT_KEYS, &e.key).ok_or_else(|| {
                    parser.err(e.line, e.key_col, format!("unknown key `{}` in [constants]", e.key))
                })?;
                let v = parser.quantity(e, dim)?;
                match e.key.as_str() {
                    "hbar" => constants.hbar = v,
                    "G" => constants.g = v,
                    "k_B" => constants.k_b = v,
                    "c" => constants.c = v,
                    _ => unreachable!(),
                }
            }
        }
    }
    constants
        .validate()
        .map_err(|err| parser.err(1, 1, err.to_string()))?;

    let mass = build_mass(&parser, profile, &mass_values, &entries)?;
    let mut device = DeviceConfig::table1();
    device.test_mass = mass;
    let mut saw_frequency = None;
    for (e, v) in device_values {
        match e.key.as_str() {
            "arm_length" => device.arm_length = v,
            "resonance_frequency" | "omega_m" => {
                if let Some(prev) = saw_frequency.replace(e.line) {
                    return Err(parser.err(
                        e.line,
                        e.key_col,
                        format!("resonance already set on line {prev}; give either resonance_frequency or omega_m"),
                    ));
                }
                device.omega_m = if e.key == "omega_m" {
                    v
                } else {
                    2.0 * std::f64::consts::PI * v
                };
            }
            "quality_factor" => device.q = v,
            "temperature" => device.temperature = v,
            "temperature_stability" => device.temperature_stability = v,
            "pressure" => device.pressure = v,
            "gas_molecule_mass" => device.gas_molecule_mass = v,
            "laser_power" => device.laser_power = v,
            "laser_wavelength" => device.laser_wavelength = v,
            "rin" => device.rin_1mhz = v,
            "frequency_noise" => device.freq_noise_1mhz = v,
            "arm_mismatch" => device.arm_mismatch = v,
            "expansion_coefficient" => device.expansion_coefficient = v,
            "cmrr_seismic" => device.cmrr_seismic = v,
            "cmrr_thermal" => device.cmrr_thermal = v,
            "rin_residual" => device.rin_residual = v,
            "rotation_rate_asd" => device.seismic_rotation = RotationSource::Surrogate { rate_asd: v },
            "shot_noise_asd" => device.shot_noise_asd = Some(v),
            _ => unreachable!(),
        }
    }
    for e in device_text {
        let value = parser.text(e)?;
        match e.key.as_str() {
            "seismic_rotation_file" => {
                if device_values_has(&entries, "rotation_rate_asd") {
                    return Err(parser.err(
                        e.line,
                        e.key_col,
                        "give either rotation_rate_asd or seismic_rotation_file",
                    ));
                }
                let s = read_data_file(&parser, e, base, value, PsdKind::Angle)?;
                device.seismic_rotation = RotationSource::Spectrum(s);
            }
            "newtonian_file" => {
                device.newtonian = Some(read_data_file(&parser, e, base, value, PsdKind::Force)?);
            }
            "disable" => {
                let mut set = BTreeSet::new();
                for name in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let src: Source = name
                        .parse()
                        .map_err(|err: Error| parser.err(e.line, e.value_col, err.to_string()))?;
                    set.insert(src);
                }
                device.disabled = set;
            }
            _ => unreachable!(),
        }
    }
    device.validate().map_err(|err| {
        let line = entries
            .iter()
            .find(|e| e.section == Section::Device)
            .map_or(1, |e| e.line);
        parser.err(line, 1, err.to_string())
    })?;

    Ok(ConfigDocument {
        profile,
        mass,
        device,
        constants,
        provenance,
        hash: sha256_hex(text.as_bytes()),
    })
}

fn device_values_has(entries: &[Entry], key: &str) -> bool {
    entries
        .iter()
        .any(|e| e.section == Section::Device && e.key == key)
}

fn read_data_file(
    parser: &Parser<'_>,
    e: &Entry,
    base: &Path,
    value: &str,
    kind: PsdKind,
) -> Result<crate::types::NoiseSpectrum> {
    let path: PathBuf = base.join(value);
    let spectrum = read_spectrum(&path)
        .map_err(|err| parser.err(e.line, e.value_col, err.to_string()))?;
    if spectrum.kind() != kind {
        return Err(parser.err(
            e.line,
            e.value_col,
            format!("`{value}` holds {}, expected {kind}", spectrum.kind()),
        ));
    }
    Ok(spectrum)
}

fn build_mass(
    parser: &Parser<'_>,
    profile: Option<Profile>,
    values: &[(&str, f64)],
    entries: &[Entry],
) -> Result<TestMass> {
    let get = |key: &str| values.iter().find(|(k, _)| *k == key).map(|&(_, v)| v);
    let section_line = entries
        .iter()
        .find(|e| e.section == Section::Mass)
        .map_or(1, |e| e.line);
    let base = profile.map(Profile::test_mass);
    let pick = |key: &str, from_base: Option<f64>| -> Result<f64> {
        get(key).or(from_base).ok_or_else(|| {
            parser.err(
                section_line,
                1,
                format!("missing required key `{key}` in [mass] (no profile selected)"),
            )
        })
    };
    let mass = pick("mass", base.map(|b| b.mass))?;
    let density = pick("density", base.map(|b| b.density))?;
    let lattice = pick("lattice_constant", base.map(|b| b.lattice_constant))?;
    let side = match (get("side"), profile) {
        (Some(side), _) => side,
        (None, Some(Profile::Lpf)) => TestMass::lpf().side,
        _ => (mass / density).cbrt(),
    };
    TestMass::new(mass, density, side, lattice).map_err(|err| parser.err(section_line, 1, err.to_string()))
}
