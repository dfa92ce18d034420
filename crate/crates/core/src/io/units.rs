//! Quantities with unit suffixes, e.g. `46 mm`, `1 mHz`, `2.33 g/cm3`.
//! Everything is normalized to SI.

use crate::types::ATOMIC_MASS_UNIT;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Dimensionless,
    Length,
    Mass,
    Frequency,
    AngularFrequency,
    Pressure,
    Temperature,
    Power,
    Density,
    InverseTemperature,
    TemperatureAsd,
    FrequencyAsd,
    InverseRootHz,
    LengthAsd,
    RotationRateAsd,
    Action,
    GravitationalConstant,
    EnergyPerKelvin,
    Velocity,
}

impl Dimension {
    pub fn si_unit(self) -> &'static str {
        match self {
            Dimension::Dimensionless => "(none)",
            Dimension::Length => "m",
            Dimension::Mass => "kg",
            Dimension::Frequency => "Hz",
            Dimension::AngularFrequency => "rad/s",
            Dimension::Pressure => "Pa",
            Dimension::Temperature => "K",
            Dimension::Power => "W",
            Dimension::Density => "kg/m3",
            Dimension::InverseTemperature => "1/K",
            Dimension::TemperatureAsd => "K/rtHz",
            Dimension::FrequencyAsd => "Hz/rtHz",
            Dimension::InverseRootHz => "1/rtHz",
            Dimension::LengthAsd => "m/rtHz",
            Dimension::RotationRateAsd => "rad/s/rtHz",
            Dimension::Action => "J*s",
            Dimension::GravitationalConstant => "m3/(kg*s2)",
            Dimension::EnergyPerKelvin => "J/K",
            Dimension::Velocity => "m/s",
        }
    }
}

const UNITS: &[(&str, Dimension, f64)] = &[
    ("m", Dimension::Length, 1.0),
    ("km", Dimension::Length, 1e3),
    ("cm", Dimension::Length, 1e-2),
    ("mm", Dimension::Length, 1e-3),
    ("um", Dimension::Length, 1e-6),
    ("µm", Dimension::Length, 1e-6),
    ("nm", Dimension::Length, 1e-9),
    ("pm", Dimension::Length, 1e-12),
    ("fm", Dimension::Length, 1e-15),
    ("A", Dimension::Length, 1e-10),
    ("Å", Dimension::Length, 1e-10),
    ("angstrom", Dimension::Length, 1e-10),
    ("kg", Dimension::Mass, 1.0),
    ("g", Dimension::Mass, 1e-3),
    ("mg", Dimension::Mass, 1e-6),
    ("amu", Dimension::Mass, ATOMIC_MASS_UNIT),
    ("u", Dimension::Mass, ATOMIC_MASS_UNIT),
    ("Hz", Dimension::Frequency, 1.0),
    ("kHz", Dimension::Frequency, 1e3),
    ("mHz", Dimension::Frequency, 1e-3),
    ("uHz", Dimension::Frequency, 1e-6),
    ("µHz", Dimension::Frequency, 1e-6),
    ("rad/s", Dimension::AngularFrequency, 1.0),
    ("Pa", Dimension::Pressure, 1.0),
    ("hPa", Dimension::Pressure, 1e2),
    ("mPa", Dimension::Pressure, 1e-3),
    ("uPa", Dimension::Pressure, 1e-6),
    ("bar", Dimension::Pressure, 1e5),
    ("mbar", Dimension::Pressure, 1e2),
    ("K", Dimension::Temperature, 1.0),
    ("mK", Dimension::Temperature, 1e-3),
    ("W", Dimension::Power, 1.0),
    ("kW", Dimension::Power, 1e3),
    ("mW", Dimension::Power, 1e-3),
    ("uW", Dimension::Power, 1e-6),
    ("kg/m3", Dimension::Density, 1.0),
    ("kg/m^3", Dimension::Density, 1.0),
    ("g/cm3", Dimension::Density, 1e3),
    ("g/cm^3", Dimension::Density, 1e3),
    ("1/K", Dimension::InverseTemperature, 1.0),
    ("/K", Dimension::InverseTemperature, 1.0),
    ("K^-1", Dimension::InverseTemperature, 1.0),
    ("K/rtHz", Dimension::TemperatureAsd, 1.0),
    ("mK/rtHz", Dimension::TemperatureAsd, 1e-3),
    ("uK/rtHz", Dimension::TemperatureAsd, 1e-6),
    ("Hz/rtHz", Dimension::FrequencyAsd, 1.0),
    ("kHz/rtHz", Dimension::FrequencyAsd, 1e3),
    ("1/rtHz", Dimension::InverseRootHz, 1.0),
    ("/rtHz", Dimension::InverseRootHz, 1.0),
    ("m/rtHz", Dimension::LengthAsd, 1.0),
    ("nm/rtHz", Dimension::LengthAsd, 1e-9),
    ("pm/rtHz", Dimension::LengthAsd, 1e-12),
    ("fm/rtHz", Dimension::LengthAsd, 1e-15),
    ("rad/s/rtHz", Dimension::RotationRateAsd, 1.0),
    ("nrad/s/rtHz", Dimension::RotationRateAsd, 1e-9),
    ("J*s", Dimension::Action, 1.0),
    ("Js", Dimension::Action, 1.0),
    ("m3/(kg*s2)", Dimension::GravitationalConstant, 1.0),
    ("J/K", Dimension::EnergyPerKelvin, 1.0),
    ("m/s", Dimension::Velocity, 1.0),
];

fn normalize_unit(raw: &str) -> String {
    raw.chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .replace("sqrt(Hz)", "rtHz")
        .replace("√Hz", "rtHz")
}

/// Looks up a unit suffix. Returns its dimension and SI multiplier.
pub fn lookup_unit(raw: &str) -> Option<(Dimension, f64)> {
    let unit = normalize_unit(raw);
    UNITS
        .iter()
        .find(|(name, _, _)| *name == unit)
        .map(|&(_, d, f)| (d, f))
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuantityError {
    BadNumber(String),
    UnknownUnit(String),
    Mismatch { unit: String, found: Dimension, expected: Dimension },
}

impl std::fmt::Display for QuantityError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QuantityError::BadNumber(s) => write!(f, "cannot parse number `{s}`"),
            QuantityError::UnknownUnit(u) => write!(f, "unknown unit `{u}`"),
            QuantityError::Mismatch {
                unit,
                found,
                expected,
            } => write!(
                f,
                "unit mismatch: `{unit}` is a {found:?} unit, expected {expected:?} (SI: {})",
                expected.si_unit()
            ),
        }
    }
}

/// Parses `"<number> [unit]"`. A bare number is taken to be in SI units.
pub fn parse_quantity(text: &str, expected: Dimension) -> Result<f64, QuantityError> {
    let text = text.trim();
    let split = text
        .char_indices()
        .find(|&(i, c)| {
            c.is_whitespace() || (c.is_alphabetic() && !is_exponent(text, i)) || c == '/' || c == 'Å' || c == 'µ'
        })
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    let (number, unit) = text.split_at(split);
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| QuantityError::BadNumber(number.trim().to_string()))?;
    let unit = unit.trim();
    if unit.is_empty() {
        return Ok(value);
    }
    let (dim, factor) =
        lookup_unit(unit).ok_or_else(|| QuantityError::UnknownUnit(unit.to_string()))?;
    if dim != expected {
        return Err(QuantityError::Mismatch {
            unit: unit.to_string(),
            found: dim,
            expected,
        });
    }
    Ok(value * factor)
}

/// `e`/`E` inside a number such as `1e-7` belongs to the number.
fn is_exponent(text: &str, i: usize) -> bool {
    let bytes = text.as_bytes();
    if !matches!(bytes[i], b'e' | b'E') || i == 0 || !bytes[i - 1].is_ascii_digit() && bytes[i - 1] != b'.' {
        return false;
    }
    match bytes.get(i + 1) {
        Some(b'+' | b'-') => bytes.get(i + 2).is_some_and(|b| b.is_ascii_digit()),
        Some(b) => b.is_ascii_digit(),
        None => false,
    }
}
