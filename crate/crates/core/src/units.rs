//! Conversions between the SI values used internally and the laboratory
//! units ferroelectric data is usually quoted in.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Elementary charge [C].
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
/// Vacuum permittivity [F/m].
pub const EPSILON_0: f64 = 8.8541878128e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dimension {
    ArealCharge,
    Field,
    Length,
    Area,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    MicroCoulombPerCm2,
    CoulombPerM2,
    CoulombPerCm2,
    /// Elementary charges per cm².
    ChargesPerCm2,
    MegaVoltPerCm,
    VoltPerM,
    Nanometer,
    Meter,
    SquareMicrometer,
    SquareMeter,
}

impl Unit {
    /// Suffix tokens accepted in configuration keys and on the command line.
    pub const ALL: [(&'static str, Unit); 10] = [
        ("uC_cm2", Unit::MicroCoulombPerCm2),
        ("C_m2", Unit::CoulombPerM2),
        ("C_cm2", Unit::CoulombPerCm2),
        ("e_cm2", Unit::ChargesPerCm2),
        ("MV_cm", Unit::MegaVoltPerCm),
        ("V_m", Unit::VoltPerM),
        ("nm", Unit::Nanometer),
        ("m", Unit::Meter),
        ("um2", Unit::SquareMicrometer),
        ("m2", Unit::SquareMeter),
    ];

    fn dimension(self) -> Dimension {
        match self {
            Unit::MicroCoulombPerCm2
            | Unit::CoulombPerM2
            | Unit::CoulombPerCm2
            | Unit::ChargesPerCm2 => Dimension::ArealCharge,
            Unit::MegaVoltPerCm | Unit::VoltPerM => Dimension::Field,
            Unit::Nanometer | Unit::Meter => Dimension::Length,
            Unit::SquareMicrometer | Unit::SquareMeter => Dimension::Area,
        }
    }

    /// Multiplier taking a value in this unit to the SI unit of its dimension.
    pub fn to_si(self) -> f64 {
        match self {
            Unit::MicroCoulombPerCm2 => 1e-2,
            Unit::CoulombPerM2 => 1.0,
            Unit::CoulombPerCm2 => 1e4,
            Unit::ChargesPerCm2 => ELEMENTARY_CHARGE * 1e4,
            Unit::MegaVoltPerCm => 1e8,
            Unit::VoltPerM => 1.0,
            Unit::Nanometer => 1e-9,
            Unit::Meter => 1.0,
            Unit::SquareMicrometer => 1e-12,
            Unit::SquareMeter => 1.0,
        }
    }

    pub fn token(self) -> &'static str {
        Unit::ALL
            .iter()
            .find(|(_, u)| *u == self)
            .map(|(t, _)| *t)
            .unwrap_or("?")
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.replace(['/', '·'], "_").replace('µ', "u");
        Unit::ALL
            .iter()
            .find(|(t, _)| *t == normalized)
            .map(|(_, u)| *u)
            .ok_or_else(|| Error::UnknownUnit(s.to_string()))
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Convert `value` between two units of the same dimension.
pub fn convert_units(value: f64, from: Unit, to: Unit) -> Result<f64> {
    if from.dimension() != to.dimension() {
        return Err(Error::UnitPair {
            from: from.to_string(),
            to: to.to_string(),
        });
    }
    if from == to {
        return Ok(value);
    }
    Ok(value * from.to_si() / to.to_si())
}

/// Split a suffixed key such as `t_f_nm` into (`t_f`, nm). Keys without
/// a recognised suffix are returned unchanged with no unit.
pub fn split_unit_suffix(key: &str) -> (&str, Option<Unit>) {
    // Longest suffix first so `C_cm2` wins over `m2`-style tails.
    let mut candidates: Vec<_> = Unit::ALL.iter().collect();
    candidates.sort_by_key(|(t, _)| std::cmp::Reverse(t.len()));
    for (token, unit) in candidates {
        if let Some(stem) = key.strip_suffix(token) {
            if let Some(stem) = stem.strip_suffix('_') {
                if !stem.is_empty() {
                    return (stem, Some(*unit));
                }
            }
        }
    }
    (key, None)
}
