//! Coplanar spin-measurement directions and the correlation model.
//!
//! Every direction lives in a single fixed plane, so a direction is just an
//! angle. Particle-2 outcomes are relabeled so that the pair correlation is
//! `E(α, β) = +α·β` and the probability that the two outcomes match is
//! `½(1 + α·β)`.

use std::f64::consts::{SQRT_2, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classical (local hidden variable) bound on the CHSH expression.
pub const CLASSICAL_BOUND: f64 = 2.0;

/// Quantum maximum of the CHSH expression, 2√2.
pub const TSIRELSON_BOUND: f64 = 2.0 * SQRT_2;

/// A unit vector in the measurement plane, stored as an angle in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Direction {
    radians: f64,
}

impl Direction {
    pub fn from_radians(radians: f64) -> Result<Self> {
        if !radians.is_finite() {
            return Err(Error::NonFiniteAngle(radians));
        }
        let mut r = radians.rem_euclid(TAU);
        // rem_euclid can round up to TAU for tiny negative inputs
        if r >= TAU {
            r = 0.0;
        }
        Ok(Self { radians: r })
    }

    pub fn from_degrees(degrees: f64) -> Result<Self> {
        if !degrees.is_finite() {
            return Err(Error::NonFiniteAngle(degrees));
        }
        Self::from_radians(degrees.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.radians
    }

    pub fn degrees(self) -> f64 {
        self.radians.to_degrees()
    }

    /// Cartesian components `(cos, sin)` in the measurement plane.
    pub fn unit_vector(self) -> [f64; 2] {
        [self.radians.cos(), self.radians.sin()]
    }

    /// This direction rotated by `radians` within the plane.
    pub fn rotated(self, radians: f64) -> Result<Self> {
        Self::from_radians(self.radians + radians)
    }
}

impl TryFrom<f64> for Direction {
    type Error = Error;

    /// Interprets the value as degrees, the unit used at external boundaries.
    fn try_from(degrees: f64) -> Result<Self> {
        Self::from_degrees(degrees)
    }
}

impl From<Direction> for f64 {
    fn from(d: Direction) -> f64 {
        d.degrees()
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.degrees())
    }
}

/// Dot product of two coplanar unit vectors.
pub fn dot(d1: Direction, d2: Direction) -> f64 {
    (d1.radians - d2.radians).cos()
}

/// Correlation `E(α, β)` between the particle-1 outcome along `alpha` and the
/// (relabeled) particle-2 outcome along `beta`.
pub fn correlation_e(alpha: Direction, beta: Direction) -> f64 {
    dot(alpha, beta)
}

/// Probability that the outcomes along `alpha` and `beta` agree.
pub fn match_probability(alpha: Direction, beta: Direction) -> f64 {
    (1.0 + correlation_e(alpha, beta)) / 2.0
}

/// The four apparatus directions of a CHSH experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingsQuad {
    pub a: Direction,
    pub a_prime: Direction,
    pub b: Direction,
    pub b_prime: Direction,
}

impl SettingsQuad {
    pub fn new(a: Direction, a_prime: Direction, b: Direction, b_prime: Direction) -> Self {
        Self {
            a,
            a_prime,
            b,
            b_prime,
        }
    }

    pub fn from_degrees(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Result<Self> {
        Ok(Self::new(
            Direction::from_degrees(a)?,
            Direction::from_degrees(a_prime)?,
            Direction::from_degrees(b)?,
            Direction::from_degrees(b_prime)?,
        ))
    }

    /// The four correlations in CHSH order: `(a,b), (a,b′), (a′,b), (a′,b′)`.
    pub fn correlations(&self) -> [f64; 4] {
        [
            correlation_e(self.a, self.b),
            correlation_e(self.a, self.b_prime),
            correlation_e(self.a_prime, self.b),
            correlation_e(self.a_prime, self.b_prime),
        ]
    }
}

/// a = 0°, a′ = 90°, b = 45°, b′ = 135°.
pub fn standard_chsh_settings() -> SettingsQuad {
    SettingsQuad::from_degrees(0.0, 90.0, 45.0, 135.0).expect("finite angles")
}

/// The standard settings with b′ moved to 55° from a (35° from a′).
pub fn modified_settings_55_35() -> SettingsQuad {
    SettingsQuad::from_degrees(0.0, 90.0, 45.0, 55.0).expect("finite angles")
}

/// Combines four correlations in CHSH order into `|E₁ − E₂ + E₃ + E₄|`.
pub fn chsh_from_correlations(e: [f64; 4]) -> f64 {
    (e[0] - e[1] + e[2] + e[3]).abs()
}

/// `S = |E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)|`.
pub fn chsh_s(q: &SettingsQuad) -> f64 {
    chsh_from_correlations(q.correlations())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChshClass {
    LocalCompatible,
    QuantumViolating,
    SuperQuantum,
}

impl fmt::Display for ChshClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChshClass::LocalCompatible => "local-compatible",
            ChshClass::QuantumViolating => "quantum-violating",
            ChshClass::SuperQuantum => "super-quantum",
        })
    }
}

/// Exact comparison against 2 and 2√2; boundary values fall in the lower class.
pub fn classify_chsh(s: f64) -> ChshClass {
    if s <= CLASSICAL_BOUND {
        ChshClass::LocalCompatible
    } else if s <= TSIRELSON_BOUND {
        ChshClass::QuantumViolating
    } else {
        ChshClass::SuperQuantum
    }
}
