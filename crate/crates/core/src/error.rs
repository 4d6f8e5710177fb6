use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sequence lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("sequence has zero variance")]
    DegenerateSequence,

    #[error("outcome sequence is empty")]
    EmptySequence,

    #[error("outcome at index {index} is {value}, expected +1 or -1")]
    InvalidOutcome { index: usize, value: i8 },

    #[error("{name} = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("angle {0} is not finite")]
    NonFiniteAngle(f64),

    #[error("local settings are not orthogonal (dot = {0:e})")]
    NotOrthogonal(f64),

    #[error("remote options must include the no-measurement case")]
    MissingNoMeasurementOption,

    #[error("sample count must be at least 1")]
    ZeroSamples,
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            domain,
        }
    }
}

/// Rejects `value` unless it lies in the closed unit interval.
pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::domain(name, value, "[0, 1]"))
    }
}
