use thiserror::Error;

/// Errors raised by the simulation, sampling and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A segment of the (noisy) schedule has non-positive duration.
    #[error("non-monotone schedule: segment {segment} has duration {duration} (noise amplitude too large)")]
    NonMonotoneSchedule { segment: usize, duration: f64 },

    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid amplitude: |psi_N| = {0} exceeds 1")]
    InvalidAmplitude(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("degenerate width: triangular density requires eps > 0")]
    DegenerateWidth,

    #[error("parameter {name} = {value} out of range {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("symmetric eigensolver did not converge")]
    EigenFailure,

    #[error("all {0} samples were rejected by the schedule monotonicity check")]
    AllSamplesRejected(u64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange { name, value, range })
    }
}
