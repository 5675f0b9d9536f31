use thiserror::Error;

/// Crate-wide error type. Domain violations carry the offending value and
/// the constraint so callers can surface actionable messages.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("{name} = {value} violates {constraint}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("quadrature order must be at least 2, got {order}")]
    QuadratureOrder { order: usize },

    #[error("cascade needs at least one element")]
    EmptyCascade,

    #[error("cascade segments differ in length: {bs_to_ris} BS taps, {ris_to_user} user taps, {phases} phases")]
    MismatchedCascade {
        bs_to_ris: usize,
        ris_to_user: usize,
        phases: usize,
    },

    #[error("MGF undefined at s = {s}: 1 - s*n*(16-pi^2)*gamma/8 = {denominator} is not positive")]
    MgfPole { s: f64, denominator: f64 },

    #[error("SIC detection undefined for effective gain {gain}")]
    DetectionUndefined { gain: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("BER target {target:e} not bracketed by curve '{curve}'")]
    TargetNotBracketed { curve: String, target: f64 },

    #[error("every candidate split underflows to zero BER at {snr_db} dB; probe at a lower SNR")]
    DegenerateAllocation { snr_db: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
