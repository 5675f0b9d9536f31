//! Link-level simulator and analytic BER engine for a two-user downlink in
//! which a reconfigurable intelligent surface (RIS) assists power-domain NOMA.
//!
//! The base station superposes a QPSK near-user symbol and a BPSK far-user
//! symbol; every RIS element applies the phase that aligns its cascaded
//! Rayleigh taps, so each user sees a real, coherently combined channel gain.
//! Bit error rates come out of two independent routes that the test suite
//! cross-checks against each other:
//!
//! * [`montecarlo`]: a deterministic, chunked Monte Carlo engine (rayon
//!   data-parallel by default, sequential fallback when the `parallel`
//!   feature is off; identical results either way),
//! * [`analytic`]: closed-form AWGN expressions and MGF-based numerical
//!   integrals built on the CLT model of the cascade gain.
//!
//! [`special`] supplies the numerics both routes share (Gaussian Q function,
//! Gauss–Legendre quadrature, overflow-safe exponential ratios), [`channel`]
//! the cascaded-Rayleigh channel model, and [`noma`] the superposition
//! transmitter and the two detectors.

pub mod analytic;
pub mod channel;
mod error;
pub mod montecarlo;
pub mod noma;
pub mod special;

pub use error::{Error, Result};
