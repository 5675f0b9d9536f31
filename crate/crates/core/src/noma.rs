//! Two-user power-domain superposition coding and the matching receivers.
//!
//! The near user carries QPSK (two bits per symbol, Gray mapped, b0 on the
//! real axis and b1 on the imaginary axis); the far user carries BPSK on the
//! real axis. The far user slices directly, treating the near user's signal
//! as noise; the near user first decides the far-user bit, subtracts its
//! reconstruction, then slices the residual quadrant.

use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

/// Power allocation between the two users.
///
/// The near user gets eps1 = alpha * es, the far user eps2 = es - eps1, so
/// the energies always sum to es exactly. alpha is restricted to (0, 0.5):
/// at or above 0.5 the far user would no longer dominate the real axis and
/// both receivers break down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    alpha: f64,
    es: f64,
    eps1: f64,
    eps2: f64,
}

impl PowerSplit {
    pub fn new(alpha: f64, es: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha >= 0.5 {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: alpha,
                constraint: "0 < alpha < 0.5",
            });
        }
        if !es.is_finite() || es <= 0.0 {
            return Err(Error::OutOfRange {
                name: "es",
                value: es,
                constraint: "es > 0 and finite",
            });
        }
        let eps1 = alpha * es;
        Ok(Self {
            alpha,
            es,
            eps1,
            eps2: es - eps1,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn es(&self) -> f64 {
        self.es
    }

    /// Near-user symbol energy.
    pub fn eps1(&self) -> f64 {
        self.eps1
    }

    /// Far-user symbol energy.
    pub fn eps2(&self) -> f64 {
        self.eps2
    }
}

/// One symbol interval's worth of payload: two near-user bits, one
/// far-user bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UserBits {
    pub nu_bits: [bool; 2],
    pub fu_bit: bool,
}

/// Gray-mapped QPSK: bit 0 selects the real sign, bit 1 the imaginary
/// sign, false mapping to +. Every output has unit magnitude.
pub fn map_qpsk(bits: [bool; 2]) -> Complex64 {
    let re = if bits[0] { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    let im = if bits[1] { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    Complex64::new(re, im)
}

/// BPSK on the real axis: false -> +1, true -> -1.
pub fn map_bpsk(bit: bool) -> f64 {
    if bit {
        -1.0
    } else {
        1.0
    }
}

/// Superposition-coded symbol sqrt(eps1) x_nu + sqrt(eps2) x_fu. Averaged
/// over equiprobable bits its energy is exactly es (cross terms cancel).
pub fn superpose(bits: UserBits, split: &PowerSplit) -> Complex64 {
    split.eps1().sqrt() * map_qpsk(bits.nu_bits) + split.eps2().sqrt() * map_bpsk(bits.fu_bit)
}

/// Far-user detector: sign slicer on the real axis. The slicer is
/// scale-invariant, so it needs neither the channel gain nor the power
/// split; the near-user signal is simply absorbed into the noise.
pub fn detect_fu(received: Complex64) -> bool {
    received.re < 0.0
}

/// Near-user receiver: hard-decision interference cancellation.
///
/// Stage 1 decides the far-user bit by the same sign rule the far user
/// applies; stage 2 subtracts effective_gain * sqrt(eps2) times the
/// reconstructed BPSK symbol; stage 3 slices the residual quadrant for the
/// two near-user bits. Returns the near-user bits and the stage-1 estimate.
///
/// The gain must be strictly positive: with a vanished channel the
/// subtraction is meaningless and the caller gets an error rather than a
/// coin flip.
pub fn detect_nu_sic(
    received: Complex64,
    effective_gain: f64,
    split: &PowerSplit,
) -> Result<([bool; 2], bool)> {
    if !(effective_gain > 0.0) || !effective_gain.is_finite() {
        return Err(Error::DetectionUndefined {
            gain: effective_gain,
        });
    }
    let fu_estimate = received.re < 0.0;
    let residual = received - effective_gain * split.eps2().sqrt() * map_bpsk(fu_estimate);
    Ok(([residual.re < 0.0, residual.im < 0.0], fu_estimate))
}

/// All eight bit patterns, handy for exhaustive noiseless checks.
pub fn all_bit_patterns() -> [UserBits; 8] {
    let mut out = [UserBits {
        nu_bits: [false; 2],
        fu_bit: false,
    }; 8];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = UserBits {
            nu_bits: [k & 4 != 0, k & 2 != 0],
            fu_bit: k & 1 != 0,
        };
    }
    out
}
