//! Cascaded Rayleigh channel model for a reflecting surface between the
//! base station and a user.
//!
//! Each reflecting element i sees two independent flat Rayleigh links:
//! base-station-to-surface h_i = a_i exp(j t_i) and surface-to-user
//! g_i = b_i exp(j p_i). The element applies a programmable phase shift;
//! setting it to -(t_i + p_i) turns every product term real and positive,
//! so the cascade gain becomes the sum of amplitude products.
//!
//! Scale convention: a tap drawn with `scale` sigma has E[amp^2] = 2 sigma^2,
//! and the unit-power tap uses sigma^2 = 1/2.

use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

/// One Rayleigh-faded link in polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighTap {
    /// Envelope, Rayleigh(sigma) distributed, always > 0.
    pub amplitude: f64,
    /// Uniform phase in [0, 2 pi).
    pub phase: f64,
}

/// Draws one tap: amplitude by inverse-CDF of the Rayleigh envelope,
/// phase uniform. `scale` is the Rayleigh sigma and must be positive.
pub fn draw_tap<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Result<RayleighTap> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::OutOfRange {
            name: "scale",
            value: scale,
            constraint: "scale > 0 and finite",
        });
    }
    // 1 - random() lies in (0, 1], so the log never sees zero.
    let u = 1.0 - rng.random::<f64>();
    let amplitude = scale * (-2.0 * u.ln()).sqrt();
    let phase = 2.0 * PI * rng.random::<f64>();
    Ok(RayleighTap { amplitude, phase })
}

/// The two-hop state of every element of the surface serving one user,
/// plus the phase shift currently programmed into each element.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeLink {
    bs_to_ris: Vec<RayleighTap>,
    ris_to_user: Vec<RayleighTap>,
    phases: Vec<f64>,
}

impl CascadeLink {
    /// Assembles a link from externally drawn taps. All three slices must
    /// be the same non-zero length.
    pub fn new(
        bs_to_ris: Vec<RayleighTap>,
        ris_to_user: Vec<RayleighTap>,
        phases: Vec<f64>,
    ) -> Result<Self> {
        if bs_to_ris.is_empty() {
            return Err(Error::EmptyCascade);
        }
        if bs_to_ris.len() != ris_to_user.len() || bs_to_ris.len() != phases.len() {
            return Err(Error::MismatchedCascade {
                bs_to_ris: bs_to_ris.len(),
                ris_to_user: ris_to_user.len(),
                phases: phases.len(),
            });
        }
        Ok(Self {
            bs_to_ris,
            ris_to_user,
            phases,
        })
    }

    /// Draws a fresh link of `n` elements with per-hop Rayleigh scales
    /// `bs_scale` and `user_scale`. Element phase shifts start at zero.
    pub fn draw<R: Rng + ?Sized>(
        n: usize,
        bs_scale: f64,
        user_scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyCascade);
        }
        let mut bs_to_ris = Vec::with_capacity(n);
        let mut ris_to_user = Vec::with_capacity(n);
        for _ in 0..n {
            bs_to_ris.push(draw_tap(bs_scale, rng)?);
            ris_to_user.push(draw_tap(user_scale, rng)?);
        }
        Ok(Self {
            bs_to_ris,
            ris_to_user,
            phases: vec![0.0; n],
        })
    }

    /// Redraws every tap in place, keeping the allocation. Phase shifts are
    /// reset to zero (stale alignment would silently bias the gain).
    pub fn redraw<R: Rng + ?Sized>(
        &mut self,
        bs_scale: f64,
        user_scale: f64,
        rng: &mut R,
    ) -> Result<()> {
        for tap in &mut self.bs_to_ris {
            *tap = draw_tap(bs_scale, rng)?;
        }
        for tap in &mut self.ris_to_user {
            *tap = draw_tap(user_scale, rng)?;
        }
        for p in &mut self.phases {
            *p = 0.0;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.bs_to_ris.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bs_to_ris.is_empty()
    }

    pub fn bs_to_ris(&self) -> &[RayleighTap] {
        &self.bs_to_ris
    }

    pub fn ris_to_user(&self) -> &[RayleighTap] {
        &self.ris_to_user
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Programs each element to cancel its own two-hop phase, making every
    /// term of the cascade sum real. Operates in place.
    pub fn align_phases(&mut self) {
        for i in 0..self.phases.len() {
            self.phases[i] = -(self.bs_to_ris[i].phase + self.ris_to_user[i].phase);
        }
    }

    /// Effective scalar channel seen by the user:
    /// sum_i a_i b_i exp(j (t_i + p_i + phi_i)).
    ///
    /// After `align_phases` this is real-valued up to rounding, equal to
    /// sum_i a_i b_i.
    pub fn cascade_gain(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.bs_to_ris.len() {
            let h = &self.bs_to_ris[i];
            let g = &self.ris_to_user[i];
            let total_phase = h.phase + g.phase + self.phases[i];
            acc += Complex64::from_polar(h.amplitude * g.amplitude, total_phase);
        }
        acc
    }
}

/// First two moments of the aligned cascade gain A = sum a_i b_i when the
/// taps are Rayleigh(sigma_h) and Rayleigh(sigma_g).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltStats {
    /// E[A] = n sigma_h sigma_g pi / 2.
    pub mean_a: f64,
    /// Var[A] = 4 n sigma_h^2 sigma_g^2 (1 - pi^2 / 16).
    pub var_a: f64,
}

/// Moments of the aligned cascade gain for `n` elements. Each product
/// a_i b_i has mean sigma_h sigma_g pi/2 and variance
/// 4 sigma_h^2 sigma_g^2 (1 - pi^2/16); terms are independent, so both
/// moments scale linearly in n.
pub fn clt_stats(n: usize, sigma_h: f64, sigma_g: f64) -> Result<CltStats> {
    if n == 0 {
        return Err(Error::EmptyCascade);
    }
    for (name, value) in [("sigma_h", sigma_h), ("sigma_g", sigma_g)] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::OutOfRange {
                name,
                value,
                constraint: "scale > 0 and finite",
            });
        }
    }
    let nf = n as f64;
    Ok(CltStats {
        mean_a: nf * sigma_h * sigma_g * PI / 2.0,
        var_a: 4.0 * nf * sigma_h * sigma_h * sigma_g * sigma_g * (1.0 - PI * PI / 16.0),
    })
}

/// Instantaneous receive SNR |A|^2 Es/N0 for the link's current state.
pub fn instantaneous_snr(link: &CascadeLink, es_over_n0: f64) -> f64 {
    link.cascade_gain().norm_sqr() * es_over_n0
}
