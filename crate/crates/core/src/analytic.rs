//! Error-rate expressions: exact Gaussian-tail formulas for the unfaded
//! superposition-coded link, and their fading averages over the aligned
//! cascade under the Gaussian (CLT) gain approximation.
//!
//! For N aligned unit-power elements the cascade gain A is treated as
//! Gaussian with mean N pi/4 and variance N(16 - pi^2)/16. The squared gain
//! then has a closed-form MGF, and the fading average of any Q(c A) becomes
//! a finite integral of that MGF over [0, pi/2] (the finite-limit form of
//! the Gaussian tail), evaluated here with a fixed Gauss-Legendre rule.

use crate::special::{gaussian_q, stable_exp_ratio, QuadratureRule};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Policy for turning the per-term decision distances of the two-user
/// formulas into the SNR parameter of the fading-averaged integral.
///
/// The two-user tail arguments are amplitude sums over a noise scale; the
/// averaged integral takes a squared-amplitude SNR. `Literal` slots the
/// amplitude-over-sqrt-noise surrogate straight into the SNR position;
/// `ConsistentSnr` (the default, and the one the simulator validates) uses
/// the SNR that makes the integral equal the true fading average of the
/// matching Gaussian tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubstitutionMode {
    Literal,
    #[default]
    ConsistentSnr,
}

/// Arguments of the cascade-SNR MGF: element count, mean symbol SNR, and
/// the transform variable (negative throughout the tail-average usage).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfParams {
    pub n_elements: usize,
    pub es_over_n0: f64,
    pub s: f64,
}

fn validate_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::OutOfRange {
            name: "n_elements",
            value: 0.0,
            constraint: "n_elements >= 1",
        });
    }
    Ok(())
}

fn validate_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::OutOfRange {
            name,
            value,
            constraint: "> 0 and finite",
        });
    }
    Ok(())
}

fn validate_energy(name: &'static str, value: f64) -> Result<()> {
    if !(value >= 0.0) || !value.is_finite() {
        return Err(Error::OutOfRange {
            name,
            value,
            constraint: ">= 0 and finite",
        });
    }
    Ok(())
}

/// Round-off guard: quadrature and products of near-half terms may stray
/// a few ulps outside [0, 1]; anything farther than 1e-9 is a real bug.
fn clamp_prob(p: f64) -> f64 {
    let clamped = p.clamp(0.0, 1.0);
    debug_assert!(
        (clamped - p).abs() <= 1e-9,
        "probability clamp moved {p} by more than 1e-9"
    );
    clamped
}

/// MGF core without argument validation; `n` is the element count as f64.
fn mgf_unchecked(n: f64, gamma_bar: f64, s: f64) -> Result<f64> {
    let denominator = 1.0 - s * n * (16.0 - PI * PI) * gamma_bar / 8.0;
    if denominator <= 0.0 {
        return Err(Error::MgfPole { s, denominator });
    }
    let numerator = s * n * n * PI * PI * gamma_bar / 16.0;
    Ok(stable_exp_ratio(numerator, denominator)? / denominator.sqrt())
}

/// MGF of the instantaneous cascade SNR gamma = A^2 Es/N0 under the
/// Gaussian gain approximation:
///
///   M(s) = (1 - s N (16 - pi^2) g / 8)^(-1/2)
///          * exp( s N^2 pi^2 g / 16 / (1 - s N (16 - pi^2) g / 8) )
///
/// with g = es_over_n0. Defined for s left of the pole; crossing it is a
/// domain error.
pub fn mgf_ris_snr(p: MgfParams) -> Result<f64> {
    validate_n(p.n_elements)?;
    validate_positive("es_over_n0", p.es_over_n0)?;
    if !p.s.is_finite() {
        return Err(Error::NonFinite {
            name: "s",
            value: p.s,
        });
    }
    mgf_unchecked(p.n_elements as f64, p.es_over_n0, p.s)
}

/// Fading average of the Gaussian tail at SNR scale `gamma_bar` >= 0:
/// (1/pi) * sum_k w_k M(-1/sin^2 xi_k). Zero scale short-circuits to 1/2
/// (the integrand is identically 1).
fn craig_average(n: usize, gamma_bar: f64, rule: &QuadratureRule) -> Result<f64> {
    if gamma_bar == 0.0 {
        return Ok(0.5);
    }
    let nf = n as f64;
    let mut acc = 0.0;
    for (&xi, &w) in rule.nodes().iter().zip(rule.weights()) {
        let s = -1.0 / xi.sin().powi(2);
        acc += w * mgf_unchecked(nf, gamma_bar, s)?;
    }
    Ok(clamp_prob(acc / PI))
}

/// Fading average of Q(c A) for a signed decision distance c: the integral
/// at SNR c^2/2, reflected for negative c exactly as Q(-x) = 1 - Q(x).
/// Negative distances are unreachable under the power-split constraint but
/// are handled so degenerate energy inputs stay meaningful.
fn averaged_tail(n: usize, c: f64, rule: &QuadratureRule) -> Result<f64> {
    let integral = craig_average(n, c * c / 2.0, rule)?;
    Ok(if c < 0.0 { 1.0 - integral } else { integral })
}

/// Literal-mode term: the printed surrogate goes straight into the SNR
/// slot; a negative surrogate (same unreachable region) is floored at the
/// zero-SNR saturation value.
fn literal_tail(n: usize, surrogate: f64, rule: &QuadratureRule) -> Result<f64> {
    craig_average(n, surrogate.max(0.0), rule)
}

/// Average error probability of coherent PSK over the aligned cascade:
/// (1/pi) times the MGF integrated at -1/sin^2 over [0, pi/2]. Result is
/// in [0, 1/2] and decreasing in both arguments.
pub fn pe_mpsk(n_elements: usize, es_over_n0: f64, quad: &QuadratureRule) -> Result<f64> {
    validate_n(n_elements)?;
    validate_positive("es_over_n0", es_over_n0)?;
    craig_average(n_elements, es_over_n0, quad)
}

/// Upper bound on `pe_mpsk`: half the integrand at its maximum xi = pi/2,
/// i.e. M(-1)/2.
pub fn pe_upper_bound(n_elements: usize, es_over_n0: f64) -> Result<f64> {
    validate_n(n_elements)?;
    validate_positive("es_over_n0", es_over_n0)?;
    Ok(0.5 * mgf_unchecked(n_elements as f64, es_over_n0, -1.0)?)
}

/// Far-user bit error rate on the unfaded (unit-gain) link: the BPSK
/// slicer sees the near-user signal as a +/- sqrt(eps1/2) in-phase offset,
/// giving the two-term average
///
///   1/2 [ Q((sqrt(eps2) + sqrt(eps1/2)) / sqrt(N0/2))
///       + Q((sqrt(eps2) - sqrt(eps1/2)) / sqrt(N0/2)) ].
///
/// This form is exact for the sign detector.
pub fn pe_fu_conventional(eps1: f64, eps2: f64, n0: f64) -> Result<f64> {
    validate_energy("eps1", eps1)?;
    validate_energy("eps2", eps2)?;
    validate_positive("n0", n0)?;
    let scale = (2.0 / n0).sqrt();
    let base = eps2.sqrt();
    let leak = (eps1 / 2.0).sqrt();
    Ok(clamp_prob(0.5
        * (gaussian_q((base + leak) * scale)? + gaussian_q((base - leak) * scale)?)))
}

/// Near-user bit error rate on the unfaded link in the product form
///
///   1/4 [ Q(a) (4 - Q(b+) - Q(b-)) - Q(b+) ],
///   a = sqrt(eps1/N0), b+- = (sqrt(2 eps2) +/- sqrt(eps1)) / sqrt(N0).
///
/// The product form underestimates the cancellation receiver's true error
/// rate: it drops the branch where the first-stage decision is wrong and
/// the doubled interference lands back on the correct side. See
/// `pe_nu_conventional_exact` for the full decision-region result, which
/// is what the simulator reproduces.
pub fn pe_nu_conventional(eps1: f64, eps2: f64, n0: f64) -> Result<f64> {
    validate_energy("eps1", eps1)?;
    validate_energy("eps2", eps2)?;
    validate_positive("n0", n0)?;
    let qa = gaussian_q((eps1 / n0).sqrt())?;
    let b_plus = gaussian_q(((2.0 * eps2).sqrt() + eps1.sqrt()) / n0.sqrt())?;
    let b_minus = gaussian_q(((2.0 * eps2).sqrt() - eps1.sqrt()) / n0.sqrt())?;
    Ok(clamp_prob(
        0.25 * (qa * (4.0 - b_plus - b_minus) - b_plus),
    ))
}

/// Exact bit error rate of the hard-decision cancellation receiver on the
/// unfaded link.
///
/// The quadrature branch is interference-free, contributing Q(u) with
/// u = sqrt(eps1/N0). On the in-phase branch, integrating the sign-decide /
/// subtract / slice cascade over the noise (v = sqrt(2 eps2 / N0) is the
/// interferer offset) gives Q(u) + 1/2 [Q(v-u) - Q(u+v) + Q(u+2v)
/// - Q(2v-u)]; averaging the two branches yields
///
///   Q(u) + 1/4 [ Q(v-u) - Q(u+v) + Q(u+2v) - Q(2v-u) ].
pub fn pe_nu_conventional_exact(eps1: f64, eps2: f64, n0: f64) -> Result<f64> {
    validate_energy("eps1", eps1)?;
    validate_energy("eps2", eps2)?;
    validate_positive("n0", n0)?;
    let u = (eps1 / n0).sqrt();
    let v = (2.0 * eps2 / n0).sqrt();
    Ok(clamp_prob(
        gaussian_q(u)?
            + 0.25
                * (gaussian_q(v - u)? - gaussian_q(u + v)? + gaussian_q(u + 2.0 * v)?
                    - gaussian_q(2.0 * v - u)?),
    ))
}

/// Far-user bit error rate over the aligned cascade: the two terms of
/// `pe_fu_conventional` with each tail replaced by its fading average, the
/// per-term SNR chosen by `mode`.
pub fn pe_fu_ris(
    n_fu: usize,
    eps1: f64,
    eps2: f64,
    n0: f64,
    mode: SubstitutionMode,
    quad: &QuadratureRule,
) -> Result<f64> {
    validate_n(n_fu)?;
    validate_energy("eps1", eps1)?;
    validate_energy("eps2", eps2)?;
    validate_positive("n0", n0)?;
    let plus = eps2.sqrt() + (eps1 / 2.0).sqrt();
    let minus = eps2.sqrt() - (eps1 / 2.0).sqrt();
    let (term_plus, term_minus) = match mode {
        SubstitutionMode::Literal => (
            literal_tail(n_fu, plus / n0.sqrt(), quad)?,
            literal_tail(n_fu, minus / n0.sqrt(), quad)?,
        ),
        SubstitutionMode::ConsistentSnr => {
            let scale = (2.0 / n0).sqrt();
            (
                averaged_tail(n_fu, plus * scale, quad)?,
                averaged_tail(n_fu, minus * scale, quad)?,
            )
        }
    };
    Ok(clamp_prob(0.5 * (term_plus + term_minus)))
}

/// Near-user bit error rate over the aligned cascade: the bracket of
/// `pe_nu_conventional` with each tail replaced by its fading average, the
/// per-term SNR chosen by `mode`.
///
/// Inherits the product form's structure, including its saturation
/// artifact: as the SNR scales vanish every average tends to 1/2 and the
/// whole bracket tends to 1/4 (not 1/2), approached from above for
/// eps1 < 2 eps2. In that saturation plateau the value is not monotone in
/// the element count; monotonicity holds once the output drops clear of
/// the plateau.
pub fn pe_nu_ris(
    n_nu: usize,
    eps1: f64,
    eps2: f64,
    n0: f64,
    mode: SubstitutionMode,
    quad: &QuadratureRule,
) -> Result<f64> {
    validate_n(n_nu)?;
    validate_energy("eps1", eps1)?;
    validate_energy("eps2", eps2)?;
    validate_positive("n0", n0)?;
    let b_plus = (2.0 * eps2).sqrt() + eps1.sqrt();
    let b_minus = (2.0 * eps2).sqrt() - eps1.sqrt();
    let (i_a, i_plus, i_minus) = match mode {
        SubstitutionMode::Literal => (
            literal_tail(n_nu, eps1 / n0.sqrt(), quad)?,
            literal_tail(n_nu, b_plus / n0.sqrt(), quad)?,
            literal_tail(n_nu, b_minus / n0.sqrt(), quad)?,
        ),
        SubstitutionMode::ConsistentSnr => (
            averaged_tail(n_nu, (eps1 / n0).sqrt(), quad)?,
            averaged_tail(n_nu, b_plus / n0.sqrt(), quad)?,
            averaged_tail(n_nu, b_minus / n0.sqrt(), quad)?,
        ),
    };
    Ok(clamp_prob(
        0.25 * (i_a * (4.0 - i_plus - i_minus) - i_plus),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 40-digit arithmetic: the MGF and the
    // conventional formulas evaluated directly, the averaged integrals via
    // adaptive quadrature refined far past f64 precision.

    fn rule64() -> QuadratureRule {
        QuadratureRule::gauss_legendre_half_pi(64).unwrap()
    }

    fn rel_err(got: f64, want: f64) -> f64 {
        ((got - want) / want).abs()
    }

    #[test]
    fn mgf_at_s_zero_is_exactly_one() {
        for n in [1, 16, 64] {
            for g in [0.01, 1.0, 50.0] {
                let m = mgf_ris_snr(MgfParams {
                    n_elements: n,
                    es_over_n0: g,
                    s: 0.0,
                })
                .unwrap();
                assert_eq!(m, 1.0);
            }
        }
    }

    #[test]
    fn mgf_frozen_reference_values() {
        let cases = [
            (16, 1.0, -0.1, 5.564551217640145915653e-4),
            (16, 0.01, -0.1, 0.8503611875065106923016),
            (32, 0.01, -0.2, 0.2928225715458800150010),
            (64, 0.01, -0.05, 0.2878875425335625384481),
        ];
        for (n, g, s, want) in cases {
            let got = mgf_ris_snr(MgfParams {
                n_elements: n,
                es_over_n0: g,
                s,
            })
            .unwrap();
            assert!(
                rel_err(got, want) < 1e-13,
                "mgf({n},{g},{s}) = {got:e}, want {want:e}"
            );
        }
    }

    #[test]
    fn mgf_rejects_pole_crossing() {
        // Pole at s = 8 / (N (16 - pi^2) gamma) ~ 0.0816 for N=16, g=1.
        let bad = mgf_ris_snr(MgfParams {
            n_elements: 16,
            es_over_n0: 1.0,
            s: 0.1,
        });
        assert!(matches!(bad, Err(Error::MgfPole { .. })));
        let good = mgf_ris_snr(MgfParams {
            n_elements: 16,
            es_over_n0: 1.0,
            s: 0.05,
        })
        .unwrap();
        assert!(good > 1.0);
    }

    #[test]
    fn mgf_rejects_bad_arguments() {
        let ok = MgfParams {
            n_elements: 16,
            es_over_n0: 1.0,
            s: -0.1,
        };
        assert!(mgf_ris_snr(MgfParams { n_elements: 0, ..ok }).is_err());
        assert!(mgf_ris_snr(MgfParams {
            es_over_n0: 0.0,
            ..ok
        })
        .is_err());
        assert!(mgf_ris_snr(MgfParams {
            es_over_n0: -1.0,
            ..ok
        })
        .is_err());
        assert!(mgf_ris_snr(MgfParams {
            s: f64::NAN,
            ..ok
        })
        .is_err());
    }

    #[test]
    fn pe_mpsk_frozen_reference_values() {
        let rule = rule64();
        let cases = [
            (16, 0.1, 8.269800653749767964377e-5),
            (16, 0.001, 0.2882271464691004804191),
            (2, 0.5, 0.1092766259282307675345),
        ];
        for (n, g, want) in cases {
            let got = pe_mpsk(n, g, &rule).unwrap();
            assert!(
                rel_err(got, want) < 1e-9,
                "pe_mpsk({n},{g}) = {got:e}, want {want:e}, rel {:e}",
                rel_err(got, want)
            );
        }
    }

    #[test]
    fn pe_mpsk_saturates_to_half_at_vanishing_snr() {
        let rule = rule64();
        let got = pe_mpsk(16, 1e-12, &rule).unwrap();
        assert!((got - 0.5).abs() < 1e-5, "got {got}");
    }

    #[test]
    fn pe_upper_bound_frozen_reference_values() {
        let cases = [
            (16, 0.1, 2.782275608820072957827e-4),
            (2, 0.5, 0.1871103452274272350616),
        ];
        for (n, g, want) in cases {
            let got = pe_upper_bound(n, g).unwrap();
            assert!(rel_err(got, want) < 1e-13, "ub({n},{g}) = {got:e}");
        }
        assert!((pe_upper_bound(16, 1e-12).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn upper_bound_halves_when_n_doubles_much_faster_than_linearly() {
        // Strict decrease in N through both MGF factors.
        let mut prev = pe_upper_bound(1, 0.5).unwrap();
        for n in [2, 4, 8, 16, 32] {
            let cur = pe_upper_bound(n, 0.5).unwrap();
            assert!(cur < prev, "ub not decreasing at N={n}");
            prev = cur;
        }
    }

    #[test]
    fn fu_conventional_frozen_reference_values() {
        // alpha = 0.4, es = 1, Es/N0 in {0, 5, 10} dB.
        let cases = [
            (1.0, 0.1818444680574935201099),
            (10f64.powf(-0.5), 0.1031111691181563201108),
            (0.1, 0.03579155814454459932317),
        ];
        for (n0, want) in cases {
            let got = pe_fu_conventional(0.4, 0.6, n0).unwrap();
            assert!(rel_err(got, want) < 1e-13, "n0 {n0}: {got:e} vs {want:e}");
        }
    }

    #[test]
    fn fu_conventional_interference_free_reduction() {
        // eps1 = 0 collapses both terms to the plain BPSK tail.
        let n0 = 0.25;
        let got = pe_fu_conventional(0.0, 0.6, n0).unwrap();
        let want = gaussian_q((2.0 * 0.6 / n0).sqrt()).unwrap();
        assert!((got - want).abs() < 1e-16);
    }

    #[test]
    fn fu_conventional_degenerate_equal_leak() {
        // eps2 = eps1/2 zeroes the minus-term argument: Q(0) = 1/2
        // contributes exactly 1/4.
        let (eps1, eps2, n0) = (0.5, 0.25, 0.3);
        let got = pe_fu_conventional(eps1, eps2, n0).unwrap();
        let plus = 2.0 * eps2.sqrt() * (2.0 / n0).sqrt();
        let want = 0.25 + 0.5 * gaussian_q(plus).unwrap();
        assert!((got - want).abs() < 1e-16);
    }

    #[test]
    fn nu_conventional_frozen_reference_values() {
        let cases = [
            (1.0, 0.2290818072598743411258),
            (10f64.powf(-0.5), 0.1233757176587340285395),
            (0.1, 0.02234299479725728496091),
        ];
        for (n0, want) in cases {
            let got = pe_nu_conventional(0.4, 0.6, n0).unwrap();
            assert!(rel_err(got, want) < 1e-13, "n0 {n0}: {got:e} vs {want:e}");
        }
    }

    #[test]
    fn nu_conventional_zero_interference_reduces_to_half_tail() {
        // eps2 = 0 makes b+ = -b- = a, and the bracket collapses to
        // (1/4) Q(a) (4 - 1) - (1/4) Q(a) ... = Q(a)/2 by direct arithmetic.
        let (eps1, n0) = (0.4, 0.2);
        let got = pe_nu_conventional(eps1, 0.0, n0).unwrap();
        let want = 0.5 * gaussian_q((eps1 / n0).sqrt()).unwrap();
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn nu_conventional_zero_snr_limit_is_quarter() {
        let got = pe_nu_conventional(0.4, 0.6, 1e30).unwrap();
        assert!((got - 0.25).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn nu_exact_frozen_reference_values() {
        let cases = [
            (1.0, 0.3191681393768471597934),
            (10f64.powf(-0.5), 0.1806892277489889452971),
            (0.1, 0.04064579565243989846284),
        ];
        for (n0, want) in cases {
            let got = pe_nu_conventional_exact(0.4, 0.6, n0).unwrap();
            assert!(rel_err(got, want) < 1e-13, "n0 {n0}: {got:e} vs {want:e}");
        }
    }

    #[test]
    fn nu_product_form_sits_below_the_exact_rate() {
        // The dropped first-stage-error branch is a strictly positive
        // contribution; at 10 dB the gap is a frozen ~1.82x ratio.
        for n0 in [1.0, 0.5, 0.1, 0.01] {
            let approx = pe_nu_conventional(0.4, 0.6, n0).unwrap();
            let exact = pe_nu_conventional_exact(0.4, 0.6, n0).unwrap();
            assert!(exact > approx, "n0 {n0}: exact {exact} <= approx {approx}");
        }
        let ratio = pe_nu_conventional_exact(0.4, 0.6, 0.1).unwrap()
            / pe_nu_conventional(0.4, 0.6, 0.1).unwrap();
        assert!((ratio - 1.8192).abs() < 5e-4, "ratio {ratio}");
    }

    #[test]
    fn fu_ris_frozen_reference_values_both_modes() {
        let rule = rule64();
        let n0_15 = 10f64.powf(1.5);
        let n0_20 = 10f64.powf(2.0);
        let cases = [
            (SubstitutionMode::ConsistentSnr, n0_15, 0.1744209428537452226016),
            (SubstitutionMode::Literal, n0_15, 0.01806483947034237282651),
            (SubstitutionMode::ConsistentSnr, n0_20, 0.2676388817417617649418),
            (SubstitutionMode::Literal, n0_20, 0.04026741349236964141002),
        ];
        for (mode, n0, want) in cases {
            let got = pe_fu_ris(8, 0.4, 0.6, n0, mode, &rule).unwrap();
            assert!(
                rel_err(got, want) < 1e-9,
                "{mode:?} n0 {n0}: {got:e} vs {want:e}"
            );
        }
    }

    #[test]
    fn nu_ris_frozen_reference_values_both_modes() {
        let rule = rule64();
        let n0 = 10f64.powf(1.5);
        let cons = pe_nu_ris(16, 0.4, 0.6, n0, SubstitutionMode::ConsistentSnr, &rule).unwrap();
        assert!(rel_err(cons, 0.08302152645024895438731) < 1e-9, "{cons:e}");
        let lit = pe_nu_ris(16, 0.4, 0.6, n0, SubstitutionMode::Literal, &rule).unwrap();
        assert!(rel_err(lit, 2.651995237807165955507e-4) < 1e-9, "{lit:e}");
    }

    #[test]
    fn fu_ris_interference_free_reduction_matches_single_user() {
        // eps1 = 0, ConsistentSnr: both terms collapse to the averaged
        // single-user tail at scale eps2/N0.
        let rule = rule64();
        let n0 = 10f64.powf(1.5);
        let got = pe_fu_ris(8, 0.0, 0.6, n0, SubstitutionMode::ConsistentSnr, &rule).unwrap();
        let want = pe_mpsk(8, 0.6 / n0, &rule).unwrap();
        assert!((got - want).abs() < 1e-15, "{got} vs {want}");
    }

    #[test]
    fn ris_zero_snr_saturation_limits() {
        let rule = rule64();
        let fu = pe_fu_ris(16, 0.4, 0.6, 1e15, SubstitutionMode::ConsistentSnr, &rule).unwrap();
        assert!((fu - 0.5).abs() < 1e-5, "fu {fu}");
        let nu = pe_nu_ris(16, 0.4, 0.6, 1e15, SubstitutionMode::ConsistentSnr, &rule).unwrap();
        assert!((nu - 0.25).abs() < 1e-5, "nu {nu}");
    }

    #[test]
    fn negative_distance_terms_reflect_consistently() {
        // eps2 < eps1/2 flips the minus distance negative (outside the
        // power-split domain, reachable only through raw energies). The
        // consistent term must obey the same reflection as Q itself.
        let rule = rule64();
        let (n, eps1, eps2, n0) = (4, 2.0, 0.125, 1.0);
        let got = pe_fu_ris(n, eps1, eps2, n0, SubstitutionMode::ConsistentSnr, &rule).unwrap();
        let plus = eps2.sqrt() + (eps1 / 2.0).sqrt();
        let minus = eps2.sqrt() - (eps1 / 2.0).sqrt();
        assert!(minus < 0.0);
        let want = 0.5
            * (pe_mpsk(n, plus * plus / n0, &rule).unwrap()
                + (1.0 - pe_mpsk(n, minus * minus / n0, &rule).unwrap()));
        assert!((got - want).abs() < 1e-15);
        // Literal mode floors the negative surrogate at saturation.
        let lit = pe_fu_ris(n, eps1, eps2, n0, SubstitutionMode::Literal, &rule).unwrap();
        let lit_want =
            0.5 * (pe_mpsk(n, plus / n0.sqrt(), &rule).unwrap() + 0.5);
        assert!((lit - lit_want).abs() < 1e-15);
    }

    #[test]
    fn nu_ris_saturation_plateau_is_not_monotone_in_n() {
        // Deep in saturation the bracket approaches 1/4 from above and
        // larger element counts sit closer to the plateau's crest: at
        // Es/N0 = -40 dB the value rises from N=8 to N=32 before the
        // waterfall region restores monotonicity. Pinned so the regime
        // carve-out in the monotonicity property below stays honest.
        let rule = rule64();
        let n0 = 1e4;
        let p8 = pe_nu_ris(8, 0.4, 0.6, n0, SubstitutionMode::ConsistentSnr, &rule).unwrap();
        let p32 = pe_nu_ris(32, 0.4, 0.6, n0, SubstitutionMode::ConsistentSnr, &rule).unwrap();
        assert!(p8 > 0.25 && p32 > 0.25);
        assert!(p32 > p8, "plateau ordering changed: {p8} vs {p32}");
        assert!(p32 < 0.28);
    }

    #[test]
    fn quadrature_convergence_64_to_128_on_the_working_region() {
        // Doubling the order moves nothing by more than 1e-10 relative
        // wherever the per-term SNR scales clear the rule's edge
        // resolution (N * gamma >= ~5e-3; see the companion test for the
        // documented sub-resolution deviation).
        let r64 = rule64();
        let r128 = QuadratureRule::gauss_legendre_half_pi(128).unwrap();
        for n in [8usize, 16, 32, 64] {
            for snr_db in [-20.0f64, -15.0, -10.0, 0.0, 10.0] {
                let n0 = 10f64.powf(-snr_db / 10.0);
                for mode in [SubstitutionMode::Literal, SubstitutionMode::ConsistentSnr] {
                    let a = pe_fu_ris(n, 0.4, 0.6, n0, mode, &r64).unwrap();
                    let b = pe_fu_ris(n, 0.4, 0.6, n0, mode, &r128).unwrap();
                    assert!(
                        rel_err(a, b.max(f64::MIN_POSITIVE)) < 1e-10,
                        "fu {mode:?} N={n} {snr_db} dB: {a:e} vs {b:e}"
                    );
                    let a = pe_nu_ris(n, 0.4, 0.6, n0, mode, &r64).unwrap();
                    let b = pe_nu_ris(n, 0.4, 0.6, n0, mode, &r128).unwrap();
                    assert!(
                        rel_err(a, b.max(f64::MIN_POSITIVE)) < 1e-10,
                        "nu {mode:?} N={n} {snr_db} dB: {a:e} vs {b:e}"
                    );
                }
            }
        }
    }

    #[test]
    fn quadrature_edge_layer_below_resolution_is_bounded() {
        // At per-term scales under the rule's edge resolution (the deepest
        // acceptance-grid corner: N=8, gamma ~ 5.4e-6) the 64-point rule
        // under-resolves a boundary layer near xi = 0. The 64-to-128
        // deviation there is real and measures ~3e-7 relative; pin both
        // that it exceeds the in-region threshold and that it stays
        // negligible against the factor-2 simulation tolerance.
        let r64 = rule64();
        let r128 = QuadratureRule::gauss_legendre_half_pi(128).unwrap();
        let a = pe_mpsk(8, 5.36e-6, &r64).unwrap();
        let b = pe_mpsk(8, 5.36e-6, &r128).unwrap();
        let rel = rel_err(a, b);
        assert!(rel > 1e-10, "edge layer unexpectedly resolved: {rel:e}");
        assert!(rel < 1e-6, "edge layer error too large: {rel:e}");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn snr_scale() -> impl Strategy<Value = f64> {
            // Log-uniform over the working range.
            (-4.0..1.5f64).prop_map(|e| 10f64.powf(e))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]

            #[test]
            fn bound_ordering_holds_everywhere(
                n in 1usize..257,
                g in snr_scale(),
            ) {
                let rule = QuadratureRule::gauss_legendre_half_pi(64).unwrap();
                let integral = pe_mpsk(n, g, &rule).unwrap();
                let bound = pe_upper_bound(n, g).unwrap();
                prop_assert!(
                    integral <= bound * (1.0 + 1e-12),
                    "N={n} g={g}: {integral} > {bound}"
                );
            }

            #[test]
            fn tail_averages_decrease_strictly_in_n(
                n in 1usize..129,
                g in snr_scale(),
            ) {
                let rule = QuadratureRule::gauss_legendre_half_pi(64).unwrap();
                let a = pe_mpsk(n, g, &rule).unwrap();
                let b = pe_mpsk(2 * n, g, &rule).unwrap();
                prop_assert!(b < a, "pe_mpsk up at N={n}->{}: {a} vs {b}", 2 * n);
                let ua = pe_upper_bound(n, g).unwrap();
                let ub = pe_upper_bound(2 * n, g).unwrap();
                prop_assert!(ub < ua);
            }

            #[test]
            fn fu_ris_decreases_strictly_in_n(
                n in 1usize..129,
                snr_db in -25.0..10.0f64,
                alpha in 0.05..0.45f64,
            ) {
                let rule = QuadratureRule::gauss_legendre_half_pi(64).unwrap();
                let n0 = 10f64.powf(-snr_db / 10.0);
                let (e1, e2) = (alpha, 1.0 - alpha);
                let a = pe_fu_ris(n, e1, e2, n0, SubstitutionMode::ConsistentSnr, &rule).unwrap();
                let b =
                    pe_fu_ris(2 * n, e1, e2, n0, SubstitutionMode::ConsistentSnr, &rule).unwrap();
                prop_assert!(b < a, "N={n} snr {snr_db} alpha {alpha}: {a} vs {b}");
            }

            #[test]
            fn nu_ris_decreases_in_n_clear_of_the_plateau(
                n in 1usize..129,
                snr_db in -25.0..10.0f64,
                alpha in 0.05..0.45f64,
            ) {
                let rule = QuadratureRule::gauss_legendre_half_pi(64).unwrap();
                let n0 = 10f64.powf(-snr_db / 10.0);
                let (e1, e2) = (alpha, 1.0 - alpha);
                let a = pe_nu_ris(n, e1, e2, n0, SubstitutionMode::ConsistentSnr, &rule).unwrap();
                let b =
                    pe_nu_ris(2 * n, e1, e2, n0, SubstitutionMode::ConsistentSnr, &rule).unwrap();
                // The saturation plateau (values near 1/4) is legitimately
                // non-monotone; compare only when both points are clear.
                prop_assume!(a < 0.24 && b < 0.24);
                prop_assert!(b < a, "N={n} snr {snr_db} alpha {alpha}: {a} vs {b}");
            }

            #[test]
            fn fu_ris_monotone_nonincreasing_in_eps2(
                n in 1usize..65,
                snr_db in -20.0..10.0f64,
                e2_lo in 0.1..0.9f64,
                bump in 0.01..0.5f64,
            ) {
                let rule = QuadratureRule::gauss_legendre_half_pi(64).unwrap();
                let n0 = 10f64.powf(-snr_db / 10.0);
                let eps1 = 0.05;
                let a = pe_fu_ris(n, eps1, e2_lo, n0, SubstitutionMode::ConsistentSnr, &rule)
                    .unwrap();
                let b = pe_fu_ris(n, eps1, e2_lo + bump, n0, SubstitutionMode::ConsistentSnr, &rule)
                    .unwrap();
                prop_assert!(b <= a * (1.0 + 1e-12), "eps2 up, ber up: {a} -> {b}");
            }

            #[test]
            fn ris_outputs_stay_in_probability_range(
                n in 1usize..129,
                snr_db in -40.0..10.0f64,
                alpha in 0.05..0.45f64,
                literal in proptest::bool::ANY,
            ) {
                let rule = QuadratureRule::gauss_legendre_half_pi(64).unwrap();
                let n0 = 10f64.powf(-snr_db / 10.0);
                let mode = if literal {
                    SubstitutionMode::Literal
                } else {
                    SubstitutionMode::ConsistentSnr
                };
                let fu = pe_fu_ris(n, alpha, 1.0 - alpha, n0, mode, &rule).unwrap();
                let nu = pe_nu_ris(n, alpha, 1.0 - alpha, n0, mode, &rule).unwrap();
                prop_assert!((0.0..=0.5 + 1e-9).contains(&fu), "fu {fu}");
                prop_assert!((0.0..=0.5 + 1e-9).contains(&nu), "nu {nu}");
            }
        }
    }
}
