//! Shared numerics: the Gaussian tail function, Gauss–Legendre quadrature on
//! [0, pi/2], and an overflow-safe exponential of a ratio.
//!
//! The tail function is computed from a rational-approximation erfc kept
//! in-repo (Boost math's 53-bit tables, as redistributed by statrs) so that
//! analytic results are bit-reproducible across platforms and toolchains.

use crate::{Error, Result};
use std::f64::consts::{FRAC_PI_4, PI};

// ---------------------------------------------------------------------------
// Gaussian Q function
// ---------------------------------------------------------------------------

/// Upper-tail probability of the standard normal, Q(x) = P(Z > x).
///
/// Relative accuracy is at or below 1e-12 wherever the result is a normal
/// f64 (|x| <= 37); for larger x the true value is subnormal and precision
/// is capped by representation, not by the approximation.
///
/// # Example
/// ```
/// let q = ris_noma::special::gaussian_q(0.0).unwrap();
/// assert_eq!(q, 0.5);
/// ```
pub fn gaussian_q(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite {
            name: "x",
            value: x,
        });
    }
    Ok(0.5 * erfc(x / std::f64::consts::SQRT_2))
}

/// Complementary error function, erfc(x) = 1 - erf(x).
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        f64::NAN
    } else if x == f64::INFINITY {
        0.0
    } else if x == f64::NEG_INFINITY {
        2.0
    } else {
        erf_impl(x, true)
    }
}

/// Error function, erf(x) = 2/sqrt(pi) * integral of exp(-t^2) from 0 to x.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        f64::NAN
    } else if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        -1.0
    } else if x == 0.0 {
        0.0
    } else {
        erf_impl(x, false)
    }
}

/// Evaluates a polynomial with coefficients in ascending order by Horner's
/// rule: `coeff[k]` multiplies `z^k`.
fn polynomial(z: f64, coeff: &[f64]) -> f64 {
    let mut sum = match coeff.last() {
        Some(&c) => c,
        None => return 0.0,
    };
    for &c in coeff.iter().rev().skip(1) {
        sum = sum * z + c;
    }
    sum
}

// Numerator/denominator pairs of the rational approximations, one pair per
// interval of z. Tables are the Boost math 53-bit erf coefficients.

/// [1e-10, 0.5], numerator.
const ERF_IMPL_AN: &[f64] = &[
    0.00337916709551257388990745,
    -0.00073695653048167948530905,
    -0.374732337392919607868241,
    0.0817442448733587196071743,
    -0.0421089319936548595203468,
    0.0070165709512095756344528,
    -0.00495091255982435110337458,
    0.000871646599037922480317225,
];

/// [1e-10, 0.5], denominator.
const ERF_IMPL_AD: &[f64] = &[
    1.0,
    -0.218088218087924645390535,
    0.412542972725442099083918,
    -0.0841891147873106755410271,
    0.0655338856400241519690695,
    -0.0120019604454941768171266,
    0.00408165558926174048329689,
    -0.000615900721557769691924509,
];

/// [0.5, 0.75], numerator.
const ERF_IMPL_BN: &[f64] = &[
    -0.0361790390718262471360258,
    0.292251883444882683221149,
    0.281447041797604512774415,
    0.125610208862766947294894,
    0.0274135028268930549240776,
    0.00250839672168065762786937,
];

/// [0.5, 0.75], denominator.
const ERF_IMPL_BD: &[f64] = &[
    1.0,
    1.8545005897903486499845,
    1.43575803037831418074962,
    0.582827658753036572454135,
    0.124810476932949746447682,
    0.0113724176546353285778481,
];

/// [0.75, 1.25], numerator.
const ERF_IMPL_CN: &[f64] = &[
    -0.0397876892611136856954425,
    0.153165212467878293257683,
    0.191260295600936245503129,
    0.10276327061989304213645,
    0.029637090615738836726027,
    0.0046093486780275489468812,
    0.000307607820348680180548455,
];

/// [0.75, 1.25], denominator.
const ERF_IMPL_CD: &[f64] = &[
    1.0,
    1.95520072987627704987886,
    1.64762317199384860109595,
    0.768238607022126250082483,
    0.209793185936509782784315,
    0.0319569316899913392596356,
    0.00213363160895785378615014,
];

/// [1.25, 2.25], numerator.
const ERF_IMPL_DN: &[f64] = &[
    -0.0300838560557949717328341,
    0.0538578829844454508530552,
    0.0726211541651914182692959,
    0.0367628469888049348429018,
    0.00964629015572527529605267,
    0.00133453480075291076745275,
    0.778087599782504251917881e-4,
];

/// [1.25, 2.25], denominator.
const ERF_IMPL_DD: &[f64] = &[
    1.0,
    1.75967098147167528287343,
    1.32883571437961120556307,
    0.552528596508757581287907,
    0.133793056941332861912279,
    0.0179509645176280768640766,
    0.00104712440019937356634038,
    -0.106640381820357337177643e-7,
];

/// [2.25, 3.5], numerator.
const ERF_IMPL_EN: &[f64] = &[
    -0.0117907570137227847827732,
    0.014262132090538809896674,
    0.0202234435902960820020765,
    0.00930668299990432009042239,
    0.00213357802422065994322516,
    0.00025022987386460102395382,
    0.120534912219588189822126e-4,
];

/// [2.25, 3.5], denominator.
const ERF_IMPL_ED: &[f64] = &[
    1.0,
    1.50376225203620482047419,
    0.965397786204462896346934,
    0.339265230476796681555511,
    0.0689740649541569716897427,
    0.00771060262491768307365526,
    0.000371421101531069302990367,
];

/// [3.5, 5.25], numerator.
const ERF_IMPL_FN: &[f64] = &[
    -0.00546954795538729307482955,
    0.00404190278731707110245394,
    0.0054963369553161170521356,
    0.00212616472603945399437862,
    0.000394984014495083900689956,
    0.365565477064442377259271e-4,
    0.135485897109932323253786e-5,
];

/// [3.5, 5.25], denominator.
const ERF_IMPL_FD: &[f64] = &[
    1.0,
    1.21019697773630784832251,
    0.620914668221143886601045,
    0.173038430661142762569515,
    0.0276550813773432047594539,
    0.00240625974424309709745382,
    0.891811817251336577241006e-4,
    -0.465528836283382684461025e-11,
];

/// [5.25, 8], numerator.
const ERF_IMPL_GN: &[f64] = &[
    -0.00270722535905778347999196,
    0.0013187563425029400461378,
    0.00119925933261002333923989,
    0.00027849619811344664248235,
    0.267822988218331849989363e-4,
    0.923043672315028197865066e-6,
];

/// [5.25, 8], denominator.
const ERF_IMPL_GD: &[f64] = &[
    1.0,
    0.814632808543141591118279,
    0.268901665856299542168425,
    0.0449877216103041118694989,
    0.00381759663320248459168994,
    0.000131571897888596914350697,
    0.404815359675764138445257e-11,
];

/// [8, 11.5], numerator.
const ERF_IMPL_HN: &[f64] = &[
    -0.00109946720691742196814323,
    0.000406425442750422675169153,
    0.000274499489416900707787024,
    0.465293770646659383436343e-4,
    0.320955425395767463401993e-5,
    0.778286018145020892261936e-7,
];

/// [8, 11.5], denominator.
const ERF_IMPL_HD: &[f64] = &[
    1.0,
    0.588173710611846046373373,
    0.139363331289409746077541,
    0.0166329340417083678763028,
    0.00100023921310234908642639,
    0.24254837521587225125068e-4,
];

/// [11.5, 17], numerator.
const ERF_IMPL_IN: &[f64] = &[
    -0.00056907993601094962855594,
    0.000169498540373762264416984,
    0.518472354581100890120501e-4,
    0.382819312231928859704678e-5,
    0.824989931281894431781794e-7,
];

/// [11.5, 17], denominator.
const ERF_IMPL_ID: &[f64] = &[
    1.0,
    0.339637250051139347430323,
    0.043472647870310663055044,
    0.00248549335224637114641629,
    0.535633305337152900549536e-4,
    -0.117490944405459578783846e-12,
];

/// [17, 24], numerator.
const ERF_IMPL_JN: &[f64] = &[
    -0.000241313599483991337479091,
    0.574224975202501512365975e-4,
    0.115998962927383778460557e-4,
    0.581762134402593739370875e-6,
    0.853971555085673614607418e-8,
];

/// [17, 24], denominator.
const ERF_IMPL_JD: &[f64] = &[
    1.0,
    0.233044138299687841018015,
    0.0204186940546440312625597,
    0.000797185647564398289151125,
    0.117019281670172327758019e-4,
];

/// [24, 38], numerator.
const ERF_IMPL_KN: &[f64] = &[
    -0.000146674699277760365803642,
    0.162666552112280519955647e-4,
    0.269116248509165239294897e-5,
    0.979584479468091935086972e-7,
    0.101994647625723465722285e-8,
];

/// [24, 38], denominator.
const ERF_IMPL_KD: &[f64] = &[
    1.0,
    0.165907812944847226546036,
    0.0103361716191505884359634,
    0.000286593026373868366935721,
    0.298401570840900340874568e-5,
];

/// [38, 60], numerator.
const ERF_IMPL_LN: &[f64] = &[
    -0.583905797629771786720406e-4,
    0.412510325105496173512992e-5,
    0.431790922420250949096906e-6,
    0.993365155590013193345569e-8,
    0.653480510020104699270084e-10,
];

/// [38, 60], denominator.
const ERF_IMPL_LD: &[f64] = &[
    1.0,
    0.105077086072039915406159,
    0.00414278428675475620830226,
    0.726338754644523769144108e-4,
    0.477818471047398785369849e-6,
];

/// [60, 85], numerator.
const ERF_IMPL_MN: &[f64] = &[
    -0.196457797609229579459841e-4,
    0.157243887666800692441195e-5,
    0.543902511192700878690335e-7,
    0.317472492369117710852685e-9,
];

/// [60, 85], denominator.
const ERF_IMPL_MD: &[f64] = &[
    1.0,
    0.052803989240957632204885,
    0.000926876069151753290378112,
    0.541011723226630257077328e-5,
    0.535093845803642394908747e-15,
];

/// [85, 110], numerator.
const ERF_IMPL_NN: &[f64] = &[
    -0.789224703978722689089794e-5,
    0.622088451660986955124162e-6,
    0.145728445676882396797184e-7,
    0.603715505542715364529243e-10,
];

/// [85, 110], denominator.
const ERF_IMPL_ND: &[f64] = &[
    1.0,
    0.0375328846356293715248719,
    0.000467919535974625308126054,
    0.193847039275845656900547e-5,
];

/// Shared erf/erfc kernel: `inv` selects erfc.
fn erf_impl(z: f64, inv: bool) -> f64 {
    if z < 0.0 {
        if !inv {
            return -erf_impl(-z, false);
        }
        if z < -0.5 {
            return 2.0 - erf_impl(-z, true);
        }
        return 1.0 + erf_impl(-z, false);
    }

    // Each interval below evaluates g*(b + r): b is the leading constant
    // stored at single precision (the rational part r is the double
    // precision correction against exactly that value, hence the f32
    // round trips).
    let result = if z < 0.5 {
        if z < 1e-10 {
            z * 1.125 + z * 0.003379167095512573896158903121545171688
        } else {
            z * 1.125 + z * polynomial(z, ERF_IMPL_AN) / polynomial(z, ERF_IMPL_AD)
        }
    } else if z < 110.0 {
        let (r, b) = if z < 0.75 {
            (
                polynomial(z - 0.5, ERF_IMPL_BN) / polynomial(z - 0.5, ERF_IMPL_BD),
                0.3440242112f32 as f64,
            )
        } else if z < 1.25 {
            (
                polynomial(z - 0.75, ERF_IMPL_CN) / polynomial(z - 0.75, ERF_IMPL_CD),
                0.419990927f32 as f64,
            )
        } else if z < 2.25 {
            (
                polynomial(z - 1.25, ERF_IMPL_DN) / polynomial(z - 1.25, ERF_IMPL_DD),
                0.4898625016f32 as f64,
            )
        } else if z < 3.5 {
            (
                polynomial(z - 2.25, ERF_IMPL_EN) / polynomial(z - 2.25, ERF_IMPL_ED),
                0.5317370892f32 as f64,
            )
        } else if z < 5.25 {
            (
                polynomial(z - 3.5, ERF_IMPL_FN) / polynomial(z - 3.5, ERF_IMPL_FD),
                0.5489973426f32 as f64,
            )
        } else if z < 8.0 {
            (
                polynomial(z - 5.25, ERF_IMPL_GN) / polynomial(z - 5.25, ERF_IMPL_GD),
                0.5571740866f32 as f64,
            )
        } else if z < 11.5 {
            (
                polynomial(z - 8.0, ERF_IMPL_HN) / polynomial(z - 8.0, ERF_IMPL_HD),
                0.5609807968f32 as f64,
            )
        } else if z < 17.0 {
            (
                polynomial(z - 11.5, ERF_IMPL_IN) / polynomial(z - 11.5, ERF_IMPL_ID),
                0.5626493692f32 as f64,
            )
        } else if z < 24.0 {
            (
                polynomial(z - 17.0, ERF_IMPL_JN) / polynomial(z - 17.0, ERF_IMPL_JD),
                0.5634598136f32 as f64,
            )
        } else if z < 38.0 {
            (
                polynomial(z - 24.0, ERF_IMPL_KN) / polynomial(z - 24.0, ERF_IMPL_KD),
                0.5638477802f32 as f64,
            )
        } else if z < 60.0 {
            (
                polynomial(z - 38.0, ERF_IMPL_LN) / polynomial(z - 38.0, ERF_IMPL_LD),
                0.5640528202f32 as f64,
            )
        } else if z < 85.0 {
            (
                polynomial(z - 60.0, ERF_IMPL_MN) / polynomial(z - 60.0, ERF_IMPL_MD),
                0.5641309023f32 as f64,
            )
        } else {
            (
                polynomial(z - 85.0, ERF_IMPL_NN) / polynomial(z - 85.0, ERF_IMPL_ND),
                0.5641584396f32 as f64,
            )
        };
        let g = (-z * z).exp() / z;
        g * b + g * r
    } else {
        0.0
    };

    if inv && z >= 0.5 {
        result
    } else if z >= 0.5 || inv {
        1.0 - result
    } else {
        result
    }
}

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature on [0, pi/2]
// ---------------------------------------------------------------------------

/// Fixed-order Gauss–Legendre rule mapped onto [0, pi/2].
///
/// Nodes are strictly increasing and lie in the open interval, so integrands
/// that are singular at an endpoint (the Craig-form integrands blow up at
/// xi = 0 before their ratio is taken) are never evaluated there.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Builds the order-point rule on [0, pi/2] by Newton iteration on the
    /// Legendre polynomial. Orders below 2 are rejected.
    pub fn gauss_legendre_half_pi(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::QuadratureOrder { order });
        }
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        // Roots come in +/- pairs on [-1, 1]; solve the upper half.
        for i in 0..order.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // Legendre recurrence: evaluates P_n and P_{n-1} at x.
                let mut p0 = 1.0;
                let mut p1 = x;
                for k in 2..=order {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                    // One polishing pass after convergence.
                    let mut q0 = 1.0;
                    let mut q1 = x;
                    for k in 2..=order {
                        let kf = k as f64;
                        let q2 = ((2.0 * kf - 1.0) * x * q1 - (kf - 1.0) * q0) / kf;
                        q0 = q1;
                        q1 = q2;
                    }
                    dp = n * (x * q1 - q0) / (x * x - 1.0);
                    x -= q1 / dp;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // Map [-1, 1] -> [0, pi/2]: node = (x + 1) * pi/4.
            nodes[order - 1 - i] = (x + 1.0) * FRAC_PI_4;
            weights[order - 1 - i] = w * FRAC_PI_4;
            nodes[i] = (1.0 - x) * FRAC_PI_4;
            weights[i] = w * FRAC_PI_4;
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weighted sum of `f` over the rule: approximates the integral of `f`
    /// on [0, pi/2].
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

// ---------------------------------------------------------------------------
// Overflow-safe exponential of a ratio
// ---------------------------------------------------------------------------

/// Computes exp(numer / denom) for denom > 0, flushing to exactly 0 once the
/// ratio is below the f64 exp underflow threshold (~ -745) instead of
/// letting the division round through subnormals.
pub fn stable_exp_ratio(numer: f64, denom: f64) -> Result<f64> {
    if !numer.is_finite() {
        return Err(Error::NonFinite {
            name: "numer",
            value: numer,
        });
    }
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::OutOfRange {
            name: "denom",
            value: denom,
            constraint: "denom > 0 and finite",
        });
    }
    let ratio = numer / denom;
    if ratio < -745.0 {
        return Ok(0.0);
    }
    Ok(ratio.exp())
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
