//! Deterministic Monte Carlo engine for the two-user downlink, plus the
//! experiment drivers built on it: SNR sweeps, the no-surface baseline,
//! horizontal-gain measurement between curves, and the element-allocation
//! search.
//!
//! # Determinism contract
//!
//! The trial space of one grid point is cut into fixed chunks of 1024
//! trials. Chunk k of point i draws from a ChaCha8 stream keyed as
//! `seed ^ engine_tag` with stream id `(i << 40) | k`, so a chunk's bits
//! depend only on the config, never on scheduling. Chunks aggregate by
//! pure counting and the stopping rule is evaluated at fixed round
//! boundaries (64 chunks), so the set of chunks run is itself a pure
//! function of the config. Worker count therefore cannot change any
//! output bit; the `parallel` feature only changes wall-clock time.

use crate::analytic::{pe_fu_ris, pe_nu_ris, SubstitutionMode};
use crate::channel::{draw_tap, CascadeLink};
use crate::noma::{detect_fu, detect_nu_sic, superpose, PowerSplit, UserBits};
use crate::special::QuadratureRule;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::FRAC_1_SQRT_2;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Trials per RNG chunk: the unit of deterministic work distribution.
const CHUNK_TRIALS: u64 = 1024;
/// Chunks between stopping-rule evaluations.
const CHUNKS_PER_ROUND: u64 = 64;
/// Points that stop on the trial budget with fewer errors than this are
/// flagged low-confidence.
const LOW_CONFIDENCE_ERRORS: u64 = 50;

// Domain-separation tags (ASCII) mixed into the seed so the surface engine
// and the baselines draw decorrelated streams under one experiment seed.
const TAG_RIS: u64 = 0x5249_532d_4e4f_4d41; // "RIS-NOMA"
const TAG_BASE_RAYLEIGH: u64 = 0x4241_5345_2d52_4159; // "BASE-RAY"
const TAG_BASE_AWGN: u64 = 0x4241_5345_2d41_5747; // "BASE-AWG"

/// Full description of one simulation experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Total element count; always `n_nu + n_fu`.
    pub n_total: usize,
    /// Elements serving the near user.
    pub n_nu: usize,
    /// Elements serving the far user.
    pub n_fu: usize,
    /// Near-user power fraction, in (0, 0.5).
    pub alpha: f64,
    /// Symbol energy.
    pub es: f64,
    /// Es/N0 grid in dB, strictly increasing.
    pub snr_grid_db: Vec<f64>,
    /// Near-user channel power in dB (on the surface-to-user hop).
    pub nu_var_db: f64,
    /// Far-user channel power in dB.
    pub fu_var_db: f64,
    pub seed: u64,
    /// Per-user error target before a point may stop early.
    pub min_errors: u64,
    /// Trial budget per point (rounded up to whole chunks).
    pub max_trials: u64,
    /// Diagnostic switch: skip the noise entirely.
    pub noiseless: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_total: 16,
            n_nu: 8,
            n_fu: 8,
            alpha: 0.4,
            es: 1.0,
            snr_grid_db: (-20..=5).map(|s| (2 * s) as f64).collect(),
            nu_var_db: 0.0,
            fu_var_db: -3.0,
            seed: 42,
            min_errors: 200,
            max_trials: 10_000_000,
            noiseless: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_nu == 0 || self.n_fu == 0 {
            return Err(Error::Config(format!(
                "each user needs at least one element (n_nu = {}, n_fu = {})",
                self.n_nu, self.n_fu
            )));
        }
        if self.n_nu + self.n_fu != self.n_total {
            return Err(Error::Config(format!(
                "n_nu + n_fu must equal n_total ({} + {} != {})",
                self.n_nu, self.n_fu, self.n_total
            )));
        }
        PowerSplit::new(self.alpha, self.es)?;
        if self.snr_grid_db.is_empty() {
            return Err(Error::Config("snr_grid_db is empty".into()));
        }
        for pair in self.snr_grid_db.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::Config(format!(
                    "snr_grid_db must be strictly increasing ({} then {})",
                    pair[0], pair[1]
                )));
            }
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr_grid_db entries must be finite".into()));
        }
        for (name, v) in [("nu_var_db", self.nu_var_db), ("fu_var_db", self.fu_var_db)] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        if self.min_errors < 50 {
            return Err(Error::Config(format!(
                "min_errors must be at least 50, got {}",
                self.min_errors
            )));
        }
        if self.max_trials < 10_000 {
            return Err(Error::Config(format!(
                "max_trials must be at least 10000, got {}",
                self.max_trials
            )));
        }
        Ok(())
    }

    fn split(&self) -> Result<PowerSplit> {
        PowerSplit::new(self.alpha, self.es)
    }
}

/// Measured error rates at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub nu_bit_errors: u64,
    pub fu_bit_errors: u64,
    /// `nu_bit_errors / (2 * trials)` exactly (two bits per trial).
    pub nu_ber: f64,
    /// `fu_bit_errors / trials` exactly.
    pub fu_ber: f64,
    /// 95% normal-approximation half width on `nu_ber`.
    pub ci95_nu: f64,
    pub ci95_fu: f64,
    /// Set when the point stopped on the trial budget with fewer than 50
    /// errors for that user.
    pub nu_low_confidence: bool,
    pub fu_low_confidence: bool,
}

/// One BER-vs-SNR curve; the label names the curve in range errors and
/// output files.
#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub label: String,
    pub points: Vec<BerPoint>,
}

/// Selects which user's series of a curve an operation reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum User {
    Near,
    Far,
}

/// Channel model of the no-surface baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineChannel {
    /// One Rayleigh tap per user carrying that user's channel power.
    Rayleigh,
    /// Unit gain, noise only (the fading-disabled diagnostic; per-user
    /// channel powers are ignored).
    Awgn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Engine {
    Ris,
    Baseline(BaselineChannel),
}

impl Engine {
    fn tag(self) -> u64 {
        match self {
            Engine::Ris => TAG_RIS,
            Engine::Baseline(BaselineChannel::Rayleigh) => TAG_BASE_RAYLEIGH,
            Engine::Baseline(BaselineChannel::Awgn) => TAG_BASE_AWGN,
        }
    }
}

/// Per-point precomputed state shared by every chunk.
struct PointCtx {
    split: PowerSplit,
    n_nu: usize,
    n_fu: usize,
    /// Rayleigh scale of the base-station hop (unit power).
    h_scale: f64,
    /// Rayleigh scales of the two surface-to-user hops (carry the per-user
    /// channel power), also the single-tap scales of the baseline.
    nu_g_scale: f64,
    fu_g_scale: f64,
    /// Per-dimension noise deviation sqrt(N0/2); exactly 0 in noiseless
    /// mode, which also skips the noise draws.
    noise_sigma: f64,
}

impl PointCtx {
    fn new(cfg: &SimConfig, snr_db: f64) -> Result<Self> {
        let split = cfg.split()?;
        let n0 = cfg.es / 10f64.powf(snr_db / 10.0);
        if !(n0 > 0.0) || !n0.is_finite() {
            return Err(Error::Config(format!(
                "snr {snr_db} dB gives unusable noise density {n0}"
            )));
        }
        Ok(Self {
            split,
            n_nu: cfg.n_nu,
            n_fu: cfg.n_fu,
            h_scale: FRAC_1_SQRT_2,
            nu_g_scale: 10f64.powf(cfg.nu_var_db / 20.0) * FRAC_1_SQRT_2,
            fu_g_scale: 10f64.powf(cfg.fu_var_db / 20.0) * FRAC_1_SQRT_2,
            noise_sigma: if cfg.noiseless {
                0.0
            } else {
                (n0 / 2.0).sqrt()
            },
        })
    }

    fn draw_noise(&self, rng: &mut ChaCha8Rng) -> Complex64 {
        if self.noise_sigma == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(self.noise_sigma * re, self.noise_sigma * im)
    }
}

fn chunk_rng(seed: u64, tag: u64, point_index: usize, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ tag);
    rng.set_stream(((point_index as u64) << 40) | chunk);
    rng
}

/// Runs 1024 trials of the surface link. Per-trial draw order is fixed:
/// near cascade, far cascade, the three payload bits, then (unless
/// noiseless) the two users' noise samples.
fn ris_chunk(rng: &mut ChaCha8Rng, ctx: &PointCtx) -> Result<(u64, u64)> {
    let mut nu_link = CascadeLink::draw(ctx.n_nu, ctx.h_scale, ctx.nu_g_scale, rng)?;
    let mut fu_link = CascadeLink::draw(ctx.n_fu, ctx.h_scale, ctx.fu_g_scale, rng)?;
    let mut nu_errs = 0u64;
    let mut fu_errs = 0u64;
    for _ in 0..CHUNK_TRIALS {
        nu_link.redraw(ctx.h_scale, ctx.nu_g_scale, rng)?;
        fu_link.redraw(ctx.h_scale, ctx.fu_g_scale, rng)?;
        nu_link.align_phases();
        fu_link.align_phases();
        // Real and positive after alignment.
        let a_nu = nu_link.cascade_gain().re;
        let a_fu = fu_link.cascade_gain().re;
        let bits = UserBits {
            nu_bits: [rng.random(), rng.random()],
            fu_bit: rng.random(),
        };
        let x = superpose(bits, &ctx.split);
        let r_nu = a_nu * x + ctx.draw_noise(rng);
        let r_fu = a_fu * x + ctx.draw_noise(rng);
        if detect_fu(r_fu) != bits.fu_bit {
            fu_errs += 1;
        }
        let (nu_hat, _) = detect_nu_sic(r_nu, a_nu, &ctx.split)?;
        nu_errs += u64::from(nu_hat[0] != bits.nu_bits[0]);
        nu_errs += u64::from(nu_hat[1] != bits.nu_bits[1]);
    }
    Ok((nu_errs, fu_errs))
}

/// Runs 1024 trials of the no-surface baseline with coherent reception:
/// the receiver removes the tap phase, leaving the envelope as a real
/// gain (the noise statistics are rotation-invariant).
fn baseline_chunk(
    rng: &mut ChaCha8Rng,
    ctx: &PointCtx,
    channel: BaselineChannel,
) -> Result<(u64, u64)> {
    let mut nu_errs = 0u64;
    let mut fu_errs = 0u64;
    for _ in 0..CHUNK_TRIALS {
        let (g_nu, g_fu) = match channel {
            BaselineChannel::Rayleigh => (
                draw_tap(ctx.nu_g_scale, rng)?.amplitude,
                draw_tap(ctx.fu_g_scale, rng)?.amplitude,
            ),
            BaselineChannel::Awgn => (1.0, 1.0),
        };
        let bits = UserBits {
            nu_bits: [rng.random(), rng.random()],
            fu_bit: rng.random(),
        };
        let x = superpose(bits, &ctx.split);
        let r_nu = g_nu * x + ctx.draw_noise(rng);
        let r_fu = g_fu * x + ctx.draw_noise(rng);
        if detect_fu(r_fu) != bits.fu_bit {
            fu_errs += 1;
        }
        let (nu_hat, _) = detect_nu_sic(r_nu, g_nu, &ctx.split)?;
        nu_errs += u64::from(nu_hat[0] != bits.nu_bits[0]);
        nu_errs += u64::from(nu_hat[1] != bits.nu_bits[1]);
    }
    Ok((nu_errs, fu_errs))
}

fn run_chunk(
    engine: Engine,
    rng: &mut ChaCha8Rng,
    ctx: &PointCtx,
) -> Result<(u64, u64)> {
    match engine {
        Engine::Ris => ris_chunk(rng, ctx),
        Engine::Baseline(channel) => baseline_chunk(rng, ctx, channel),
    }
}

#[cfg(feature = "parallel")]
fn run_round(
    cfg: &SimConfig,
    ctx: &PointCtx,
    engine: Engine,
    point_index: usize,
    chunks: std::ops::Range<u64>,
) -> Result<(u64, u64)> {
    chunks
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(cfg.seed, engine.tag(), point_index, k);
            run_chunk(engine, &mut rng, ctx)
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))
}

#[cfg(not(feature = "parallel"))]
fn run_round(
    cfg: &SimConfig,
    ctx: &PointCtx,
    engine: Engine,
    point_index: usize,
    chunks: std::ops::Range<u64>,
) -> Result<(u64, u64)> {
    run_round_sequential(cfg, ctx, engine, point_index, chunks)
}

fn run_round_sequential(
    cfg: &SimConfig,
    ctx: &PointCtx,
    engine: Engine,
    point_index: usize,
    chunks: std::ops::Range<u64>,
) -> Result<(u64, u64)> {
    let mut acc = (0u64, 0u64);
    for k in chunks {
        let mut rng = chunk_rng(cfg.seed, engine.tag(), point_index, k);
        let out = run_chunk(engine, &mut rng, ctx)?;
        acc.0 += out.0;
        acc.1 += out.1;
    }
    Ok(acc)
}

fn finish_point(
    snr_db: f64,
    trials: u64,
    nu_errs: u64,
    fu_errs: u64,
    hit_budget: bool,
) -> BerPoint {
    let nu_bits = 2 * trials;
    let fu_bits = trials;
    let nu_ber = nu_errs as f64 / nu_bits as f64;
    let fu_ber = fu_errs as f64 / fu_bits as f64;
    let ci = |p: f64, bits: u64| 1.96 * (p * (1.0 - p) / bits as f64).sqrt();
    BerPoint {
        snr_db,
        trials,
        nu_bit_errors: nu_errs,
        fu_bit_errors: fu_errs,
        nu_ber,
        fu_ber,
        ci95_nu: ci(nu_ber, nu_bits),
        ci95_fu: ci(fu_ber, fu_bits),
        nu_low_confidence: hit_budget && nu_errs < LOW_CONFIDENCE_ERRORS,
        fu_low_confidence: hit_budget && fu_errs < LOW_CONFIDENCE_ERRORS,
    }
}

fn drive_point(
    cfg: &SimConfig,
    engine: Engine,
    point_index: usize,
    sequential: bool,
) -> Result<BerPoint> {
    let snr_db = cfg.snr_grid_db[point_index];
    let ctx = PointCtx::new(cfg, snr_db)?;
    let chunk_cap = cfg.max_trials.div_ceil(CHUNK_TRIALS);
    let mut chunks_done = 0u64;
    let mut nu_errs = 0u64;
    let mut fu_errs = 0u64;
    while chunks_done < chunk_cap {
        let round = CHUNKS_PER_ROUND.min(chunk_cap - chunks_done);
        let range = chunks_done..chunks_done + round;
        let (nu, fu) = if sequential {
            run_round_sequential(cfg, &ctx, engine, point_index, range)?
        } else {
            run_round(cfg, &ctx, engine, point_index, range)?
        };
        nu_errs += nu;
        fu_errs += fu;
        chunks_done += round;
        if nu_errs >= cfg.min_errors && fu_errs >= cfg.min_errors {
            break;
        }
    }
    Ok(finish_point(
        snr_db,
        chunks_done * CHUNK_TRIALS,
        nu_errs,
        fu_errs,
        chunks_done == chunk_cap,
    ))
}

fn grid_index(cfg: &SimConfig, snr_db: f64) -> Result<usize> {
    cfg.snr_grid_db
        .iter()
        .position(|&s| s == snr_db)
        .ok_or_else(|| {
            Error::Config(format!(
                "snr {snr_db} dB is not on the configured grid"
            ))
        })
}

/// Simulates one grid point of the surface-assisted link. Stops once both
/// users reach `min_errors` (checked at round boundaries) or the trial
/// budget is spent; the budget is rounded up to whole 1024-trial chunks.
pub fn run_point(cfg: &SimConfig, snr_db: f64) -> Result<BerPoint> {
    cfg.validate()?;
    drive_point(cfg, Engine::Ris, grid_index(cfg, snr_db)?, false)
}

/// `run_point` forced onto one thread. Bit-identical to the parallel path
/// by the determinism contract; exists for the comparison bench and as
/// the only path when the `parallel` feature is off.
pub fn run_point_sequential(cfg: &SimConfig, snr_db: f64) -> Result<BerPoint> {
    cfg.validate()?;
    drive_point(cfg, Engine::Ris, grid_index(cfg, snr_db)?, true)
}

/// Simulates the whole grid of the surface-assisted link.
pub fn run_sweep(cfg: &SimConfig) -> Result<BerCurve> {
    cfg.validate()?;
    let points = (0..cfg.snr_grid_db.len())
        .map(|i| drive_point(cfg, Engine::Ris, i, false))
        .collect::<Result<Vec<_>>>()?;
    Ok(BerCurve {
        label: format!(
            "ris n_nu={} n_fu={} alpha={}",
            cfg.n_nu, cfg.n_fu, cfg.alpha
        ),
        points,
    })
}

/// Simulates the no-surface baseline over the same grid: the identical
/// transceiver behind either one Rayleigh tap per user (at that user's
/// channel power) or a unit AWGN gain. Element counts are ignored.
pub fn run_conventional_baseline(
    cfg: &SimConfig,
    channel: BaselineChannel,
) -> Result<BerCurve> {
    cfg.validate()?;
    let engine = Engine::Baseline(channel);
    let points = (0..cfg.snr_grid_db.len())
        .map(|i| drive_point(cfg, engine, i, false))
        .collect::<Result<Vec<_>>>()?;
    let label = match channel {
        BaselineChannel::Rayleigh => format!("conventional rayleigh alpha={}", cfg.alpha),
        BaselineChannel::Awgn => format!("conventional awgn alpha={}", cfg.alpha),
    };
    Ok(BerCurve { label, points })
}

fn snr_at_target(curve: &BerCurve, user: User, target_ber: f64) -> Result<f64> {
    let series: Vec<(f64, f64)> = curve
        .points
        .iter()
        .map(|p| {
            (
                p.snr_db,
                match user {
                    User::Near => p.nu_ber,
                    User::Far => p.fu_ber,
                },
            )
        })
        .collect();
    for w in series.windows(2) {
        let (s1, b1) = w[0];
        let (s2, b2) = w[1];
        // Zero estimates carry no log-scale information; they cannot
        // bracket.
        if b1 <= 0.0 || b2 <= 0.0 {
            continue;
        }
        if (b1 - target_ber) * (b2 - target_ber) <= 0.0 {
            if b1 == b2 {
                return Ok(s1);
            }
            let t = (target_ber.log10() - b1.log10()) / (b2.log10() - b1.log10());
            return Ok(s1 + t * (s2 - s1));
        }
    }
    Err(Error::TargetNotBracketed {
        curve: curve.label.clone(),
        target: target_ber,
    })
}

/// Horizontal distance between two curves at a target error rate for one
/// user: interpolates each curve's SNR at the target on a log-BER scale
/// and returns `snr_b - snr_a` in dB. Positive means curve `a` reaches
/// the target at lower SNR (outperforms `b`).
pub fn gain_at_ber(
    curve_a: &BerCurve,
    curve_b: &BerCurve,
    user: User,
    target_ber: f64,
) -> Result<f64> {
    if !(target_ber > 0.0 && target_ber < 1.0) {
        return Err(Error::OutOfRange {
            name: "target_ber",
            value: target_ber,
            constraint: "0 < target_ber < 1",
        });
    }
    Ok(snr_at_target(curve_b, user, target_ber)? - snr_at_target(curve_a, user, target_ber)?)
}

/// Evaluates both users' analytic error rates for a config at one SNR.
///
/// Per-user channel power enters as an energy scale: a cascade whose
/// user-side hop carries power kappa^2 is distributed as kappa times the
/// unit cascade, so both symbol energies are scaled by kappa^2 before the
/// unit-cascade expressions are applied. Every analytic consumer (CLI,
/// allocation search, tests) goes through here so the scaling stays in
/// one place.
pub fn analytic_ber(
    cfg: &SimConfig,
    snr_db: f64,
    mode: SubstitutionMode,
    quad: &QuadratureRule,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    let split = cfg.split()?;
    let n0 = cfg.es / 10f64.powf(snr_db / 10.0);
    let kappa_nu_sq = 10f64.powf(cfg.nu_var_db / 10.0);
    let kappa_fu_sq = 10f64.powf(cfg.fu_var_db / 10.0);
    let nu = pe_nu_ris(
        cfg.n_nu,
        kappa_nu_sq * split.eps1(),
        kappa_nu_sq * split.eps2(),
        n0,
        mode,
        quad,
    )?;
    let fu = pe_fu_ris(
        cfg.n_fu,
        kappa_fu_sq * split.eps1(),
        kappa_fu_sq * split.eps2(),
        n0,
        mode,
        quad,
    )?;
    Ok((nu, fu))
}

/// Searches every split of `n_total` elements for the one that best
/// equalizes the two users' analytic error rates at the probe SNR
/// (smallest |log10 nu_ber - log10 fu_ber|). Ties break toward more
/// far-user elements. Splits whose error rates underflow to zero carry no
/// gap information and are skipped; if every split underflows the probe
/// SNR is too high to discriminate and an error says so.
pub fn equalize_allocation(cfg: &SimConfig, snr_db: f64) -> Result<(usize, usize)> {
    if cfg.n_total < 2 {
        return Err(Error::Config(format!(
            "allocation needs n_total >= 2, got {}",
            cfg.n_total
        )));
    }
    // Validate the shared fields on a known-good split; the search then
    // revalidates nothing per candidate.
    let mut probe = cfg.clone();
    probe.n_nu = 1;
    probe.n_fu = cfg.n_total - 1;
    probe.validate()?;
    let quad = QuadratureRule::gauss_legendre_half_pi(64)?;
    let mut best: Option<(f64, usize)> = None;
    for n_fu in 1..cfg.n_total {
        probe.n_nu = cfg.n_total - n_fu;
        probe.n_fu = n_fu;
        let (nu, fu) = analytic_ber(&probe, snr_db, SubstitutionMode::ConsistentSnr, &quad)?;
        if nu <= 0.0 || fu <= 0.0 {
            continue;
        }
        let gap = (nu.log10() - fu.log10()).abs();
        // `<=` keeps the later (larger n_fu) candidate on exact ties.
        if best.map_or(true, |(g, _)| gap <= g) {
            best = Some((gap, n_fu));
        }
    }
    match best {
        Some((_, n_fu)) => Ok((cfg.n_total - n_fu, n_fu)),
        None => Err(Error::DegenerateAllocation { snr_db }),
    }
}
