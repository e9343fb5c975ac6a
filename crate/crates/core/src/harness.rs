//! Monte Carlo link harness: trial orchestration, BER points with
//! confidence intervals, and the guard/concentration sweeps.
//!
//! Determinism contract: every trial draws from a ChaCha stream keyed by
//! `(master_seed, snr_index, trial_index)` in a fixed order (info bits,
//! co-channel QPSK, channel gains, timing offset, noise). Results are
//! therefore independent of the worker count, and sweep variants that
//! reuse the same keys see common random numbers.

use crate::channel::{add_awgn, apply_channel, awgn_for_snr, ChannelError, ChannelSpec};
use crate::config::CheckedConfig;
use crate::fastpath::{FastPathError, FdProfile};
use crate::ofdm::{assemble_symbol, modulate_message, qpsk_symbols, BandPlan, OfdmError};
use crate::precoder::{
    coded_from_input, generate_frame, resolve_fdss, PrecodeError, WusSymbol,
};
use crate::receiver::{
    draw_timing_offset, offset_to_adc_samples, ReceiverChain, ReceiverError,
};
use crate::scenario::{CheckedScenario, Scenario, ScenarioError};
use crate::spreading::Spreading;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Precode(#[from] PrecodeError),
    #[error(transparent)]
    FastPath(#[from] FastPathError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Ofdm(#[from] OfdmError),
    #[error(transparent)]
    Receiver(#[from] ReceiverError),
    #[error("at least one SNR point is required")]
    NoSnrPoints,
    #[error("at least one trial is required")]
    NoTrials,
}

/// 95% Wilson score interval for `errors` successes out of `n`.
pub fn wilson_interval(errors: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054_f64;
    let nf = n as f64;
    let p = errors as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    // Rounding in the square root can push a degenerate bound (0 or n
    // errors) past the point estimate by an ulp; clamp so the interval
    // always brackets it.
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// One simulated SNR point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub trials: usize,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BerReport {
    pub fingerprint: String,
    pub master_seed: u64,
    pub points: Vec<BerPoint>,
}

/// Per-symbol waveform generator, fast closed form when the overlay is
/// common to all bits, the general chain otherwise.
enum Generator {
    Fast(FdProfile),
    Main { w: Vec<Complex64>, spreading: Spreading },
}

impl Generator {
    fn build(cs: &CheckedScenario, phi: f64) -> Result<Self, HarnessError> {
        let cc = cs.cc();
        let resolved = resolve_fdss(&cs.fdss, cc)?;
        match cs.spreading.build(cc.n_seg(), cc.n_bit, phi).map_err(PrecodeError::from)? {
            Spreading::Common(common) => {
                Ok(Generator::Fast(FdProfile::new(cc, &resolved.w, &common)))
            }
            spreading @ Spreading::PerBit(_) => {
                Ok(Generator::Main { w: resolved.w, spreading })
            }
        }
    }

    fn generate(
        &self,
        bits: &[bool],
        cc: &CheckedConfig,
    ) -> Result<WusSymbol, HarnessError> {
        let coded = coded_from_input(bits, cc)?;
        match self {
            Generator::Fast(profile) => Ok(profile.generate(&coded)?),
            Generator::Main { w, spreading } => {
                Ok(generate_frame(&coded, cc, w, spreading)?)
            }
        }
    }
}

/// Precomputed state shared by all trials of one scenario.
pub struct ScenarioRuntime {
    cc: CheckedConfig,
    plan: BandPlan,
    chain: ReceiverChain,
    channel: ChannelSpec,
    generators: Vec<Generator>,
    n_data: usize,
    symbols_per_trial: usize,
    tau_err: f64,
    expected_channel_energy: f64,
    fingerprint: String,
}

impl ScenarioRuntime {
    pub fn new(cs: &CheckedScenario) -> Result<Self, HarnessError> {
        let cc = cs.cc().clone();
        let resolved = resolve_fdss(&cs.fdss, &cc)?;
        let phi = resolved.phi_override.unwrap_or(cc.phi);
        let mut generators = vec![Generator::build(cs, phi)?];
        if cc.alternate_phi_sign && phi != 0.0 {
            generators.push(Generator::build(cs, -phi)?);
        }
        let plan = cs.band_plan();
        let expected_channel_energy = match cs.channel {
            ChannelSpec::Awgn | ChannelSpec::Flat => 1.0,
            ChannelSpec::Tdlc { delay_scaling } => {
                crate::channel::tdlc_profile(delay_scaling, cc.sample_rate())?.total_energy()
            }
        };
        Ok(ScenarioRuntime {
            n_data: plan.data_indices().len(),
            chain: cs.receiver_chain(),
            channel: cs.channel.clone(),
            generators,
            symbols_per_trial: cs.symbols_per_trial,
            tau_err: cs.receiver.tau_err,
            expected_channel_energy,
            fingerprint: cs.fingerprint(),
            plan,
            cc,
        })
    }

    /// Time-domain noise variance per sample for a linear in-band SNR.
    ///
    /// `awgn_for_snr` yields the per-subcarrier density N0; the receiver's
    /// unnormalized analysis DFT sums `n_fft` samples, so white noise of
    /// variance `N0 * n_fft` lands at exactly N0 per demodulated
    /// subcarrier and the in-band SNR equals the requested value.
    pub fn noise_variance(&self, snr_linear: f64) -> Result<f64, HarnessError> {
        let alloc = self.cc.alloc_width();
        let n0 = awgn_for_snr(
            self.expected_channel_energy,
            self.cc.p_s * alloc as f64,
            alloc,
            snr_linear,
        )?;
        Ok(n0 * self.cc.n_fft as f64)
    }

    /// Runs one trial and returns (bits sent, bit errors).
    pub fn run_trial(
        &self,
        master_seed: u64,
        snr_idx: usize,
        trial_idx: usize,
        sigma2: f64,
    ) -> Result<(u64, u64), HarnessError> {
        let cc = &self.cc;
        let mut rng = crate::rng::stream(master_seed, &[snr_idx as u64, trial_idx as u64]);
        let width = cc.info_bits_per_symbol();
        let mut sent = Vec::with_capacity(width * self.symbols_per_trial);
        let mut grids = Vec::with_capacity(self.symbols_per_trial);
        for s in 0..self.symbols_per_trial {
            let bits: Vec<bool> = (0..width).map(|_| rng.gen()).collect();
            let wus = self.generators[s % self.generators.len()].generate(&bits, cc)?;
            sent.extend_from_slice(&bits);
            let data = qpsk_symbols(&mut rng, self.n_data, cc.p_s);
            grids.push(assemble_symbol(&wus.coefficients, &data, &self.plan)?);
        }
        let tx = modulate_message(&grids, cc.n_cp, cc.sample_rate())?;
        let h = self.channel.realize(cc.sample_rate(), &mut rng)?;
        let mut rx = apply_channel(&tx.samples, &h);
        let tau = draw_timing_offset(self.tau_err, &mut rng);
        let offset = offset_to_adc_samples(tau, self.chain.adc_rate());
        if sigma2 > 0.0 {
            add_awgn(&mut rx, sigma2, &mut rng);
        }
        let det = self.chain.process_message(&rx, &tx.boundaries, offset)?;
        let errors =
            det.info_bits.iter().zip(&sent).filter(|(got, want)| got != want).count();
        Ok((sent.len() as u64, errors as u64))
    }

    /// WUS coefficients for message-symbol index `s`, honoring the same
    /// per-symbol phase-ramp alternation as the Monte Carlo trials.
    pub fn wus_symbol(&self, s: usize, bits: &[bool]) -> Result<WusSymbol, HarnessError> {
        self.generators[s % self.generators.len()].generate(bits, &self.cc)
    }

    /// One SNR point, trials in parallel.
    pub fn ber_point(
        &self,
        master_seed: u64,
        snr_idx: usize,
        snr_db: f64,
        trials: usize,
    ) -> Result<BerPoint, HarnessError> {
        let sigma2 = self.noise_variance(10f64.powf(snr_db / 10.0))?;
        let (bits, bit_errors) = (0..trials)
            .into_par_iter()
            .map(|t| self.run_trial(master_seed, snr_idx, t, sigma2))
            .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
        let (ci95_low, ci95_high) = wilson_interval(bit_errors, bits);
        Ok(BerPoint {
            snr_db,
            trials,
            bits,
            bit_errors,
            ber: bit_errors as f64 / bits as f64,
            ci95_low,
            ci95_high,
        })
    }
}

/// Full BER curve for one scenario.
pub fn run_ber(
    cs: &CheckedScenario,
    snr_db: &[f64],
    trials: usize,
    master_seed: u64,
) -> Result<BerReport, HarnessError> {
    if snr_db.is_empty() {
        return Err(HarnessError::NoSnrPoints);
    }
    if trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    let rt = ScenarioRuntime::new(cs)?;
    let points = snr_db
        .iter()
        .enumerate()
        .map(|(i, &db)| rt.ber_point(master_seed, i, db, trials))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BerReport { fingerprint: rt.fingerprint.clone(), master_seed, points })
}

#[derive(Debug, Clone, Serialize)]
pub struct GuardCell {
    pub n_lgp: usize,
    pub n_rgp: usize,
    pub point: BerPoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct GuardSweepReport {
    pub fingerprint: String,
    pub master_seed: u64,
    pub snr_db: f64,
    pub cells: Vec<GuardCell>,
}

/// Rebuilds the scenario with replaced guard counts and window trim.
fn with_guards_and_trim(
    base: &CheckedScenario,
    n_lgp: usize,
    n_rgp: usize,
    trim: Option<(usize, usize)>,
) -> Result<CheckedScenario, ScenarioError> {
    let mut sc: Scenario = (**base).clone();
    sc.spreading.n_lgp = n_lgp;
    sc.spreading.n_rgp = n_rgp;
    if let Some(t) = trim {
        sc.receiver.window_trim = Some(t);
    }
    sc.validate()
}

/// BER over a grid of (left, right) guard-pulse counts at one SNR, with
/// common random numbers across cells. The (0, 0) cell reproduces the
/// plain `run_ber` point bit for bit.
pub fn guard_sweep(
    base: &CheckedScenario,
    lgp: &[usize],
    rgp: &[usize],
    snr_db: f64,
    trials: usize,
    master_seed: u64,
) -> Result<GuardSweepReport, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    let mut cells = Vec::with_capacity(lgp.len() * rgp.len());
    for &l in lgp {
        for &r in rgp {
            let cs = with_guards_and_trim(base, l, r, None)?;
            let rt = ScenarioRuntime::new(&cs)?;
            let point = rt.ber_point(master_seed, 0, snr_db, trials)?;
            cells.push(GuardCell { n_lgp: l, n_rgp: r, point });
        }
    }
    Ok(GuardSweepReport {
        fingerprint: base.fingerprint(),
        master_seed,
        snr_db,
        cells,
    })
}

/// Where the pulse-domain concentration is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentrationMode {
    TxOnly,
    RxOnly,
    Joint,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationCell {
    pub mode: ConcentrationMode,
    pub pulses: usize,
    pub point: BerPoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub fingerprint: String,
    pub master_seed: u64,
    pub snr_db: f64,
    pub cells: Vec<ConcentrationCell>,
}

/// ADC samples spanned by `pulses` transmit pulses.
fn trim_samples(cc: &CheckedConfig, downsample: usize, pulses: usize) -> usize {
    let pulse_adc = cc.n_fft as f64 / (cc.n_symb as f64 * downsample as f64);
    (pulses as f64 * pulse_adc).round() as usize
}

/// Compares transmit-side, receive-side, and joint concentration by
/// `pulses` on each side, at one SNR, under common random numbers.
pub fn concentration_modes(
    base: &CheckedScenario,
    amounts: &[usize],
    snr_db: f64,
    trials: usize,
    master_seed: u64,
) -> Result<ConcentrationReport, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    let base_trim = base.receiver.window_trim.unwrap_or((0, 0));
    let base_guards = (base.spreading.n_lgp, base.spreading.n_rgp);
    let mut cells = Vec::new();
    for &g in amounts {
        let t = trim_samples(base.cc(), base.receiver.downsample, g);
        let matched = (base_trim.0 + t, base_trim.1 + t);
        for (mode, guards, trim) in [
            (ConcentrationMode::TxOnly, (g, g), base_trim),
            (ConcentrationMode::RxOnly, base_guards, matched),
            (ConcentrationMode::Joint, (g, g), matched),
        ] {
            let cs = with_guards_and_trim(base, guards.0, guards.1, Some(trim))?;
            let rt = ScenarioRuntime::new(&cs)?;
            let point = rt.ber_point(master_seed, 0, snr_db, trials)?;
            cells.push(ConcentrationCell { mode, pulses: g, point });
        }
    }
    Ok(ConcentrationReport {
        fingerprint: base.fingerprint(),
        master_seed,
        snr_db,
        cells,
    })
}
