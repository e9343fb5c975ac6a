//! Multipath Rayleigh fading (TDL profile) and AWGN.
//!
//! Fading is block-static: one realization per message, redrawn per trial.
//! At 3 km/h and low-GHz carriers the coherence time spans many OFDM
//! symbols, so holding the taps fixed over a message is the standard
//! simplification. The SNR convention ties noise power to the allocation:
//! `N0 = E_h * P_W / ((n_sc + 2*n_gb) * snr)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("delay scaling must be nonnegative and finite, got {0}")]
    BadScaling(f64),
    #[error("sample rate must be positive, got {0}")]
    BadSampleRate(f64),
    #[error("snr must be positive, got {0}")]
    BadSnr(f64),
    #[error("empty tap line")]
    Empty,
}

/// TDL-C normalized tap delays (unitless; multiply by the delay scaling).
pub const TDLC_NORMALIZED_DELAYS: [f64; 24] = [
    0.0, 0.2099, 0.2219, 0.2329, 0.2176, 0.6366, 0.6448, 0.6560, 0.6584, 0.7935, 0.8213, 0.9336,
    1.2285, 1.3083, 2.1704, 2.7105, 4.2589, 4.6003, 5.4902, 5.6077, 6.3065, 6.6374, 7.0427,
    8.6523,
];

/// TDL-C tap powers in dB, same order as the delays.
pub const TDLC_POWERS_DB: [f64; 24] = [
    -4.4, -1.2, -3.5, -5.2, -2.5, 0.0, -2.2, -3.9, -7.4, -7.1, -10.7, -11.1, -5.1, -6.8, -8.7,
    -13.2, -13.9, -13.9, -15.8, -17.1, -16.0, -15.7, -21.6, -22.8,
];

/// A sampled power-delay profile: per-tap delay in samples and average
/// energy, with total energy normalized to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TapLine {
    pub delays: Vec<usize>,
    pub energies: Vec<f64>,
}

impl TapLine {
    pub fn single() -> Self {
        TapLine { delays: vec![0], energies: vec![1.0] }
    }

    pub fn total_energy(&self) -> f64 {
        self.energies.iter().sum()
    }
}

/// TDL-C profile scaled by `delay_scaling` seconds, quantized to the
/// nearest sample; taps landing on the same sample are power-merged.
pub fn tdlc_profile(delay_scaling: f64, sample_rate: f64) -> Result<TapLine, ChannelError> {
    if !(delay_scaling >= 0.0) || !delay_scaling.is_finite() {
        return Err(ChannelError::BadScaling(delay_scaling));
    }
    if !(sample_rate > 0.0) {
        return Err(ChannelError::BadSampleRate(sample_rate));
    }
    let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
    for (norm, db) in TDLC_NORMALIZED_DELAYS.iter().zip(&TDLC_POWERS_DB) {
        let sample = (norm * delay_scaling * sample_rate).round() as usize;
        *merged.entry(sample).or_insert(0.0) += 10f64.powf(db / 10.0);
    }
    let total: f64 = merged.values().sum();
    Ok(TapLine {
        delays: merged.keys().copied().collect(),
        energies: merged.values().map(|p| p / total).collect(),
    })
}

/// One drawn channel: complex tap gains at integer sample delays.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub delays: Vec<usize>,
    pub gains: Vec<Complex64>,
}

impl ChannelRealization {
    /// Deterministic identity channel.
    pub fn unit() -> Self {
        ChannelRealization { delays: vec![0], gains: vec![Complex64::new(1.0, 0.0)] }
    }

    pub fn energy(&self) -> f64 {
        self.gains.iter().map(|g| g.norm_sqr()).sum()
    }

    pub fn max_delay(&self) -> usize {
        self.delays.iter().copied().max().unwrap_or(0)
    }
}

/// Draws circular-complex-normal tap gains with variances matching the
/// profile energies.
pub fn realize<R: Rng + ?Sized>(profile: &TapLine, rng: &mut R) -> ChannelRealization {
    let gains = profile
        .energies
        .iter()
        .map(|&e| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * (e / 2.0).sqrt()
        })
        .collect();
    ChannelRealization { delays: profile.delays.clone(), gains }
}

/// TDL-C realization in one call.
pub fn tdlc_realization<R: Rng + ?Sized>(
    delay_scaling: f64,
    sample_rate: f64,
    rng: &mut R,
) -> Result<ChannelRealization, ChannelError> {
    Ok(realize(&tdlc_profile(delay_scaling, sample_rate)?, rng))
}

/// Linear convolution with the tap line; output length is input length
/// plus the maximum delay.
pub fn apply_channel(signal: &[Complex64], h: &ChannelRealization) -> Vec<Complex64> {
    let out_len = signal.len() + h.max_delay();
    let mut out = vec![Complex64::new(0.0, 0.0); out_len];
    for (&d, &g) in h.delays.iter().zip(&h.gains) {
        for (n, &x) in signal.iter().enumerate() {
            out[n + d] += g * x;
        }
    }
    out
}

/// Noise power for a target SNR under the allocation convention:
/// `N0 = E_h * P_W / ((n_sc + 2*n_gb) * snr)`.
pub fn awgn_for_snr(e_h: f64, p_w: f64, alloc_width: usize, snr: f64) -> Result<f64, ChannelError> {
    if !(snr > 0.0) {
        return Err(ChannelError::BadSnr(snr));
    }
    Ok(e_h * p_w / (alloc_width as f64 * snr))
}

/// Adds complex AWGN of the given per-sample variance in place.
pub fn add_awgn<R: Rng + ?Sized>(signal: &mut [Complex64], variance: f64, rng: &mut R) {
    let sigma = (variance / 2.0).sqrt();
    for v in signal.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += Complex64::new(re, im) * sigma;
    }
}

/// Channel selection for scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSpec {
    /// No fading: deterministic unit tap.
    Awgn,
    /// Single Rayleigh tap.
    Flat,
    /// TDL-C with the given delay scaling in seconds.
    Tdlc { delay_scaling: f64 },
}

impl ChannelSpec {
    /// Draws one realization; `Awgn` consumes no randomness.
    pub fn realize<R: Rng + ?Sized>(
        &self,
        sample_rate: f64,
        rng: &mut R,
    ) -> Result<ChannelRealization, ChannelError> {
        match self {
            ChannelSpec::Awgn => Ok(ChannelRealization::unit()),
            ChannelSpec::Flat => Ok(realize(&TapLine::single(), rng)),
            ChannelSpec::Tdlc { delay_scaling } => {
                tdlc_realization(*delay_scaling, sample_rate, rng)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluation_profile_quantizes_and_merges() {
        let line = tdlc_profile(300e-9, 15.36e6).unwrap();
        assert_eq!(
            line.delays,
            vec![0, 1, 3, 4, 6, 10, 12, 20, 21, 25, 26, 29, 31, 32, 40]
        );
        assert!((line.total_energy() - 1.0).abs() < 1e-12);
        // The strongest merged tap is the 3-sample group (0 dB tap inside).
        let peak_idx =
            line.energies.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(line.delays[peak_idx], 3);
    }

    #[test]
    fn zero_scaling_collapses_to_one_tap() {
        let line = tdlc_profile(0.0, 15.36e6).unwrap();
        assert_eq!(line.delays, vec![0]);
        assert!((line.energies[0] - 1.0).abs() < 1e-12);
        assert!(tdlc_profile(-1.0, 15.36e6).is_err());
    }

    #[test]
    fn most_energy_arrives_within_the_short_cp_budget() {
        // 98% of the average energy within 1.5 us at the 300 ns scaling.
        let line = tdlc_profile(300e-9, 15.36e6).unwrap();
        let cutoff = (1.5e-6 * 15.36e6) as usize;
        let early: f64 = line
            .delays
            .iter()
            .zip(&line.energies)
            .filter(|(&d, _)| d <= cutoff)
            .map(|(_, &e)| e)
            .sum();
        assert!(early >= 0.98, "early energy {early}");
        assert!(early < 0.99);
    }

    #[test]
    fn tap_variances_match_the_profile() {
        let line = tdlc_profile(300e-9, 15.36e6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 10_000usize;
        let mut acc = vec![0.0; line.delays.len()];
        for _ in 0..draws {
            let h = realize(&line, &mut rng);
            for (a, g) in acc.iter_mut().zip(&h.gains) {
                *a += g.norm_sqr();
            }
        }
        for (a, &e) in acc.iter().zip(&line.energies) {
            let mean = a / draws as f64;
            assert!(
                (mean - e).abs() < 0.05 * e,
                "tap variance {mean} vs profile {e}"
            );
        }
    }

    #[test]
    fn convolution_golden_cases() {
        let x = [c(1., 0.), c(2., 0.), c(3., 0.)];
        let id = ChannelRealization::unit();
        assert_eq!(apply_channel(&x, &id), x.to_vec());

        let shift = ChannelRealization { delays: vec![3], gains: vec![c(1., 0.)] };
        let y = apply_channel(&x, &shift);
        assert_eq!(y.len(), 6);
        assert!(y[..3].iter().all(|v| v.norm() == 0.0));
        assert_eq!(&y[3..], &x[..]);
    }

    #[test]
    fn convolution_matches_a_double_sum_oracle() {
        let x: Vec<Complex64> =
            (0..17).map(|n| c((n as f64 * 0.7).sin(), (n as f64 * 0.3).cos())).collect();
        let h = ChannelRealization {
            delays: vec![0, 2, 5],
            gains: vec![c(0.5, -0.1), c(-0.3, 0.2), c(0.1, 0.9)],
        };
        let got = apply_channel(&x, &h);
        for n in 0..got.len() {
            let mut want = c(0., 0.);
            for (&d, &g) in h.delays.iter().zip(&h.gains) {
                if n >= d && n - d < x.len() {
                    want += g * x[n - d];
                }
            }
            assert!((got[n] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn channel_application_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = tdlc_realization(300e-9, 15.36e6, &mut rng).unwrap();
        let x: Vec<Complex64> = (0..32).map(|n| c((n as f64).sin(), (n as f64).cos())).collect();
        let y: Vec<Complex64> =
            (0..32).map(|n| c((n as f64 * 1.3).cos(), -(n as f64 * 0.2).sin())).collect();
        let (a, b) = (c(1.7, -0.4), c(-0.6, 2.2));
        let combo: Vec<Complex64> =
            x.iter().zip(&y).map(|(xv, yv)| a * xv + b * yv).collect();
        let lhs = apply_channel(&combo, &h);
        let hx = apply_channel(&x, &h);
        let hy = apply_channel(&y, &h);
        for (n, l) in lhs.iter().enumerate() {
            assert!((l - (a * hx[n] + b * hy[n])).norm() < 1e-12);
        }
    }

    #[test]
    fn snr_convention_plug_in() {
        // E_h=1, P_W=144*p_s, allocation 144 -> N0 = p_s/snr.
        let n0 = awgn_for_snr(1.0, 144.0 * 2.0, 144, 4.0).unwrap();
        assert!((n0 - 0.5).abs() < 1e-12);
        assert!(awgn_for_snr(1.0, 144.0, 144, 0.0).is_err());
        assert!(awgn_for_snr(1.0, 144.0, 144, -2.0).is_err());
        // snr -> infinity drives N0 -> 0.
        assert!(awgn_for_snr(1.0, 144.0, 144, 1e12).unwrap() < 1e-9);
    }

    #[test]
    fn noise_variance_is_calibrated() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut buf = vec![c(0., 0.); 1_000_000];
        add_awgn(&mut buf, 0.8, &mut rng);
        let measured: f64 = buf.iter().map(|v| v.norm_sqr()).sum::<f64>() / buf.len() as f64;
        assert!((measured - 0.8).abs() < 0.01 * 0.8, "variance {measured}");
        let mean: Complex64 = buf.iter().sum::<Complex64>() / buf.len() as f64;
        assert!(mean.norm() < 3e-3);
    }

    #[test]
    fn spec_realization_draw_behavior() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = ChannelSpec::Awgn.realize(15.36e6, &mut rng).unwrap();
        assert_eq!(h, ChannelRealization::unit());
        let flat = ChannelSpec::Flat.realize(15.36e6, &mut rng).unwrap();
        assert_eq!(flat.delays, vec![0]);
        let tdl = ChannelSpec::Tdlc { delay_scaling: 300e-9 }.realize(15.36e6, &mut rng).unwrap();
        assert_eq!(tdl.delays.len(), 15);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = ChannelSpec::Tdlc { delay_scaling: 300e-9 };
        let js = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<ChannelSpec>(&js).unwrap(), spec);
        let awgn: ChannelSpec = serde_json::from_str("\"awgn\"").unwrap();
        assert_eq!(awgn, ChannelSpec::Awgn);
    }
}
