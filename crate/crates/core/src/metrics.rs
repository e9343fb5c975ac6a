//! Waveform quality metrics: envelope flatness, OFF-window leakage,
//! spectral comb structure, and ensemble-averaged spectra.

use crate::bits::CodedBits;
use crate::config::{CheckedConfig, FdssSpec, SpreadingSpec, WaveformConfig};
use crate::precoder::{generate_wus_symbol, PrecodeError};
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty input")]
    Empty,
    #[error("all bits are OFF; on/off metrics are undefined")]
    AllOff,
    #[error("frame of {frame} entries does not split into {n_bit} offset classes")]
    NotDivisible { frame: usize, n_bit: usize },
    #[error("frame carries no power")]
    ZeroPower,
    #[error("ensemble width {width} exceeds the exhaustive limit of 20 bits")]
    EnsembleTooWide { width: usize },
    #[error("random ensemble needs at least one draw")]
    NoDraws,
    #[error(transparent)]
    Precode(#[from] PrecodeError),
}

/// Envelope quality of one OOK symbol body against its coded bits.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeMetrics {
    /// Worst max/min envelope ratio over the central half of any ON window.
    pub on_ripple: f64,
    /// Energy in OFF windows relative to energy in ON windows.
    pub off_leakage: f64,
    /// Fraction of the body energy inside each OOK window.
    pub window_energy: Vec<f64>,
}

/// Splits `len` samples into `parts` windows with floor boundaries.
fn window_bounds(len: usize, parts: usize) -> Vec<(usize, usize)> {
    (0..parts).map(|w| (w * len / parts, (w + 1) * len / parts)).collect()
}

pub fn envelope_metrics(
    body: &[Complex64],
    coded: &CodedBits,
) -> Result<EnvelopeMetrics, MetricsError> {
    if body.is_empty() || coded.len() == 0 || body.len() < coded.len() {
        return Err(MetricsError::Empty);
    }
    if coded.ones() == 0 {
        return Err(MetricsError::AllOff);
    }
    let bounds = window_bounds(body.len(), coded.len());
    let energies: Vec<f64> =
        bounds.iter().map(|&(s, e)| body[s..e].iter().map(|v| v.norm_sqr()).sum()).collect();
    let total: f64 = energies.iter().sum();

    let mut on_ripple: f64 = 0.0;
    let mut on_energy = 0.0;
    let mut off_energy = 0.0;
    for (w, &(s, e)) in bounds.iter().enumerate() {
        if !coded.0[w] {
            off_energy += energies[w];
            continue;
        }
        on_energy += energies[w];
        // Central half of the window; edge transients are the filter's
        // problem, not the waveform's.
        let quarter = (e - s) / 4;
        let (cs, ce) = (s + quarter, e - quarter);
        let span = if cs < ce { &body[cs..ce] } else { &body[s..e] };
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for v in span {
            let mag = v.norm();
            lo = lo.min(mag);
            hi = hi.max(mag);
        }
        let ripple = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        on_ripple = on_ripple.max(ripple);
    }
    if on_energy <= 0.0 {
        return Err(MetricsError::ZeroPower);
    }
    let window_energy = if total > 0.0 {
        energies.iter().map(|&v| v / total).collect()
    } else {
        vec![0.0; energies.len()]
    };
    Ok(EnvelopeMetrics { on_ripple, off_leakage: off_energy / on_energy, window_energy })
}

/// Total power per frequency-offset class `k mod n_bit` of a precoded
/// frame. Class 0 is the comb aligned with the unramped OOK spectrum.
pub fn comb_levels(frame: &[Complex64], n_bit: usize) -> Result<Vec<f64>, MetricsError> {
    if n_bit == 0 || frame.is_empty() || frame.len() % n_bit != 0 {
        return Err(MetricsError::NotDivisible { frame: frame.len(), n_bit });
    }
    let mut levels = vec![0.0f64; n_bit];
    for (k, v) in frame.iter().enumerate() {
        levels[k % n_bit] += v.norm_sqr();
    }
    Ok(levels)
}

/// Fraction of frame power on the comb `k = 0 (mod n_bit)`. Computed on a
/// frame spread without a phase ramp, Manchester coding pins this to
/// exactly one half for any overlay sequence.
pub fn comb_power_fraction(frame: &[Complex64], n_bit: usize) -> Result<f64, MetricsError> {
    let levels = comb_levels(frame, n_bit)?;
    let total: f64 = levels.iter().sum();
    if total <= 0.0 {
        return Err(MetricsError::ZeroPower);
    }
    Ok(levels[0] / total)
}

/// How message bits are drawn when averaging over payloads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BitEnsemble {
    /// Every input-bit string once.
    Exhaustive,
    /// `draws` uniform strings from a dedicated stream.
    Random { draws: usize, seed: u64 },
}

fn with_phi(cc: &CheckedConfig, phi: f64) -> CheckedConfig {
    let raw: &WaveformConfig = cc.config();
    WaveformConfig { phi, ..raw.clone() }.validate().expect("sign flip keeps the config valid")
}

/// Mean per-subcarrier power `E|X[k]|^2` of the generated symbol on the
/// full FFT grid (DC at index 0), averaged over the bit ensemble, and over
/// both ramp signs when the config alternates them.
pub fn average_spectrum(
    cc: &CheckedConfig,
    fdss: &FdssSpec,
    spreading: &SpreadingSpec,
    ensemble: BitEnsemble,
) -> Result<Vec<f64>, MetricsError> {
    let width = cc.info_bits_per_symbol();
    let mut acc = vec![0.0f64; cc.n_fft];
    let mut draws = 0usize;
    let configs: Vec<CheckedConfig> = if cc.alternate_phi_sign && cc.phi != 0.0 {
        vec![with_phi(cc, cc.phi), with_phi(cc, -cc.phi)]
    } else {
        vec![with_phi(cc, cc.phi)]
    };
    let mut add = |bits: &[bool]| -> Result<(), MetricsError> {
        for sub in &configs {
            let sym = generate_wus_symbol(bits, sub, fdss, spreading)?;
            let f0 = sub.wus_f0() as i64;
            for (j, v) in sym.coefficients.iter().enumerate() {
                let idx = (f0 + j as i64).rem_euclid(sub.n_fft as i64) as usize;
                acc[idx] += v.norm_sqr();
            }
            draws += 1;
        }
        Ok(())
    };
    match ensemble {
        BitEnsemble::Exhaustive => {
            if width > 20 {
                return Err(MetricsError::EnsembleTooWide { width });
            }
            for pattern in 0u64..(1 << width) {
                let bits: Vec<bool> = (0..width).map(|b| pattern >> b & 1 == 1).collect();
                add(&bits)?;
            }
        }
        BitEnsemble::Random { draws: n, seed } => {
            if n == 0 {
                return Err(MetricsError::NoDraws);
            }
            let mut rng = crate::rng::stream(seed, &[]);
            for _ in 0..n {
                let bits: Vec<bool> = (0..width).map(|_| rng.gen::<bool>()).collect();
                add(&bits)?;
            }
        }
    }
    for v in &mut acc {
        *v /= draws as f64;
    }
    Ok(acc)
}

/// Convenience: exhaustive when the input width is small, random otherwise.
pub fn default_ensemble(cc: &CheckedConfig, seed: u64) -> BitEnsemble {
    if cc.info_bits_per_symbol() <= 10 {
        BitEnsemble::Exhaustive
    } else {
        BitEnsemble::Random { draws: 1024, seed }
    }
}

/// Exhaustive mean of `|D[k]|^2` for the precoded (pre-FDSS) frame.
pub fn mean_precoded_power(
    cc: &CheckedConfig,
    spreading: &SpreadingSpec,
    phi: f64,
) -> Result<Vec<f64>, MetricsError> {
    let width = cc.info_bits_per_symbol();
    if width > 20 {
        return Err(MetricsError::EnsembleTooWide { width });
    }
    let built = spreading
        .build(cc.n_seg(), cc.n_bit, phi)
        .map_err(PrecodeError::from)?;
    let mut acc = vec![0.0f64; cc.n_symb];
    for pattern in 0u64..(1 << width) {
        let bits: Vec<bool> = (0..width).map(|b| pattern >> b & 1 == 1).collect();
        let coded = crate::precoder::coded_from_input(&bits, cc)?;
        let d = crate::spreading::spread_bits(&coded, &built, cc.n_symb)
            .map_err(PrecodeError::from)?;
        let spec = crate::precoder::dft_precode(&d.d, cc.n_symb)?;
        for (a, v) in acc.iter_mut().zip(&spec) {
            *a += v.norm_sqr();
        }
    }
    let n = (1u64 << width) as f64;
    for a in &mut acc {
        *a /= n;
    }
    Ok(acc)
}
