//! The least-squares rectangular waveform.
//!
//! The band-limited waveform closest (in the LS sense) to ideal rectangular
//! OOK is obtained by holding each bit over `n_fft/n_bit` samples, taking
//! one large DFT, and keeping the `n_sc` outputs centered on DC. That
//! construction has a closed form (a Dirichlet window times the bit DFT)
//! and, less obviously, is exactly reproducible by the main DFT-s-OFDM
//! path with an all-ones overlay, a specific ramp, and a sin-ratio window —
//! [`ls_equivalent_fdss`] returns that window.

use crate::bits::CodedBits;
use crate::fastpath::all_ones_spectrum;
use crate::fourier::cis_turns;
use crate::precoder::{normalization_factor, WusSymbol};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LsError {
    #[error("n_fft={n_fft} is not divisible by n_bit={n_bit}")]
    NotDivisible { n_fft: usize, n_bit: usize },
    #[error("coded bit count {got} does not match n_bit={expected}")]
    BitCount { got: usize, expected: usize },
    #[error("invalid geometry: {0}")]
    BadGeometry(String),
}

/// Geometry of the LS construction. The retained outputs are the baseband
/// indices centered on DC; index `k_c` of the frame maps to DC.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LsProfile {
    pub n_fft: usize,
    pub n_sc: usize,
    pub n_bit: usize,
    /// Use `ceil(n_sc/2)` as the DC index instead of the default floor.
    pub ceil_center: bool,
}

impl LsProfile {
    pub fn new(n_fft: usize, n_sc: usize, n_bit: usize) -> Result<Self, LsError> {
        if n_bit == 0 || n_fft == 0 || n_sc == 0 {
            return Err(LsError::BadGeometry("zero dimension".into()));
        }
        if n_fft % n_bit != 0 {
            return Err(LsError::NotDivisible { n_fft, n_bit });
        }
        if n_sc > n_fft {
            return Err(LsError::BadGeometry(format!("n_sc={n_sc} exceeds n_fft={n_fft}")));
        }
        Ok(LsProfile { n_fft, n_sc, n_bit, ceil_center: false })
    }

    pub fn with_ceil_center(mut self) -> Self {
        self.ceil_center = true;
        self
    }

    /// In-frame index of the DC subcarrier.
    pub fn k_c(&self) -> usize {
        if self.ceil_center {
            self.n_sc.div_ceil(2)
        } else {
            self.n_sc / 2
        }
    }

    /// Samples per bit in the held signal.
    pub fn n_seg_ls(&self) -> usize {
        self.n_fft / self.n_bit
    }
}

/// Literal LS construction, pre-normalization: hold each bit over
/// `n_fft/n_bit` samples, DFT, keep `X[k] = D[(k - k_c) mod n_fft]`.
pub fn ls_direct(coded: &CodedBits, profile: &LsProfile) -> Result<Vec<Complex64>, LsError> {
    if coded.len() != profile.n_bit {
        return Err(LsError::BitCount { got: coded.len(), expected: profile.n_bit });
    }
    let n_fft = profile.n_fft;
    let hold = profile.n_seg_ls();
    let held: Vec<bool> = (0..n_fft).map(|n| coded.0[n / hold]).collect();
    let k_c = profile.k_c() as i64;
    Ok((0..profile.n_sc)
        .map(|k| {
            let kp = (k as i64 - k_c).rem_euclid(n_fft as i64) as usize;
            held.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(n, _)| cis_turns(-((kp * n) as f64) / n_fft as f64))
                .sum()
        })
        .collect())
}

/// The LS pulse window: `W[k_c] = n_fft/n_bit`, elsewhere the Dirichlet
/// kernel of the bit-hold, global phase included.
pub fn ls_window(profile: &LsProfile) -> Vec<Complex64> {
    let k_c = profile.k_c() as f64;
    (0..profile.n_sc)
        .map(|k| all_ones_spectrum(k as f64 - k_c, profile.n_seg_ls(), profile.n_fft))
        .collect()
}

/// Closed form of [`ls_direct`]: `X[k] = W[k] * B(k - k_c)` with the bit DFT
/// evaluated on its short period.
pub fn ls_closed_form(coded: &CodedBits, profile: &LsProfile) -> Result<Vec<Complex64>, LsError> {
    if coded.len() != profile.n_bit {
        return Err(LsError::BitCount { got: coded.len(), expected: profile.n_bit });
    }
    let spec = crate::bits::dft_coded_bits(coded)
        .map_err(|e| LsError::BadGeometry(e.to_string()))?;
    let k_c = profile.k_c() as i64;
    Ok(ls_window(profile)
        .into_iter()
        .enumerate()
        .map(|(k, w)| w * spec.at(k as i64 - k_c))
        .collect())
}

/// LS frame with the standard allocation-power normalization applied.
pub fn ls_waveform(
    coded: &CodedBits,
    profile: &LsProfile,
    p_s: f64,
    n_gb: usize,
) -> Result<WusSymbol, LsError> {
    let raw = ls_direct(coded, profile)?;
    Ok(match normalization_factor(&raw, p_s, profile.n_sc, n_gb) {
        Some(eta) => {
            WusSymbol { coefficients: raw.iter().map(|v| v * eta).collect(), eta, silent: false }
        }
        None => WusSymbol::silent(profile.n_sc),
    })
}

/// The window (sans time shift), default time shift, and ramp increment
/// that make the main generation path coincide with the LS waveform when
/// the overlay is all ones with no guards.
#[derive(Debug, Clone, PartialEq)]
pub struct LsEquivalent {
    pub coefficients: Vec<Complex64>,
    /// Time shift in samples, `(n_fft - n_symb)/(2*n_symb)`.
    pub t_shift: f64,
    /// Ramp increment `2*pi*(l_shift + k_c)/n_symb`.
    pub phi: f64,
}

/// Sin-ratio window of the DFT-s-OFDM form of the LS waveform:
/// `W[k_c] = n_fft/n_symb`, elsewhere a ratio of Dirichlet denominators.
pub fn ls_equivalent_fdss(
    n_symb: usize,
    n_sc: usize,
    n_fft: usize,
    l_shift: i64,
) -> Result<LsEquivalent, LsError> {
    if n_symb == 0 || n_sc == 0 {
        return Err(LsError::BadGeometry("zero dimension".into()));
    }
    if n_symb > n_sc || n_sc > n_fft {
        return Err(LsError::BadGeometry(format!(
            "need n_symb <= n_sc <= n_fft, got {n_symb}, {n_sc}, {n_fft}"
        )));
    }
    let k_c = (n_sc / 2) as i64;
    // Global phase aligning the window to the un-shifted frame.
    let alpha_ratio = cis_turns(k_c as f64 * (1.0 / n_symb as f64 - 1.0 / n_fft as f64) / 2.0);
    let coefficients = (0..n_sc)
        .map(|k| {
            let x = (k as i64 - k_c) as f64;
            let ratio = if k as i64 == k_c {
                n_fft as f64 / n_symb as f64
            } else {
                (PI * x / n_symb as f64).sin() / (PI * x / n_fft as f64).sin()
            };
            alpha_ratio * ratio
        })
        .collect();
    Ok(LsEquivalent {
        coefficients,
        t_shift: (n_fft as f64 - n_symb as f64) / (2.0 * n_symb as f64),
        phi: TAU * (l_shift + k_c) as f64 / n_symb as f64,
    })
}
