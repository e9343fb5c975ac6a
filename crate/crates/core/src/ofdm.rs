//! Full-band OFDM symbol assembly and (de)modulation.
//!
//! The band plan places the WUS block (modulated subcarriers plus guards)
//! and co-channel QPSK data on a common `n_fft` grid with signed subcarrier
//! indices wrapping around DC. Modulation is an unnormalized inverse DFT
//! with a cyclic prefix; demodulation divides the forward DFT by `n_fft`.

use crate::config::CheckedConfig;
use crate::fourier::{dft_forward_to, dft_inverse_to};
use num_complex::Complex64;
use rand::Rng;
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OfdmError {
    #[error("allocation collision on subcarrier {index}")]
    Collision { index: i32 },
    #[error("subcarrier {index} outside the grid of {n_fft}")]
    OutOfGrid { index: i32, n_fft: usize },
    #[error("expected {expected} {what}, got {got}")]
    LengthMismatch { what: &'static str, expected: usize, got: usize },
    #[error("cyclic prefix {n_cp} exceeds body {n_fft}")]
    CpTooLong { n_cp: usize, n_fft: usize },
    #[error("active band {n_active} does not fit n_fft={n_fft}")]
    BandTooWide { n_active: usize, n_fft: usize },
}

/// Placement of the WUS block and the co-channel data set on the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandPlan {
    pub n_fft: usize,
    pub wus_f0: i32,
    pub n_sc: usize,
    pub n_gb: usize,
    data: Vec<i32>,
}

impl BandPlan {
    /// Builds a plan from explicit data indices, rejecting collisions with
    /// the WUS block (guards included) and indices off the grid.
    pub fn new(
        n_fft: usize,
        wus_f0: i32,
        n_sc: usize,
        n_gb: usize,
        data: Vec<i32>,
    ) -> Result<Self, OfdmError> {
        let half = (n_fft / 2) as i32;
        let mut used = HashSet::new();
        let block = (wus_f0 - n_gb as i32)..(wus_f0 + (n_sc + n_gb) as i32);
        for idx in block.clone().chain(data.iter().copied()) {
            if idx < -half || idx >= n_fft as i32 {
                return Err(OfdmError::OutOfGrid { index: idx, n_fft });
            }
            if !used.insert(idx.rem_euclid(n_fft as i32)) {
                return Err(OfdmError::Collision { index: idx });
            }
        }
        Ok(BandPlan { n_fft, wus_f0, n_sc, n_gb, data })
    }

    /// WUS centered in an active band of `n_active` subcarriers, everything
    /// else in the band carrying data.
    pub fn centered(cc: &CheckedConfig, n_active: usize) -> Result<Self, OfdmError> {
        if n_active > cc.n_fft {
            return Err(OfdmError::BandTooWide { n_active, n_fft: cc.n_fft });
        }
        let f0 = cc.wus_f0();
        let lo = -((n_active / 2) as i32);
        let hi = (n_active - n_active / 2) as i32;
        let block = (f0 - cc.n_gb as i32)..(f0 + (cc.n_sc + cc.n_gb) as i32);
        let data = (lo..hi).filter(|k| !block.contains(k)).collect();
        BandPlan::new(cc.n_fft, f0, cc.n_sc, cc.n_gb, data)
    }

    /// WUS alone on the grid; no co-channel data.
    pub fn wus_only(cc: &CheckedConfig) -> Self {
        BandPlan::new(cc.n_fft, cc.wus_f0(), cc.n_sc, cc.n_gb, Vec::new())
            .expect("wus-only plan from a validated config")
    }

    pub fn data_indices(&self) -> &[i32] {
        &self.data
    }

    pub fn grid_index(&self, signed: i32) -> usize {
        signed.rem_euclid(self.n_fft as i32) as usize
    }
}

/// Unit-average-power QPSK stream scaled to `p_s` per subcarrier.
pub fn qpsk_symbols<R: Rng + ?Sized>(rng: &mut R, count: usize, p_s: f64) -> Vec<Complex64> {
    let amp = (p_s / 2.0).sqrt();
    (0..count)
        .map(|_| {
            let point: u8 = rng.gen_range(0..4);
            let re = if point & 1 == 0 { amp } else { -amp };
            let im = if point & 2 == 0 { amp } else { -amp };
            Complex64::new(re, im)
        })
        .collect()
}

/// Places WUS coefficients and data symbols on the full grid.
pub fn assemble_symbol(
    wus: &[Complex64],
    data: &[Complex64],
    plan: &BandPlan,
) -> Result<Vec<Complex64>, OfdmError> {
    if wus.len() != plan.n_sc {
        return Err(OfdmError::LengthMismatch {
            what: "WUS coefficients",
            expected: plan.n_sc,
            got: wus.len(),
        });
    }
    if data.len() != plan.data.len() {
        return Err(OfdmError::LengthMismatch {
            what: "data symbols",
            expected: plan.data.len(),
            got: data.len(),
        });
    }
    let mut x = vec![Complex64::new(0.0, 0.0); plan.n_fft];
    for (k, &v) in wus.iter().enumerate() {
        x[plan.grid_index(plan.wus_f0 + k as i32)] = v;
    }
    for (&idx, &v) in plan.data.iter().zip(data) {
        x[plan.grid_index(idx)] = v;
    }
    Ok(x)
}

/// One OFDM symbol: unnormalized inverse DFT body with the last `n_cp`
/// body samples prepended.
pub fn ofdm_modulate(x: &[Complex64], n_cp: usize) -> Result<Vec<Complex64>, OfdmError> {
    let n_fft = x.len();
    if n_cp > n_fft {
        return Err(OfdmError::CpTooLong { n_cp, n_fft });
    }
    let body = dft_inverse_to(x);
    let mut out = Vec::with_capacity(n_cp + n_fft);
    out.extend_from_slice(&body[n_fft - n_cp..]);
    out.extend_from_slice(&body);
    Ok(out)
}

/// Inverse of [`ofdm_modulate`] on a CP-stripped body.
pub fn ofdm_demodulate(body: &[Complex64]) -> Vec<Complex64> {
    let n = body.len() as f64;
    dft_forward_to(body).into_iter().map(|v| v / n).collect()
}

/// Per-symbol layout inside a [`TimeSignal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolBoundary {
    pub start: usize,
    pub cp_len: usize,
    pub body_len: usize,
}

impl SymbolBoundary {
    pub fn body_start(&self) -> usize {
        self.start + self.cp_len
    }

    pub fn len(&self) -> usize {
        self.cp_len + self.body_len
    }
}

/// A concatenated baseband signal with its symbol layout.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    pub boundaries: Vec<SymbolBoundary>,
}

impl TimeSignal {
    pub fn body(&self, symbol: usize) -> &[Complex64] {
        let b = &self.boundaries[symbol];
        &self.samples[b.body_start()..b.body_start() + b.body_len]
    }
}

/// Modulates a sequence of full-grid frequency frames into one contiguous
/// signal; boundaries tile the buffer exactly.
pub fn modulate_message(
    grids: &[Vec<Complex64>],
    n_cp: usize,
    sample_rate: f64,
) -> Result<TimeSignal, OfdmError> {
    let mut samples = Vec::new();
    let mut boundaries = Vec::with_capacity(grids.len());
    for x in grids {
        let start = samples.len();
        samples.extend(ofdm_modulate(x, n_cp)?);
        boundaries.push(SymbolBoundary { start, cp_len: n_cp, body_len: x.len() });
    }
    Ok(TimeSignal { samples, sample_rate, boundaries })
}
