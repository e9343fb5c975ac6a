//! Waveform parameterization and validation.
//!
//! A [`WaveformConfig`] describes one OOK symbol inside the OFDM grid: FFT
//! and CP sizes, the modulated allocation, the precoder length, the OOK bit
//! count, and the phase ramp of the overlaid sequence. Configs are plain
//! data until [`WaveformConfig::validate`] promotes them to a
//! [`CheckedConfig`], which is immutable and safe to share across workers.

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Transmit-side description of one OOK waveform.
///
/// `n_symb` is the DFT-precoder length, `n_bit` the number of OOK bits per
/// OFDM symbol, and `phi` the increment of the phase ramp overlaid on the
/// spread bits. `f0` is the index of the first modulated subcarrier; when
/// omitted the allocation is centered on DC. Spectrum extension is implied
/// by `n_sc > n_symb` (the precoder output repeats cyclically).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformConfig {
    pub n_fft: usize,
    pub n_cp: usize,
    /// Subcarrier spacing in Hz.
    pub f_sc: f64,
    /// First modulated subcarrier (signed, wraps mod `n_fft`); `None` centers
    /// the allocation on DC.
    #[serde(default)]
    pub f0: Option<i32>,
    /// Modulated subcarriers.
    pub n_sc: usize,
    /// Guard subcarriers on each side of the modulated block.
    #[serde(default)]
    pub n_gb: usize,
    pub n_symb: usize,
    pub n_bit: usize,
    /// When set, input bits are information bits and are Manchester coded.
    pub manchester: bool,
    /// Cyclic shift of the precoder output, in subcarriers.
    #[serde(default)]
    pub l_shift: i64,
    /// Phase-ramp increment of the overlaid sequence, radians per symbol.
    #[serde(default)]
    pub phi: f64,
    /// Average power per allocated subcarrier.
    #[serde(default = "default_ps")]
    pub p_s: f64,
    /// Alternate the sign of `phi` on successive OFDM symbols of a message.
    #[serde(default)]
    pub alternate_phi_sign: bool,
}

fn default_ps() -> f64 {
    1.0
}

/// Quantities derived from a validated config.
#[derive(Debug, Clone, PartialEq)]
pub struct Derived {
    /// Spreading factor `n_symb / n_bit`.
    pub n_seg: usize,
    /// Information bits per OFDM symbol under Manchester coding.
    pub n_bo: Option<usize>,
    /// Pulse spacing `n_fft / n_symb` as an exact reduced fraction.
    pub pulse_spacing: (u64, u64),
    /// `n_fft * f_sc`, in Hz.
    pub sample_rate: f64,
}

/// A validated, immutable config plus its derived quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckedConfig {
    cfg: WaveformConfig,
    derived: Derived,
}

impl std::ops::Deref for CheckedConfig {
    type Target = WaveformConfig;
    fn deref(&self) -> &WaveformConfig {
        &self.cfg
    }
}

impl CheckedConfig {
    pub fn n_seg(&self) -> usize {
        self.derived.n_seg
    }

    /// Information bits per OFDM symbol (`n_bit / 2` under Manchester,
    /// otherwise `n_bit`).
    pub fn info_bits_per_symbol(&self) -> usize {
        self.derived.n_bo.unwrap_or(self.cfg.n_bit)
    }

    pub fn n_bo(&self) -> Option<usize> {
        self.derived.n_bo
    }

    pub fn pulse_spacing(&self) -> (u64, u64) {
        self.derived.pulse_spacing
    }

    pub fn pulse_spacing_f64(&self) -> f64 {
        self.cfg.n_fft as f64 / self.cfg.n_symb as f64
    }

    pub fn sample_rate(&self) -> f64 {
        self.derived.sample_rate
    }

    /// First modulated subcarrier, resolved to a signed index.
    pub fn wus_f0(&self) -> i32 {
        self.cfg.f0.unwrap_or(-((self.cfg.n_sc / 2) as i32))
    }

    /// Modulated block plus guards, in subcarriers.
    pub fn alloc_width(&self) -> usize {
        self.cfg.n_sc + 2 * self.cfg.n_gb
    }

    pub fn config(&self) -> &WaveformConfig {
        &self.cfg
    }
}

/// One named validation failure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigViolation {
    #[error("non-integer spreading factor: n_symb={n_symb} is not a multiple of n_bit={n_bit}")]
    NonIntegerSpreadingFactor { n_symb: usize, n_bit: usize },
    #[error("precoder exceeds allocation: n_symb={n_symb} > n_sc={n_sc}")]
    PrecoderExceedsAllocation { n_symb: usize, n_sc: usize },
    #[error("allocation exceeds band: n_sc={n_sc} + 2*n_gb={n_gb} > n_fft={n_fft}")]
    AllocationExceedsBand { n_sc: usize, n_gb: usize, n_fft: usize },
    #[error("placement out of range: f0={f0} with n_sc={n_sc} does not fit n_fft={n_fft}")]
    PlacementOutOfRange { f0: i32, n_sc: usize, n_fft: usize },
    #[error("pulse spacing below one sample: n_symb={n_symb} > n_fft={n_fft}")]
    PulseSpacingBelowOne { n_symb: usize, n_fft: usize },
    #[error("manchester coding needs an even n_bit, got {n_bit}")]
    OddManchesterBits { n_bit: usize },
    #[error("{name} must be positive")]
    NonPositive { name: &'static str },
    #[error("{name} must be finite")]
    NonFinite { name: &'static str },
    #[error("zc root {root} is not coprime with sequence length {n_seg}")]
    NonCoprimeRoot { root: u64, n_seg: usize },
    #[error("zc cyclic shift {shift} outside 0..{n_seg}")]
    ShiftOutOfRange { shift: usize, n_seg: usize },
    #[error("guard pulses overflow: n_lgp={n_lgp} + n_rgp={n_rgp} leaves no interior in n_seg={n_seg}")]
    GuardOverflow { n_lgp: usize, n_rgp: usize, n_seg: usize },
    #[error("explicit spreading sequences malformed: {detail}")]
    BadExplicitSequences { detail: String },
    #[error("explicit fdss coefficient count {got} does not match n_sc={n_sc}")]
    BadFdssLength { got: usize, n_sc: usize },
    #[error("kaiser beta must be nonnegative and finite")]
    BadKaiserBeta,
    #[error("ls-equivalent fdss requires integer n_fft/n_bit, got n_fft={n_fft}, n_bit={n_bit}")]
    LsGridMismatch { n_fft: usize, n_bit: usize },
}

/// Aggregate of every violated invariant, reported by name.
#[derive(Debug, Clone, Error)]
#[error("invalid configuration: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ConfigError {
    pub violations: Vec<ConfigViolation>,
}

impl WaveformConfig {
    /// Checks every structural invariant and returns either a

    /// [`CheckedConfig`] or the full list of violations.
    pub fn validate(self) -> Result<CheckedConfig, ConfigError> {
        let mut v = Vec::new();
        for (name, val) in [
            ("n_fft", self.n_fft),
            ("n_sc", self.n_sc),
            ("n_symb", self.n_symb),
            ("n_bit", self.n_bit),
        ] {
            if val == 0 {
                v.push(ConfigViolation::NonPositive { name });
            }
        }
        if !(self.f_sc > 0.0) {
            v.push(ConfigViolation::NonPositive { name: "f_sc" });
        }
        if !(self.p_s > 0.0) {
            v.push(ConfigViolation::NonPositive { name: "p_s" });
        }
        if !self.phi.is_finite() {
            v.push(ConfigViolation::NonFinite { name: "phi" });
        }
        if self.n_bit > 0 && self.n_symb % self.n_bit != 0 {
            v.push(ConfigViolation::NonIntegerSpreadingFactor {
                n_symb: self.n_symb,
                n_bit: self.n_bit,
            });
        }
        if self.n_symb > self.n_sc {
            v.push(ConfigViolation::PrecoderExceedsAllocation {
                n_symb: self.n_symb,
                n_sc: self.n_sc,
            });
        }
        if self.n_sc + 2 * self.n_gb > self.n_fft {
            v.push(ConfigViolation::AllocationExceedsBand {
                n_sc: self.n_sc,
                n_gb: self.n_gb,
                n_fft: self.n_fft,
            });
        }
        if let Some(f0) = self.f0 {
            // Explicit nonnegative placement must fit without wrapping;
            // negative starts wrap by construction.
            if f0 >= 0 && f0 as usize + self.n_sc + self.n_gb > self.n_fft {
                v.push(ConfigViolation::PlacementOutOfRange {
                    f0,
                    n_sc: self.n_sc,
                    n_fft: self.n_fft,
                });
            }
        }
        if self.n_symb > self.n_fft {
            v.push(ConfigViolation::PulseSpacingBelowOne {
                n_symb: self.n_symb,
                n_fft: self.n_fft,
            });
        }
        if self.manchester && self.n_bit % 2 != 0 {
            v.push(ConfigViolation::OddManchesterBits { n_bit: self.n_bit });
        }
        if !v.is_empty() {
            return Err(ConfigError { violations: v });
        }
        let g = (self.n_fft as u64).gcd(&(self.n_symb as u64));
        let derived = Derived {
            n_seg: self.n_symb / self.n_bit,
            n_bo: self.manchester.then_some(self.n_bit / 2),
            pulse_spacing: (self.n_fft as u64 / g, self.n_symb as u64 / g),
            sample_rate: self.n_fft as f64 * self.f_sc,
        };
        Ok(CheckedConfig { cfg: self, derived })
    }
}

// ---------------------------------------------------------------------------
// Spectral shaping
// ---------------------------------------------------------------------------

/// Frequency-domain spectral-shaping window selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdssKind {
    /// No shaping; the window is all ones.
    None,
    /// Real Kaiser taper, peak-normalized.
    Kaiser { beta: f64 },
    /// Complex window that makes the main path coincide with the
    /// least-squares waveform for the config in force.
    LsEquivalent,
    /// Arbitrary per-subcarrier coefficients, `(re, im)` pairs.
    Explicit { coefficients: Vec<(f64, f64)> },
}

/// Spectral-shaping spec: window kind plus a time shift applied as a linear
/// phase `exp(-j*2*pi*t_shift*k/n_fft)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdssSpec {
    pub kind: FdssKind,
    /// Time shift in samples. Defaults to half a pulse, `n_fft/(2*n_symb)`,
    /// for Kaiser shaping and to zero otherwise.
    #[serde(default)]
    pub t_shift: Option<f64>,
}

impl FdssSpec {
    pub fn none() -> Self {
        FdssSpec { kind: FdssKind::None, t_shift: None }
    }

    pub fn kaiser(beta: f64) -> Self {
        FdssSpec { kind: FdssKind::Kaiser { beta }, t_shift: None }
    }

    pub fn explicit(coefficients: Vec<Complex64>, t_shift: f64) -> Self {
        FdssSpec {
            kind: FdssKind::Explicit {
                coefficients: coefficients.iter().map(|c| (c.re, c.im)).collect(),
            },
            t_shift: Some(t_shift),
        }
    }

    pub fn resolved_t_shift(&self, n_fft: usize, n_symb: usize) -> f64 {
        match self.t_shift {
            Some(t) => t,
            None => match self.kind {
                FdssKind::Kaiser { .. } => n_fft as f64 / (2.0 * n_symb as f64),
                _ => 0.0,
            },
        }
    }

    pub fn validate(&self, n_sc: usize) -> Vec<ConfigViolation> {
        let mut v = Vec::new();
        match &self.kind {
            FdssKind::Kaiser { beta } => {
                if !beta.is_finite() || *beta < 0.0 {
                    v.push(ConfigViolation::BadKaiserBeta);
                }
            }
            FdssKind::Explicit { coefficients } => {
                if coefficients.len() != n_sc {
                    v.push(ConfigViolation::BadFdssLength { got: coefficients.len(), n_sc });
                }
            }
            _ => {}
        }
        if let Some(t) = self.t_shift {
            if !t.is_finite() {
                v.push(ConfigViolation::NonFinite { name: "t_shift" });
            }
        }
        v
    }
}

// ---------------------------------------------------------------------------
// Overlaid-sequence selection
// ---------------------------------------------------------------------------

/// Overlaid-sequence family applied on top of the spread bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadKind {
    /// All ones (plain repetition).
    AllOne,
    /// Segment-local phase ramp `exp(j*increment*m)`, m = 0..n_seg.
    PhaseRamp { increment: f64 },
    /// Zadoff-Chu sequence with root `root` and cyclic shift `shift`.
    Zc { root: u64, shift: usize },
    /// Unit-modulus random phases keyed by `(seed, m)`.
    Random { seed: u64 },
    /// One explicit sequence per OOK bit, `(re, im)` pairs (main path only).
    Explicit { sequences: Vec<Vec<(f64, f64)>> },
}

/// Overlaid-sequence spec plus guard pulses zeroed at the segment edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpreadingSpec {
    pub kind: SpreadKind,
    #[serde(default)]
    pub n_lgp: usize,
    #[serde(default)]
    pub n_rgp: usize,
}

impl SpreadingSpec {
    pub fn all_one() -> Self {
        SpreadingSpec { kind: SpreadKind::AllOne, n_lgp: 0, n_rgp: 0 }
    }

    pub fn zc(root: u64, shift: usize) -> Self {
        SpreadingSpec { kind: SpreadKind::Zc { root, shift }, n_lgp: 0, n_rgp: 0 }
    }

    pub fn with_guards(mut self, n_lgp: usize, n_rgp: usize) -> Self {
        self.n_lgp = n_lgp;
        self.n_rgp = n_rgp;
        self
    }

    pub fn validate(&self, n_seg: usize, n_bit: usize) -> Vec<ConfigViolation> {
        let mut v = Vec::new();
        if self.n_lgp + self.n_rgp >= n_seg {
            v.push(ConfigViolation::GuardOverflow {
                n_lgp: self.n_lgp,
                n_rgp: self.n_rgp,
                n_seg,
            });
            return v;
        }
        let interior = n_seg - self.n_lgp - self.n_rgp;
        match &self.kind {
            SpreadKind::Zc { root, shift } => {
                if root.gcd(&(interior as u64)) != 1 {
                    v.push(ConfigViolation::NonCoprimeRoot { root: *root, n_seg: interior });
                }
                if *shift >= interior {
                    v.push(ConfigViolation::ShiftOutOfRange { shift: *shift, n_seg: interior });
                }
            }
            SpreadKind::PhaseRamp { increment } => {
                if !increment.is_finite() {
                    v.push(ConfigViolation::NonFinite { name: "increment" });
                }
            }
            SpreadKind::Explicit { sequences } => {
                if sequences.len() != n_bit {
                    v.push(ConfigViolation::BadExplicitSequences {
                        detail: format!("expected {} sequences, got {}", n_bit, sequences.len()),
                    });
                } else if let Some(bad) = sequences.iter().find(|s| s.len() != n_seg) {
                    v.push(ConfigViolation::BadExplicitSequences {
                        detail: format!("sequence length {} does not match n_seg={}", bad.len(), n_seg),
                    });
                }
            }
            _ => {}
        }
        v
    }
}
