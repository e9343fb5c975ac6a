//! Envelope-detection receiver chain.
//!
//! The low-power receiver never equalizes: it band-limits the complex
//! baseband, takes the magnitude, smooths it, decimates to the ADC rate,
//! normalizes per OFDM symbol (AGC), quantizes, and decides Manchester
//! bits by comparing window sums. Both filters are Butterworth low-passes
//! because the WUS sits centered at baseband; the band-pass role of the
//! first filter is played by its low-pass equivalent.

use crate::config::CheckedConfig;
use crate::ofdm::SymbolBoundary;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ReceiverError {
    #[error("cutoff {cutoff} Hz outside (0, {nyquist}) Hz")]
    BadCutoff { cutoff: f64, nyquist: f64 },
    #[error("filter order must be at least 1")]
    BadOrder,
    #[error("downsample factor must be a positive integer, got {0}")]
    BadDownsample(usize),
    #[error("symbol layout (cp={cp}, body={body}) does not align with downsampling by {ds}")]
    NotAligned { cp: usize, body: usize, ds: usize },
    #[error("body of {body} ADC samples does not split into {n_bit} windows")]
    BodyNotDivisible { body: usize, n_bit: usize },
    #[error("window of {window} ADC samples too small for trims ({left}, {right})")]
    WindowTooSmall { window: usize, left: usize, right: usize },
    #[error("manchester detection needs an even bit count, got {0}")]
    OddBits(usize),
}

/// One biquad (or degenerate first-order) section, `a0` normalized to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sos {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

/// Cascade of second-order sections with real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct IirFilter {
    pub sections: Vec<Sos>,
}

/// Butterworth low-pass of the given order via bilinear transform with
/// frequency prewarping, factored into stable second-order sections.
pub fn butterworth_lowpass(
    order: usize,
    cutoff: f64,
    sample_rate: f64,
) -> Result<IirFilter, ReceiverError> {
    if order == 0 {
        return Err(ReceiverError::BadOrder);
    }
    let nyquist = sample_rate / 2.0;
    if !(cutoff > 0.0) || cutoff >= nyquist {
        return Err(ReceiverError::BadCutoff { cutoff, nyquist });
    }
    // Prewarped analog cutoff; k = cot(pi*fc/fs).
    let k = 1.0 / (PI * cutoff / sample_rate).tan();
    let mut sections = Vec::new();
    if order % 2 == 1 {
        let a0 = k + 1.0;
        sections.push(Sos {
            b: [1.0 / a0, 1.0 / a0, 0.0],
            a: [1.0, (1.0 - k) / a0, 0.0],
        });
    }
    for m in 0..order / 2 {
        // Conjugate analog pole pair at angle pi*(2m+order+1)/(2*order).
        let theta = PI * (2 * m + order + 1) as f64 / (2 * order) as f64;
        let alpha = -2.0 * theta.cos();
        let a0 = k * k + alpha * k + 1.0;
        sections.push(Sos {
            b: [1.0 / a0, 2.0 / a0, 1.0 / a0],
            a: [1.0, (2.0 - 2.0 * k * k) / a0, (k * k - alpha * k + 1.0) / a0],
        });
    }
    Ok(IirFilter { sections })
}

fn run_section<T>(sos: &Sos, x: &[T]) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    // Direct form II transposed.
    let (mut s1, mut s2) = (T::default(), T::default());
    x.iter()
        .map(|&xn| {
            let y = xn * sos.b[0] + s1;
            s1 = xn * sos.b[1] - y * sos.a[1] + s2;
            s2 = xn * sos.b[2] - y * sos.a[2];
            y
        })
        .collect()
}

impl IirFilter {
    pub fn apply_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.sections.iter().fold(x.to_vec(), |buf, s| run_section(s, &buf))
    }

    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        self.sections.iter().fold(x.to_vec(), |buf, s| run_section(s, &buf))
    }

    /// Frequency response at `freq` Hz for a `sample_rate` Hz stream.
    pub fn response(&self, freq: f64, sample_rate: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * freq / sample_rate);
        self.sections.iter().fold(Complex64::new(1.0, 0.0), |h, s| {
            let num = Complex64::new(s.b[0], 0.0) + z_inv * s.b[1] + z_inv * z_inv * s.b[2];
            let den = Complex64::new(s.a[0], 0.0) + z_inv * s.a[1] + z_inv * z_inv * s.a[2];
            h * num / den
        })
    }
}

/// Per-sample magnitude.
pub fn envelope(x: &[Complex64]) -> Vec<f64> {
    x.iter().map(|v| v.norm()).collect()
}

/// AGC + uniform mid-rise quantizer on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AgcOutput {
    pub samples: Vec<f64>,
    pub peak: f64,
    /// All-zero input: nothing to normalize, samples passed through as zeros.
    pub silent: bool,
}

pub fn agc_quantize(env: &[f64], bits: u32) -> AgcOutput {
    let peak = env.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return AgcOutput { samples: vec![0.0; env.len()], peak: 0.0, silent: true };
    }
    let levels = (1u64 << bits) as f64;
    let samples = env
        .iter()
        .map(|&v| {
            let level = ((v / peak) * levels).floor().min(levels - 1.0);
            (level + 0.5) / levels
        })
        .collect();
    AgcOutput { samples, peak, silent: false }
}

/// Decisions and diagnostics for one OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub info_bits: Vec<bool>,
    pub window_sums: Vec<f64>,
}

/// Per-window energies of one symbol body: `n_bit` equal windows, each
/// trimmed by `trim` samples on its sides before summing.
fn window_sums(
    body: &[f64],
    n_bit: usize,
    trim: (usize, usize),
) -> Result<Vec<f64>, ReceiverError> {
    if body.is_empty() || n_bit == 0 || body.len() % n_bit != 0 {
        return Err(ReceiverError::BodyNotDivisible { body: body.len(), n_bit });
    }
    let window = body.len() / n_bit;
    if trim.0 + trim.1 >= window {
        return Err(ReceiverError::WindowTooSmall { window, left: trim.0, right: trim.1 });
    }
    Ok((0..n_bit)
        .map(|w| body[w * window + trim.0..(w + 1) * window - trim.1].iter().sum())
        .collect())
}

/// Energy-comparison Manchester decoding over one symbol body at ADC rate:
/// split into `n_bit` windows (optionally trimmed on each side), sum each,
/// and decide each info bit by comparing its pair of windows. A larger
/// second-half sum decides 1; ties decide 0.
pub fn detect_manchester(
    body: &[f64],
    n_bit: usize,
    trim: (usize, usize),
) -> Result<DetectionResult, ReceiverError> {
    if n_bit == 0 || n_bit % 2 != 0 {
        return Err(ReceiverError::OddBits(n_bit));
    }
    let window_sums = window_sums(body, n_bit, trim)?;
    let info_bits = window_sums.chunks(2).map(|pair| pair[1] > pair[0]).collect();
    Ok(DetectionResult { info_bits, window_sums })
}

/// Threshold decoding for uncoded OOK: each window is ON when its sum
/// exceeds half the largest window sum. Ties and silent symbols decide
/// OFF, matching the Manchester tie rule.
pub fn detect_threshold(
    body: &[f64],
    n_bit: usize,
    trim: (usize, usize),
) -> Result<DetectionResult, ReceiverError> {
    let window_sums = window_sums(body, n_bit, trim)?;
    let threshold = 0.5 * window_sums.iter().cloned().fold(0.0, f64::max);
    let info_bits = window_sums.iter().map(|&s| s > threshold).collect();
    Ok(DetectionResult { info_bits, window_sums })
}

/// Uniform timing error in seconds over `[-tau_err, tau_err]`.
pub fn draw_timing_offset<R: Rng + ?Sized>(tau_err: f64, rng: &mut R) -> f64 {
    if tau_err <= 0.0 {
        return 0.0;
    }
    rng.gen_range(-tau_err..=tau_err)
}

/// Nearest whole ADC sample for a timing error in seconds.
pub fn offset_to_adc_samples(tau: f64, adc_rate: f64) -> i64 {
    (tau * adc_rate).round() as i64
}

/// Receiver parameterization. Cutoffs default to half the modulated WUS
/// bandwidth (`n_sc * f_sc / 2`) for both filter roles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverConfig {
    #[serde(default = "default_order")]
    pub filter_order: usize,
    #[serde(default)]
    pub bpf_cutoff: Option<f64>,
    #[serde(default)]
    pub lpf_cutoff: Option<f64>,
    #[serde(default = "default_adc_bits")]
    pub adc_bits: u32,
    #[serde(default = "default_downsample")]
    pub downsample: usize,
    /// Maximum timing error in seconds (uniform draw).
    #[serde(default)]
    pub tau_err: f64,
    /// Detection-window concentration: (left, right) ADC samples trimmed
    /// from every OOK window.
    #[serde(default)]
    pub window_trim: Option<(usize, usize)>,
}

fn default_order() -> usize {
    3
}
fn default_adc_bits() -> u32 {
    4
}
fn default_downsample() -> usize {
    4
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        ReceiverConfig {
            filter_order: 3,
            bpf_cutoff: None,
            lpf_cutoff: None,
            adc_bits: 4,
            downsample: 4,
            tau_err: 0.0,
            window_trim: None,
        }
    }
}

/// Staged receiver outputs for tracing.
#[derive(Debug, Clone, PartialEq)]
pub struct RxStages {
    pub filtered: Vec<Complex64>,
    pub envelope: Vec<f64>,
    pub smoothed: Vec<f64>,
    pub adc: Vec<f64>,
}

/// Message-level decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageDetection {
    pub info_bits: Vec<bool>,
    pub symbols: Vec<DetectionResult>,
}

/// Prepared filters plus layout for one scenario.
#[derive(Debug, Clone)]
pub struct ReceiverChain {
    bpf: IirFilter,
    lpf: IirFilter,
    ds: usize,
    adc_bits: u32,
    n_bit: usize,
    manchester: bool,
    trim: (usize, usize),
    adc_rate: f64,
}

impl ReceiverChain {
    pub fn new(rcfg: &ReceiverConfig, cc: &CheckedConfig) -> Result<Self, ReceiverError> {
        if rcfg.downsample == 0 {
            return Err(ReceiverError::BadDownsample(0));
        }
        let fs = cc.sample_rate();
        let wus_bw = cc.n_sc as f64 * cc.f_sc;
        let bpf = butterworth_lowpass(
            rcfg.filter_order,
            rcfg.bpf_cutoff.unwrap_or(wus_bw / 2.0),
            fs,
        )?;
        let lpf = butterworth_lowpass(
            rcfg.filter_order,
            rcfg.lpf_cutoff.unwrap_or(wus_bw / 2.0),
            fs,
        )?;
        Ok(ReceiverChain {
            bpf,
            lpf,
            ds: rcfg.downsample,
            adc_bits: rcfg.adc_bits,
            n_bit: cc.n_bit,
            manchester: cc.manchester,
            trim: rcfg.window_trim.unwrap_or((0, 0)),
            adc_rate: fs / rcfg.downsample as f64,
        })
    }

    pub fn adc_rate(&self) -> f64 {
        self.adc_rate
    }

    pub fn trim(&self) -> (usize, usize) {
        self.trim
    }

    /// Front end through the ADC stream: filter, envelope, smooth,
    /// decimate.
    pub fn stages(&self, rx: &[Complex64]) -> RxStages {
        let filtered = self.bpf.apply_complex(rx);
        let env = envelope(&filtered);
        let smoothed = self.lpf.apply_real(&env);
        let adc = smoothed.iter().step_by(self.ds).copied().collect();
        RxStages { filtered, envelope: env, smoothed, adc }
    }

    /// Full receiver: per symbol, read the body span at the (erroneous)
    /// receiver timing, AGC-normalize and quantize it, and decode.
    pub fn process_message(
        &self,
        rx: &[Complex64],
        boundaries: &[SymbolBoundary],
        offset_adc: i64,
    ) -> Result<MessageDetection, ReceiverError> {
        let adc = self.stages(rx).adc;
        let mut info_bits = Vec::new();
        let mut symbols = Vec::with_capacity(boundaries.len());
        for b in boundaries {
            if b.body_start() % self.ds != 0 || b.body_len % self.ds != 0 {
                return Err(ReceiverError::NotAligned {
                    cp: b.cp_len,
                    body: b.body_len,
                    ds: self.ds,
                });
            }
            let start = (b.body_start() / self.ds) as i64 + offset_adc;
            let body_adc = b.body_len / self.ds;
            let span: Vec<f64> = (start..start + body_adc as i64)
                .map(|i| {
                    if i >= 0 && (i as usize) < adc.len() {
                        adc[i as usize]
                    } else {
                        0.0
                    }
                })
                .collect();
            let agc = agc_quantize(&span, self.adc_bits);
            let det = if self.manchester {
                detect_manchester(&agc.samples, self.n_bit, self.trim)?
            } else {
                detect_threshold(&agc.samples, self.n_bit, self.trim)?
            };
            info_bits.extend_from_slice(&det.info_bits);
            symbols.push(det);
        }
        Ok(MessageDetection { info_bits, symbols })
    }
}
