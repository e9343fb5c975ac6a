//! DFT precoding and frequency-domain post-processing.
//!
//! The main generation path: spread modulation symbols are DFT-precoded
//! over `n_symb` points, the output is cyclically shifted and extended onto
//! `n_sc` subcarriers, weighted by the spectral-shaping window, and scaled
//! so the allocation carries a fixed average power.
//!
//! The same frame has a time-domain reading as a train of band-limited
//! pulses: one pulse per modulation symbol, spaced `n_fft/n_symb` samples,
//! with the window as the pulse spectrum. [`pulse_kernel`] and
//! [`ook_symbol`] expose that view for analysis.

use crate::bits::{manchester_encode, CodedBits, InfoBits};
use crate::config::{CheckedConfig, FdssKind, FdssSpec};
use crate::fourier::{cis_turns, dft_forward, dft_inverse_to};
use crate::spreading::{spread_bits, SpreadError, Spreading};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PrecodeError {
    #[error("input length {got} does not match the precoder length {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("bit count {got} does not match the config ({expected})")]
    BitCount { got: usize, expected: usize },
    #[error(transparent)]
    Spread(#[from] SpreadError),
    #[error("ls-equivalent window: {0}")]
    LsWindow(String),
}

/// Unnormalized `n_x`-point DFT of the modulation symbols.
pub fn dft_precode(d: &[Complex64], n_x: usize) -> Result<Vec<Complex64>, PrecodeError> {
    if d.len() != n_x {
        return Err(PrecodeError::LengthMismatch { got: d.len(), expected: n_x });
    }
    let mut buf = d.to_vec();
    dft_forward(&mut buf);
    Ok(buf)
}

/// Modified Bessel function of the first kind, order zero, by power series.
/// Converges in a handful of terms for the beta range used here.
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Kaiser taper over the allocation, peak-normalized:
/// `W_R[k] = I0(beta*sqrt(1 - ((k-g)/g)^2)) / I0(beta)`, `g = (n_sc-1)/2`.
pub fn kaiser_window(n_sc: usize, beta: f64) -> Vec<f64> {
    if n_sc <= 1 {
        return vec![1.0; n_sc];
    }
    let gamma = (n_sc as f64 - 1.0) / 2.0;
    let denom = bessel_i0(beta);
    (0..n_sc)
        .map(|k| {
            let t = (k as f64 - gamma) / gamma;
            bessel_i0(beta * (1.0 - t * t).max(0.0).sqrt()) / denom
        })
        .collect()
}

/// A fully resolved shaping window: per-subcarrier complex weights with the
/// time-shift phase folded in, plus a phase-ramp override for window kinds
/// that fix the ramp themselves.
#[derive(Debug, Clone)]
pub struct ResolvedFdss {
    pub w: Vec<Complex64>,
    pub phi_override: Option<f64>,
}

/// Resolves a window spec against a config. The time-shift linear phase
/// `exp(-j*2*pi*t_shift*k/n_fft)` is applied here.
pub fn resolve_fdss(fdss: &FdssSpec, cc: &CheckedConfig) -> Result<ResolvedFdss, PrecodeError> {
    let n_sc = cc.n_sc;
    let n_fft = cc.n_fft;
    let t_shift = fdss.resolved_t_shift(n_fft, cc.n_symb);
    let shift_phase =
        |k: usize| -> Complex64 { cis_turns(-t_shift * k as f64 / n_fft as f64) };
    match &fdss.kind {
        FdssKind::None => Ok(ResolvedFdss {
            w: (0..n_sc).map(shift_phase).collect(),
            phi_override: None,
        }),
        FdssKind::Kaiser { beta } => {
            let taper = kaiser_window(n_sc, *beta);
            Ok(ResolvedFdss {
                w: taper.iter().enumerate().map(|(k, &t)| shift_phase(k) * t).collect(),
                phi_override: None,
            })
        }
        FdssKind::Explicit { coefficients } => {
            if coefficients.len() != n_sc {
                return Err(PrecodeError::LengthMismatch {
                    got: coefficients.len(),
                    expected: n_sc,
                });
            }
            Ok(ResolvedFdss {
                w: coefficients
                    .iter()
                    .enumerate()
                    .map(|(k, &(re, im))| shift_phase(k) * Complex64::new(re, im))
                    .collect(),
                phi_override: None,
            })
        }
        FdssKind::LsEquivalent => {
            let eq = crate::ls::ls_equivalent_fdss(cc.n_symb, n_sc, n_fft, cc.l_shift)
                .map_err(|e| PrecodeError::LsWindow(e.to_string()))?;
            let t_shift = fdss.t_shift.unwrap_or(eq.t_shift);
            let w = eq
                .coefficients
                .iter()
                .enumerate()
                .map(|(k, c)| cis_turns(-t_shift * k as f64 / n_fft as f64) * c)
                .collect();
            Ok(ResolvedFdss { w, phi_override: Some(eq.phi) })
        }
    }
}

/// Frequency-domain post-processing: cyclic shift by `l_shift`, periodic
/// spectrum extension onto `n_sc` outputs, window and scale:
/// `X[k] = eta * w[k] * d_spec[(k + l_shift) mod n_symb]`.
pub fn fd_postprocess(
    d_spec: &[Complex64],
    w: &[Complex64],
    l_shift: i64,
    eta: f64,
) -> Vec<Complex64> {
    let n_symb = d_spec.len() as i64;
    w.iter()
        .enumerate()
        .map(|(k, wk)| {
            let idx = (k as i64 + l_shift).rem_euclid(n_symb) as usize;
            wk * d_spec[idx] * eta
        })
        .collect()
}

/// Scale factor that pins the allocation power:
/// `sum_k |eta*X[k]|^2 = p_s * (n_sc + 2*n_gb)`. Returns `None` for an
/// all-zero frame (an OFF-only message transmits silence).
pub fn normalization_factor(frame: &[Complex64], p_s: f64, n_sc: usize, n_gb: usize) -> Option<f64> {
    let energy: f64 = frame.iter().map(|v| v.norm_sqr()).sum();
    if energy <= 0.0 {
        return None;
    }
    Some((p_s * (n_sc + 2 * n_gb) as f64 / energy).sqrt())
}

/// Time-domain pulse kernel `h[n] = sum_k w[k] exp(j*2*pi*k*n/n_fft)`,
/// evaluated on the integer grid by a zero-padded inverse DFT.
pub fn pulse_kernel(w: &[Complex64], n_fft: usize) -> Vec<Complex64> {
    let mut padded = vec![Complex64::new(0.0, 0.0); n_fft];
    padded[..w.len()].copy_from_slice(w);
    dft_inverse_to(&padded)
}

/// The same kernel at a real-valued sample offset; pulse centers fall on
/// the fractional grid `m * n_fft / n_symb`.
pub fn pulse_kernel_at(w: &[Complex64], n_fft: usize, t: f64) -> Complex64 {
    w.iter()
        .enumerate()
        .map(|(k, wk)| wk * cis_turns(k as f64 * t / n_fft as f64))
        .sum()
}

/// Time-domain OOK symbol `l`: the pulse group carrying bit `l` over one
/// OFDM symbol, `O_l[n] = sum_m r[m + l*n_seg] g_{m+l*n_seg}[n]`.
pub fn ook_symbol(
    l: usize,
    spreading: &Spreading,
    w: &[Complex64],
    cc: &CheckedConfig,
) -> Result<Vec<Complex64>, PrecodeError> {
    let n_seg = cc.n_seg();
    let n_fft = cc.n_fft;
    let n_symb = cc.n_symb as f64;
    let spacing = cc.pulse_spacing_f64();
    let seq: Vec<Complex64> = match spreading {
        Spreading::Common(common) => (0..n_seg)
            .map(|m| {
                let m_abs = (l * n_seg + m) as f64;
                cis_turns(common.phi * m_abs / std::f64::consts::TAU) * common.r0[m]
            })
            .collect(),
        Spreading::PerBit(seqs) =>

            seqs.get(l)
                .ok_or(PrecodeError::BitCount { got: l, expected: seqs.len() })?
                .clone(),
    };
    let mut out = vec![Complex64::new(0.0, 0.0); n_fft];
    for (m, rm) in seq.iter().enumerate() {
        if rm.norm_sqr() == 0.0 {
            continue;
        }
        let m_abs = (l * n_seg + m) as f64;
        let pulse_phase = cis_turns(-(cc.l_shift as f64) * m_abs / n_symb);
        let center = m_abs * spacing;
        for (n, o) in out.iter_mut().enumerate() {
            *o += rm * pulse_phase * pulse_kernel_at(w, n_fft, n as f64 - center);
        }
    }
    Ok(out)
}

/// One generated OOK frame: the `n_sc` subcarrier coefficients, the applied
/// scale, and whether the frame was all OFF.
#[derive(Debug, Clone, PartialEq)]
pub struct WusSymbol {
    pub coefficients: Vec<Complex64>,
    pub eta: f64,
    pub silent: bool,
}

impl WusSymbol {
    pub fn silent(n_sc: usize) -> Self {
        WusSymbol { coefficients: vec![Complex64::new(0.0, 0.0); n_sc], eta: 0.0, silent: true }
    }
}

/// Interprets raw input bits per the config: info bits under Manchester
/// coding, coded bits otherwise.
pub fn coded_from_input(bits: &[bool], cc: &CheckedConfig) -> Result<CodedBits, PrecodeError> {
    if cc.manchester {
        let n_bo = cc.n_bo().expect("manchester config has n_bo");
        if bits.len() != n_bo {
            return Err(PrecodeError::BitCount { got: bits.len(), expected: n_bo });
        }
        Ok(manchester_encode(&InfoBits(bits.to_vec())))
    } else {
        if bits.len() != cc.n_bit {
            return Err(PrecodeError::BitCount { got: bits.len(), expected: cc.n_bit });
        }
        Ok(CodedBits(bits.to_vec()))
    }
}

/// Main-path frame generation from already-built spreading and window.
pub fn generate_frame(
    coded: &CodedBits,
    cc: &CheckedConfig,
    w: &[Complex64],
    spreading: &Spreading,
) -> Result<WusSymbol, PrecodeError> {
    let d = spread_bits(coded, spreading, cc.n_symb)?;
    let spec = dft_precode(&d.d, cc.n_symb)?;
    let raw = fd_postprocess(&spec, w, cc.l_shift, 1.0);
    match normalization_factor(&raw, cc.p_s, cc.n_sc, cc.n_gb) {
        Some(eta) => Ok(WusSymbol {
            coefficients: raw.iter().map(|v| v * eta).collect(),
            eta,
            silent: false,
        }),
        None => Ok(WusSymbol::silent(cc.n_sc)),
    }
}

/// End-to-end main path: code the bits, build the spreading, precode,
/// post-process, normalize.
pub fn generate_wus_symbol(
    bits: &[bool],
    cc: &CheckedConfig,
    fdss: &FdssSpec,
    spreading_spec: &crate::config::SpreadingSpec,
) -> Result<WusSymbol, PrecodeError> {
    let resolved = resolve_fdss(fdss, cc)?;
    let phi = resolved.phi_override.unwrap_or(cc.phi);
    let spreading = spreading_spec.build(cc.n_seg(), cc.n_bit, phi)?;
    let coded = coded_from_input(bits, cc)?;
    generate_frame(&coded, cc, &resolved.w, &spreading)
}
