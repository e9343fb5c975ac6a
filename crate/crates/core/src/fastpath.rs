//! Closed-form frequency-domain generation.
//!
//! The precoder output factors into a bit part and a sequence part:
//! `D[k] = B(f_k) * R0(f_k)` at `f_k = (k + l_shift) - phi*n_symb/(2*pi)`,
//! where `B` is the short bit DFT (period `n_bit`) and `R0` the spectrum of
//! the overlaid sequence (period `n_symb`). Everything except `B` depends
//! only on the config, so a profile precomputed once per scenario turns
//! per-message generation into `n_sc` multiplies (integer-grid ramps) or an
//! `O(n_sc * n_bit)` sum (fractional ramps), with no FFT in the loop.

use crate::bits::{bit_spectrum_at, dft_coded_bits, BitsError, CodedBits};
use crate::config::{CheckedConfig, FdssSpec, SpreadingSpec};
use crate::fourier::{cis_turns, dft_forward};
use crate::precoder::{normalization_factor, resolve_fdss, PrecodeError, WusSymbol};
use crate::spreading::{OverlaidSequence, SpreadError, Spreading};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FastPathError {
    #[error("fast path requires a common overlaid sequence")]
    RequiresCommonOverlay,
    #[error("coded bit count {got} does not match n_bit={expected}")]
    BitCount { got: usize, expected: usize },
    #[error(transparent)]
    Bits(#[from] BitsError),
    #[error(transparent)]
    Spread(#[from] SpreadError),
    #[error(transparent)]
    Precode(#[from] PrecodeError),
}

/// Spectrum of the all-ones sequence of length `n_seg` on the `n_symb` grid,
/// `sum_m exp(-j*2*pi*f*m/n_symb)`, as a closed-form Dirichlet ratio with a
/// direct-sum fallback near the removable singularities.
pub fn all_ones_spectrum(f: f64, n_seg: usize, n_symb: usize) -> Complex64 {
    let denom = (PI * f / n_symb as f64).sin();
    if denom.abs() < 1e-8 {
        return (0..n_seg).map(|m| cis_turns(-f * m as f64 / n_symb as f64)).sum();
    }
    let numer = (PI * f * n_seg as f64 / n_symb as f64).sin();
    cis_turns(-f * (n_seg as f64 - 1.0) / (2.0 * n_symb as f64)) * (numer / denom)
}

/// Spectrum of an arbitrary overlaid sequence on the `n_symb` grid at a real
/// frequency argument.
pub fn r0_spectrum_at(r0: &[Complex64], f: f64, n_symb: usize) -> Complex64 {
    r0.iter()
        .enumerate()
        .map(|(m, rm)| rm * cis_turns(-f * m as f64 / n_symb as f64))
        .sum()
}

/// Interpolates the zero-padded `n_symb`-grid spectrum of a sequence from
/// its `n_seg`-point DFT `r0_prime`. On the coarse grid (`k = 0 mod n_bit`)
/// this is a lookup; off it, a Dirichlet-kernel sum over the short DFT.
pub fn interpolate_r0(r0_prime: &[Complex64], k: i64, n_symb: usize) -> Complex64 {
    let n_seg = r0_prime.len();
    let n_bit = (n_symb / n_seg) as i64;
    if k.rem_euclid(n_bit) == 0 {
        return r0_prime[(k / n_bit).rem_euclid(n_seg as i64) as usize];
    }
    let sum: Complex64 = r0_prime
        .iter()
        .enumerate()
        .map(|(h, rp)| rp * all_ones_spectrum((k - n_bit * h as i64) as f64, n_seg, n_symb))
        .sum();
    sum / n_seg as f64
}

enum Branch {
    /// The ramp lands on the integer grid: per-subcarrier coefficient plus
    /// an index into the `n_bit`-point bit DFT.
    Integer { bit_idx: Vec<usize> },
    /// Fractional ramp: the bit DFT is re-evaluated at `f_k` per message.
    Fractional { f: Vec<f64> },
}

/// Per-scenario precomputation for closed-form generation. Holds the window
/// and sequence spectrum folded into one coefficient per subcarrier; only
/// the bit DFT remains per message.
pub struct FdProfile {
    n_bit: usize,
    n_sc: usize,
    n_gb: usize,
    p_s: f64,
    coeff: Vec<Complex64>,
    branch: Branch,
}

impl FdProfile {
    /// Builds the profile from a resolved window and a common overlaid
    /// sequence. `O(n_sc * n_seg)` once, independent of the message count.
    pub fn new(cc: &CheckedConfig, w: &[Complex64], common: &OverlaidSequence) -> Self {
        let n_symb = cc.n_symb;
        let phi_cycles = common.phi * n_symb as f64 / TAU;
        let on_grid = (phi_cycles - phi_cycles.round()).abs() < 1e-9;
        let f_k: Vec<f64> =
            (0..cc.n_sc).map(|k| (k as i64 + cc.l_shift) as f64 - phi_cycles).collect();
        let (coeff, branch) = if on_grid {
            let shift = phi_cycles.round() as i64;
            // Integer-grid spectrum of r0 zero-padded to n_symb.
            let mut padded = vec![Complex64::new(0.0, 0.0); n_symb];
            padded[..common.r0.len()].copy_from_slice(&common.r0);
            dft_forward(&mut padded);
            let mut coeff = Vec::with_capacity(cc.n_sc);
            let mut bit_idx = Vec::with_capacity(cc.n_sc);
            for k in 0..cc.n_sc {
                let p = k as i64 + cc.l_shift - shift;
                coeff.push(w[k] * padded[p.rem_euclid(n_symb as i64) as usize]);
                bit_idx.push(p.rem_euclid(cc.n_bit as i64) as usize);
            }
            (coeff, Branch::Integer { bit_idx })
        } else {
            let coeff = f_k
                .iter()
                .enumerate()
                .map(|(k, &f)| w[k] * r0_spectrum_at(&common.r0, f, n_symb))
                .collect();
            (coeff, Branch::Fractional { f: f_k })
        };
        FdProfile { n_bit: cc.n_bit, n_sc: cc.n_sc, n_gb: cc.n_gb, p_s: cc.p_s, coeff, branch }
    }

    /// Builds a profile straight from the scenario specs.
    pub fn from_specs(
        cc: &CheckedConfig,
        fdss: &FdssSpec,
        spreading: &SpreadingSpec,
    ) -> Result<Self, FastPathError> {
        let resolved = resolve_fdss(fdss, cc)?;
        let phi = resolved.phi_override.unwrap_or(cc.phi);
        match spreading.build(cc.n_seg(), cc.n_bit, phi)? {
            Spreading::Common(common) => Ok(FdProfile::new(cc, &resolved.w, &common)),
            Spreading::PerBit(_) => Err(FastPathError::RequiresCommonOverlay),
        }
    }

    /// Per-message generation. Matches the main chain coefficient for
    /// coefficient, including normalization and the silent flag.
    pub fn generate(&self, coded: &CodedBits) -> Result<WusSymbol, FastPathError> {
        if coded.len() != self.n_bit {
            return Err(FastPathError::BitCount { got: coded.len(), expected: self.n_bit });
        }
        let raw: Vec<Complex64> = match &self.branch {
            Branch::Integer { bit_idx } => {
                let spec = dft_coded_bits(coded)?;
                self.coeff
                    .iter()
                    .zip(bit_idx)
                    .map(|(c, &i)| c * spec.values()[i])
                    .collect()
            }
            Branch::Fractional { f } => self
                .coeff
                .iter()
                .zip(f)
                .map(|(c, &fk)| c * bit_spectrum_at(coded, fk))
                .collect(),
        };
        Ok(match normalization_factor(&raw, self.p_s, self.n_sc, self.n_gb) {
            Some(eta) => WusSymbol {
                coefficients: raw.iter().map(|v| v * eta).collect(),
                eta,
                silent: false,
            },
            None => WusSymbol::silent(self.n_sc),
        })
    }

    pub fn is_integer_branch(&self) -> bool {
        matches!(self.branch, Branch::Integer { .. })
    }
}

/// One-shot closed-form generation, parallel to the main-path entry point.
pub fn fast_coefficients(
    bits: &[bool],
    cc: &CheckedConfig,
    fdss: &FdssSpec,
    spreading: &SpreadingSpec,
) -> Result<WusSymbol, FastPathError> {
    let profile = FdProfile::from_specs(cc, fdss, spreading)?;
    let coded = crate::precoder::coded_from_input(bits, cc)?;
    profile.generate(&coded)
}
