//! Overlaid sequences and bit spreading.
//!
//! Each OOK bit is repeated over `n_seg` modulation symbols and multiplied
//! by an overlaid sequence `r[m] = exp(j*phi*m) * r0[m mod n_seg]`. The
//! phase-ramp increment `phi` controls where the precoder output sits and
//! how the per-bit pulses combine; `r0` trades envelope flatness within a
//! bit against frequency diversity.

use crate::bits::CodedBits;
use crate::config::{ConfigViolation, SpreadKind, SpreadingSpec};
use crate::fourier::cis_turns;
use crate::rng;
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpreadError {
    #[error("spreading spec invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ConfigViolation>),
    #[error("coded bit count {got} does not match n_bit={n_bit}")]
    BitCountMismatch { got: usize, n_bit: usize },
    #[error("lambda must be a nonzero integer")]
    ZeroLambda,
    #[error("guard dimensioning exceeds the sequence: n_lgp={n_lgp} + n_rgp={n_rgp} >= n_seg={n_seg}")]
    GuardOverflow { n_lgp: usize, n_rgp: usize, n_seg: usize },
    #[error("sequence too short")]
    TooShort,
}

/// A common overlaid sequence: one `r0` shared by every bit plus the global
/// phase ramp.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlaidSequence {
    pub r0: Vec<Complex64>,
    pub phi: f64,
}

/// Built spreading: either a common overlaid sequence (fast-path capable)
/// or one explicit sequence per bit.
#[derive(Debug, Clone, PartialEq)]
pub enum Spreading {
    Common(OverlaidSequence),
    PerBit(Vec<Vec<Complex64>>),
}

impl Spreading {
    pub fn n_seg(&self) -> usize {
        match self {
            Spreading::Common(seq) => seq.r0.len(),
            Spreading::PerBit(seqs) => seqs.first().map_or(0, |s| s.len()),
        }
    }

    pub fn as_common(&self) -> Option<&OverlaidSequence> {
        match self {
            Spreading::Common(seq) => Some(seq),
            Spreading::PerBit(_) => None,
        }
    }
}

/// Zadoff-Chu sequence `r0[m] = exp(-j*pi*u*(m+s)*(m+s+delta)/n_seg)` with
/// `delta = n_seg mod 2`. Constant modulus with a constant-magnitude DFT.
pub fn zc_sequence(n_seg: usize, root: u64, shift: usize) -> Result<Vec<Complex64>, SpreadError> {
    let mut violations = Vec::new();
    if num_integer::gcd(root, n_seg as u64) != 1 {
        violations.push(ConfigViolation::NonCoprimeRoot { root, n_seg });
    }
    if shift >= n_seg {
        violations.push(ConfigViolation::ShiftOutOfRange { shift, n_seg });
    }
    if !violations.is_empty() {
        return Err(SpreadError::Invalid(violations));
    }
    let delta = (n_seg % 2) as f64;
    let n = n_seg as f64;
    Ok((0..n_seg)
        .map(|m| {
            let ms = (m + shift) as f64;
            // exp(-j*pi*u*ms*(ms+delta)/n) expressed in turns of 2*pi
            cis_turns(-(root as f64) * ms * (ms + delta) / (2.0 * n))
        })
        .collect())
}

/// Phase increments `angle(r0[m]/r0[m-1])` of a unit-modulus sequence,
/// wrapped to (-pi, pi]. Zeroed entries are rejected.
pub fn zc_phase_increments(r0: &[Complex64]) -> Result<Vec<f64>, SpreadError> {
    if r0.len() < 2 {
        return Err(SpreadError::TooShort);
    }
    if r0.iter().any(|v| v.norm() < 1e-12) {
        return Err(SpreadError::TooShort);
    }
    Ok(r0.windows(2).map(|w| (w[1] / w[0]).arg()).collect())
}

/// Unit-modulus random sequence with phases drawn independently per index
/// from a counter-based stream keyed by `(seed, m)`.
pub fn random_overlaid(n_seg: usize, seed: u64) -> Vec<Complex64> {
    (0..n_seg)
        .map(|m| {
            let u = rng::unit_from_u64(rng::derive_seed(seed, &[m as u64]));
            cis_turns(u)
        })
        .collect()
}

/// Builds the overlaid sequence for a parametric family with `n_lgp` left
/// and `n_rgp` right guard pulses. The interior is rebuilt from the family
/// at the effective length `n_seg - n_lgp - n_rgp`, so a guarded ZC keeps
/// its constant-magnitude spectrum at the reduced length.
pub fn with_guard_pulses(
    kind: &SpreadKind,
    n_seg: usize,
    n_lgp: usize,
    n_rgp: usize,
) -> Result<Vec<Complex64>, SpreadError> {
    if n_lgp + n_rgp >= n_seg {
        return Err(SpreadError::GuardOverflow { n_lgp, n_rgp, n_seg });
    }
    let interior = n_seg - n_lgp - n_rgp;
    let core = match kind {
        SpreadKind::AllOne => vec![Complex64::new(1.0, 0.0); interior],
        SpreadKind::PhaseRamp { increment } => (0..interior)
            .map(|m| cis_turns(increment * m as f64 / std::f64::consts::TAU))
            .collect(),
        SpreadKind::Zc { root, shift } => zc_sequence(interior, *root, *shift)?,
        SpreadKind::Random { seed } => random_overlaid(interior, *seed),
        SpreadKind::Explicit { .. } => {
            return Err(SpreadError::Invalid(vec![ConfigViolation::BadExplicitSequences {
                detail: "explicit sequences take no parametric guard rebuild".into(),
            }]))
        }
    };
    let mut r0 = vec![Complex64::new(0.0, 0.0); n_seg];
    r0[n_lgp..n_lgp + interior].copy_from_slice(&core);
    Ok(r0)
}

impl SpreadingSpec {
    /// Materializes the spreading for a given segment length and phase ramp.
    pub fn build(&self, n_seg: usize, n_bit: usize, phi: f64) -> Result<Spreading, SpreadError> {
        let violations = self.validate(n_seg, n_bit);
        if !violations.is_empty() {
            return Err(SpreadError::Invalid(violations));
        }
        match &self.kind {
            SpreadKind::Explicit { sequences } => {
                let mut seqs: Vec<Vec<Complex64>> = sequences
                    .iter()
                    .map(|s| s.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
                    .collect();
                for s in &mut seqs {
                    for m in 0..self.n_lgp.min(s.len()) {
                        s[m] = Complex64::new(0.0, 0.0);
                    }
                    let len = s.len();
                    for m in len.saturating_sub(self.n_rgp)..len {
                        s[m] = Complex64::new(0.0, 0.0);
                    }
                }
                Ok(Spreading::PerBit(seqs))
            }
            kind => {
                let r0 = with_guard_pulses(kind, n_seg, self.n_lgp, self.n_rgp)?;
                Ok(Spreading::Common(OverlaidSequence { r0, phi }))
            }
        }
    }
}

/// Phase-ramp increment that flattens the ON-symbol envelope by shifting
/// the precoder output to the middle of the allocation:
/// `phi = pi*(2*l_shift + n_sc - 1)/n_symb`.
pub fn flatten_phase(n_sc: usize, n_symb: usize, l_shift: i64) -> f64 {
    PI * (2.0 * l_shift as f64 + n_sc as f64 - 1.0) / n_symb as f64
}

/// Phase-ramp increment that forces a spectral null on subcarrier `k_null`:
/// `phi = (2*pi/n_symb)*(k_null - lambda*n_bit)` for any nonzero integer
/// `lambda`. The null lands where the bit DFT is sampled on its comb zeros.
pub fn zero_dc_phase(
    k_null: i64,
    lambda: i64,
    n_bit: usize,
    n_symb: usize,
) -> Result<f64, SpreadError> {
    if lambda == 0 {
        return Err(SpreadError::ZeroLambda);
    }
    Ok(std::f64::consts::TAU * (k_null - lambda * n_bit as i64) as f64 / n_symb as f64)
}

/// Guard-pulse counts covering a timing-error budget `tau_err` on the left
/// and timing error plus channel delay spread `tau_h` on the right, rounded
/// half-up to whole pulses.
pub fn guard_pulse_dimensioning(
    tau_err: f64,
    tau_h: f64,
    n_symb: usize,
    f_sc: f64,
    n_seg: usize,
) -> Result<(usize, usize), SpreadError> {
    let n_lgp = (tau_err * n_symb as f64 * f_sc).round() as usize;
    let n_rgp = ((tau_err + tau_h) * n_symb as f64 * f_sc).round() as usize;
    if n_lgp + n_rgp >= n_seg {
        return Err(SpreadError::GuardOverflow { n_lgp, n_rgp, n_seg });
    }
    Ok((n_lgp, n_rgp))
}

/// Modulation symbols entering the DFT precoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationSymbols {
    pub d: Vec<Complex64>,
}

/// Spreads coded bits over `n_symb` modulation symbols:
/// `d[m] = b[floor(m/n_seg)] * r[m]` with the overlaid sequence applied.
pub fn spread_bits(
    coded: &CodedBits,
    spreading: &Spreading,
    n_symb: usize,
) -> Result<ModulationSymbols, SpreadError> {
    let n_bit = coded.len();
    let n_seg = spreading.n_seg();
    if n_bit == 0 || n_seg == 0 || n_bit * n_seg != n_symb {
        return Err(SpreadError::BitCountMismatch { got: n_bit, n_bit: n_symb / n_seg.max(1) });
    }
    let mut d = Vec::with_capacity(n_symb);
    match spreading {
        Spreading::Common(seq) => {
            for m in 0..n_symb {
                let l = m / n_seg;
                if coded.0[l] {
                    let ramp = cis_turns(seq.phi * m as f64 / std::f64::consts::TAU);
                    d.push(ramp * seq.r0[m % n_seg]);
                } else {
                    d.push(Complex64::new(0.0, 0.0));
                }
            }
        }
        Spreading::PerBit(seqs) => {
            if seqs.len() != n_bit {
                return Err(SpreadError::BitCountMismatch { got: seqs.len(), n_bit });
            }
            for m in 0..n_symb {
                let l = m / n_seg;
                d.push(if coded.0[l] { seqs[l][m % n_seg] } else { Complex64::new(0.0, 0.0) });
            }
        }
    }
    Ok(ModulationSymbols { d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::dft_forward_to;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zc_length_three_golden() {
        let r0 = zc_sequence(3, 1, 0).unwrap();
        assert!((r0[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((r0[1] - cis_turns(-1.0 / 3.0)).norm() < 1e-12); // exp(-j*2*pi/3)
        assert!((r0[2] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zc_is_unit_modulus_with_flat_dft() {
        for (n_seg, root, shift) in [(33usize, 1u64, 0usize), (33, 17, 0), (36, 35, 18), (16, 5, 3)] {
            let r0 = zc_sequence(n_seg, root, shift).unwrap();
            for v in &r0 {
                assert!((v.norm() - 1.0).abs() < 1e-12);
            }
            let spec = dft_forward_to(&r0);
            for v in &spec {
                assert!(
                    (v.norm_sqr() - n_seg as f64).abs() < 1e-9 * n_seg as f64,
                    "|R0'|^2 = {} for n_seg={n_seg} u={root}",
                    v.norm_sqr()
                );
            }
        }
    }

    #[test]
    fn zc_rejects_bad_parameters() {
        assert!(matches!(zc_sequence(33, 11, 0), Err(SpreadError::Invalid(_))));
        assert!(matches!(zc_sequence(8, 3, 9), Err(SpreadError::Invalid(_))));
    }

    #[test]
    fn zc_phase_increments_match_the_closed_form() {
        let (n_seg, root, shift) = (36usize, 5u64, 2usize);
        let r0 = zc_sequence(n_seg, root, shift).unwrap();
        let dth = zc_phase_increments(&r0).unwrap();
        let delta = (n_seg % 2) as f64;
        for (m, got) in dth.iter().enumerate() {
            let m = m + 1;
            let want = -PI * root as f64 * (2.0 * (m + shift) as f64 - 1.0 + delta) / n_seg as f64;
            let diff = (got - want).rem_euclid(std::f64::consts::TAU);
            let diff = diff.min(std::f64::consts::TAU - diff);
            assert!(diff < 1e-10, "m={m}: {got} vs {want}");
        }
    }

    #[test]
    fn zc_u1_increment_deviation_peaks_at_the_ends() {
        // The step size drifts away from pi fastest at the sequence edges,
        // which is what the guard pulses remove.
        let r0 = zc_sequence(36, 1, 0).unwrap();
        let dev: Vec<f64> = zc_phase_increments(&r0)
            .unwrap()
            .iter()
            .map(|&t| {
                let d = (t - PI).rem_euclid(std::f64::consts::TAU);
                d.min(std::f64::consts::TAU - d)
            })
            .collect();
        let mid = dev[dev.len() / 2];
        assert!(dev[0] > mid && dev[dev.len() - 1] > mid);
        let max = dev.iter().cloned().fold(0.0, f64::max);
        assert!(max == dev[0] || max == dev[dev.len() - 1]);
    }

    #[test]
    fn random_overlaid_is_reproducible_and_unit_modulus() {
        let a = random_overlaid(33, 9);
        let b = random_overlaid(33, 9);
        assert_eq!(a, b);
        assert_ne!(a, random_overlaid(33, 10));
        for v in &a {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_overlaid_dft_power_averages_to_n_seg() {
        let n_seg = 16usize;
        let draws = 10_000usize;
        let mut acc = vec![0.0; n_seg];
        for seed in 0..draws {
            let spec = dft_forward_to(&random_overlaid(n_seg, seed as u64));
            for (a, v) in acc.iter_mut().zip(&spec) {
                *a += v.norm_sqr();
            }
        }
        for a in &acc {
            let mean = a / draws as f64;
            assert!(
                (mean - n_seg as f64).abs() < 0.02 * n_seg as f64,
                "mean DFT power {mean}"
            );
        }
    }

    #[test]
    fn guard_pulses_zero_the_edges_and_rebuild_the_interior() {
        let r0 = with_guard_pulses(&SpreadKind::Zc { root: 1, shift: 0 }, 33, 7, 11).unwrap();
        assert_eq!(r0.len(), 33);
        for m in 0..7 {
            assert_eq!(r0[m], c(0.0, 0.0));
        }
        for m in 22..33 {
            assert_eq!(r0[m], c(0.0, 0.0));
        }
        let interior = zc_sequence(15, 1, 0).unwrap();
        for (a, b) in r0[7..22].iter().zip(&interior) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn guard_overflow_is_an_error() {
        assert!(matches!(
            with_guard_pulses(&SpreadKind::AllOne, 33, 20, 20),
            Err(SpreadError::GuardOverflow { .. })
        ));
    }

    #[test]
    fn dimensioning_for_the_evaluation_numerology() {
        // 2 us timing budget at 132 symbols and 30 kHz spacing: 7.92 pulses.
        let (lgp, rgp) = guard_pulse_dimensioning(2e-6, 0.0, 132, 30e3, 33).unwrap();
        assert_eq!((lgp, rgp), (8, 8));
        let (lgp, rgp) = guard_pulse_dimensioning(0.0, 1.5e-6, 132, 30e3, 33).unwrap();
        assert_eq!((lgp, rgp), (0, 6));
        assert!(guard_pulse_dimensioning(20e-6, 20e-6, 132, 30e3, 33).is_err());
    }

    #[test]
    fn flatten_phase_examples() {
        assert!((flatten_phase(48, 48, 0) - 47.0 * PI / 48.0).abs() < 1e-12);
        let raw = flatten_phase(3, 3, 3);
        assert!((raw.rem_euclid(std::f64::consts::TAU) - 2.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_dc_phase_examples() {
        let phi = zero_dc_phase(24, 1, 8, 48).unwrap();
        assert!((phi - 2.0 * PI / 3.0).abs() < 1e-12);
        let phi = zero_dc_phase(0, -1, 4, 16).unwrap();
        assert!((phi - PI / 2.0).abs() < 1e-12);
        assert!(zero_dc_phase(24, 0, 8, 48).is_err());
        // Half-band null with n_sc = n_symb reduces to pi*(1 - 2*n_bit/n_sc).
        let n_symb = 48usize;
        let phi = zero_dc_phase((n_symb / 2) as i64, 1, 4, n_symb).unwrap();
        assert!((phi - PI * (1.0 - 2.0 * 4.0 / 48.0)).abs() < 1e-12);
    }

    #[test]
    fn spreading_with_alternating_ramp_golden() {
        let spreading = Spreading::Common(OverlaidSequence {
            r0: vec![c(1.0, 0.0); 2],
            phi: PI,
        });
        let d = spread_bits(&CodedBits::from_u8(&[1, 1]), &spreading, 4).unwrap();
        let want = [c(1., 0.), c(-1., 0.), c(1., 0.), c(-1., 0.)];
        for (g, w) in d.d.iter().zip(&want) {
            assert!((g - w).norm() < 1e-12);
        }
    }

    #[test]
    fn off_bits_zero_their_whole_segment() {
        let spreading = Spreading::Common(OverlaidSequence {
            r0: zc_sequence(3, 1, 0).unwrap(),
            phi: 0.4,
        });
        let d = spread_bits(&CodedBits::from_u8(&[0, 1]), &spreading, 6).unwrap();
        assert!(d.d[..3].iter().all(|v| v.norm() == 0.0));
        assert!(d.d[3..].iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn per_bit_sequences_replace_the_common_overlay() {
        let seqs = vec![vec![c(1., 0.), c(0., 1.)], vec![c(-1., 0.), c(0., -1.)]];
        let d = spread_bits(&CodedBits::from_u8(&[1, 1]), &Spreading::PerBit(seqs.clone()), 4)
            .unwrap();
        assert_eq!(&d.d[..2], &seqs[0][..]);
        assert_eq!(&d.d[2..], &seqs[1][..]);
    }

    #[test]
    fn spread_length_must_match() {
        let spreading = Spreading::Common(OverlaidSequence { r0: vec![c(1., 0.); 3], phi: 0.0 });
        assert!(spread_bits(&CodedBits::from_u8(&[1, 0]), &spreading, 8).is_err());
    }

    #[test]
    fn spec_build_applies_guards_through_the_family() {
        let spec = SpreadingSpec::zc(1, 0).with_guards(2, 3);
        let s = spec.build(33, 4, 0.7).unwrap();
        let common = s.as_common().unwrap();
        assert_eq!(common.phi, 0.7);
        assert_eq!(common.r0.len(), 33);
        assert!(common.r0[..2].iter().all(|v| v.norm() == 0.0));
        assert!(common.r0[30..].iter().all(|v| v.norm() == 0.0));
        assert!((common.r0[2].norm() - 1.0).abs() < 1e-12);
    }
}
