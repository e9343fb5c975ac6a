//! Bit handling: Manchester coding and bit-sequence DFTs.
//!
//! The OOK bits enter the frequency domain only through their short DFT, so
//! this module is the per-message "online" part of the fast path. For
//! Manchester-coded messages the DFT collapses to a sum of `n_bo` unit
//! phasors per coefficient, which is also tabulated over all info strings
//! by [`bcal_table`].

use crate::fourier::cis_turns;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitsError {
    #[error("empty bit string")]
    Empty,
    #[error("table size 2^{0} is too large to enumerate")]
    TableTooLarge(usize),
    #[error("expected {expected} bits, got {got}")]
    WrongLength { expected: usize, got: usize },
}

/// Information bits (pre-coding).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfoBits(pub Vec<bool>);

/// On-off bits as transmitted, one per OOK symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedBits(pub Vec<bool>);

impl InfoBits {
    pub fn from_u8(bits: &[u8]) -> Self {
        InfoBits(bits.iter().map(|&b| b != 0).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl CodedBits {
    pub fn from_u8(bits: &[u8]) -> Self {
        CodedBits(bits.iter().map(|&b| b != 0).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

/// Manchester coding: info bit `b` becomes the pair `(!b, b)`, so every
/// pair carries exactly one ON symbol and the coded string is twice as long.
pub fn manchester_encode(info: &InfoBits) -> CodedBits {
    let mut out = Vec::with_capacity(info.0.len() * 2);
    for &b in &info.0 {
        out.push(!b);
        out.push(b);
    }
    CodedBits(out)
}

/// DFT of a coded bit string over its own length, with periodic access.
#[derive(Debug, Clone, PartialEq)]
pub struct BitSpectrum {
    values: Vec<Complex64>,
}

impl BitSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Periodic lookup: the bit DFT repeats with period `n_bit`.
    pub fn at(&self, k: i64) -> Complex64 {
        let n = self.values.len() as i64;
        self.values[k.rem_euclid(n) as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// `n_bit`-point DFT of the coded bits. Only phasor accumulation is needed:
/// each ON bit contributes one unit phasor per output.
pub fn dft_coded_bits(coded: &CodedBits) -> Result<BitSpectrum, BitsError> {
    let n = coded.len();
    if n == 0 {
        return Err(BitsError::Empty);
    }
    let values = (0..n)
        .map(|k| {
            coded
                .0
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(l, _)| cis_turns(-((k * l) as f64) / n as f64))
                .sum()
        })
        .collect();
    Ok(BitSpectrum { values })
}

/// Closed-form DFT of a Manchester-coded string, straight from the info
/// bits: `B[k] = sum_n exp(-j*pi*k*(2n + b[n]) / n_bo)` over `2*n_bo`
/// outputs. Skips the coding step entirely.
pub fn dft_info_bits_manchester(info: &InfoBits) -> Result<BitSpectrum, BitsError> {
    let n_bo = info.0.len();
    if n_bo == 0 {
        return Err(BitsError::Empty);
    }
    let values = (0..2 * n_bo)
        .map(|k| {
            info.0
                .iter()
                .enumerate()
                .map(|(n, &b)| {
                    cis_turns(-(k as f64) * (2 * n + usize::from(b)) as f64 / (2.0 * n_bo as f64))
                })
                .sum()
        })
        .collect();
    Ok(BitSpectrum { values })
}

/// Interpolated bit DFT `B(f) = sum_l b[l] exp(-j*2*pi*f*l/n_bit)` at a real
/// frequency argument.
pub fn bit_spectrum_at(coded: &CodedBits, f: f64) -> Complex64 {
    let n = coded.len() as f64;
    coded
        .0
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(l, _)| cis_turns(-f * l as f64 / n))
        .sum()
}

/// Precomputed Manchester bit DFTs for every info string of length `n_bo`.
///
/// Column order follows the big-endian value of the info string, so column 0
/// is all zeros and the last column is all ones.
#[derive(Debug, Clone)]
pub struct BitDftTable {
    pub n_bo: usize,
    /// `columns[string][k]`, `2*n_bo` coefficients per column.
    pub columns: Vec<Vec<Complex64>>,
}

/// Enumerates the closed-form table for all `2^n_bo` info strings.
pub fn bcal_table(n_bo: usize) -> Result<BitDftTable, BitsError> {
    if n_bo == 0 {
        return Err(BitsError::Empty);
    }
    if n_bo > 16 {
        return Err(BitsError::TableTooLarge(n_bo));
    }
    let columns = (0..1usize << n_bo)
        .map(|s| {
            let info = InfoBits((0..n_bo).map(|i| (s >> (n_bo - 1 - i)) & 1 == 1).collect());
            Ok(dft_info_bits_manchester(&info)?.values)
        })
        .collect::<Result<_, BitsError>>()?;
    Ok(BitDftTable { n_bo, columns })
}

impl BitDftTable {
    /// Column lookup by info string.
    pub fn column(&self, info: &InfoBits) -> Result<&[Complex64], BitsError> {
        if info.len() != self.n_bo {
            return Err(BitsError::WrongLength { expected: self.n_bo, got: info.len() });
        }
        let idx = info.0.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        Ok(&self.columns[idx])
    }

    /// CSV rendering: header of bit-string labels, one row per coefficient,
    /// cells quoted as `re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k");
        for s in 0..self.columns.len() {
            out.push_str(&format!(",\"{:0width$b}\"", s, width = self.n_bo));
        }
        out.push('\n');
        for k in 0..2 * self.n_bo {
            out.push_str(&k.to_string());
            for col in &self.columns {
                out.push_str(&format!(",\"{:.12},{:.12}\"", col[k].re, col[k].im));
            }
            out.push('\n');
        }
        out
    }
}

/// Ensemble-average power of the bit DFT at coefficient `k` over uniform
/// info bits: under Manchester `n_bit^2/4` on the comb `k = 0 mod n_bit` and
/// `(n_bit/4)(1 - cos(2*pi*k/n_bit))` off it; without coding
/// `n_bit(n_bit+1)/4` on the comb and `n_bit/4` off it.
pub fn expected_bit_power(k: usize, n_bit: usize, manchester: bool) -> f64 {
    let nb = n_bit as f64;
    if k % n_bit == 0 {
        if manchester {
            nb * nb / 4.0
        } else {
            nb * (nb + 1.0) / 4.0
        }
    } else if manchester {
        nb / 4.0 * (1.0 - (std::f64::consts::TAU * k as f64 / nb).cos())
    } else {
        nb / 4.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn capprox(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Brute-force oracle: textbook double-sum DFT of the coded bits.
    fn oracle_dft(coded: &CodedBits) -> Vec<Complex64> {
        let n = coded.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|l| {
                        if coded.0[l] {
                            let ang = -std::f64::consts::TAU * (k * l) as f64 / n as f64;
                            c(ang.cos(), ang.sin())
                        } else {
                            c(0.0, 0.0)
                        }
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn manchester_pairs_are_complementary() {
        let coded = manchester_encode(&InfoBits::from_u8(&[0, 1, 1, 0]));
        assert_eq!(coded, CodedBits::from_u8(&[1, 0, 0, 1, 0, 1, 1, 0]));
        assert_eq!(coded.ones(), 4); // always n_bo ON symbols
    }

    #[test]
    fn coded_dft_matches_oracle_for_every_short_string() {
        for n in 1..=6usize {
            for s in 0..1u32 << n {
                let coded = CodedBits((0..n).map(|i| (s >> i) & 1 == 1).collect());
                let got = dft_coded_bits(&coded).unwrap();
                let want = oracle_dft(&coded);
                for (g, w) in got.values().iter().zip(&want) {
                    assert!(capprox(*g, *w, 1e-12));
                }
            }
        }
    }

    #[test]
    fn closed_form_equals_coded_dft_after_encoding() {
        // Sweep all info strings up to length 8.
        for n_bo in 1..=8usize {
            for s in 0..1u32 << n_bo {
                let info = InfoBits((0..n_bo).map(|i| (s >> i) & 1 == 1).collect());
                let direct = dft_coded_bits(&manchester_encode(&info)).unwrap();
                let closed = dft_info_bits_manchester(&info).unwrap();
                for (a, b) in closed.values().iter().zip(direct.values()) {
                    assert!(capprox(*a, *b, 1e-12));
                }
            }
        }
    }

    #[test]
    fn two_bit_table_golden_values() {
        // Frozen closed-form values for n_bo = 2, columns (00, 01, 10, 11).
        let table = bcal_table(2).unwrap();
        let golden = [
            [c(2., 0.), c(0., 0.), c(2., 0.), c(0., 0.)],
            [c(2., 0.), c(1., 1.), c(0., 0.), c(1., -1.)],
            [c(2., 0.), c(-1., -1.), c(0., 0.), c(-1., 1.)],
            [c(2., 0.), c(0., 0.), c(-2., 0.), c(0., 0.)],
        ];
        for (s, want) in golden.iter().enumerate() {
            for (k, w) in want.iter().enumerate() {
                assert!(
                    capprox(table.columns[s][k], *w, 1e-12),
                    "column {s} coefficient {k}: {} vs {w}",
                    table.columns[s][k]
                );
            }
        }
    }

    #[test]
    fn one_bit_table_golden_values() {
        let table = bcal_table(1).unwrap();
        assert!(capprox(table.columns[0][0], c(1., 0.), 1e-12));
        assert!(capprox(table.columns[0][1], c(1., 0.), 1e-12));
        assert!(capprox(table.columns[1][0], c(1., 0.), 1e-12));
        assert!(capprox(table.columns[1][1], c(-1., 0.), 1e-12));
    }

    #[test]
    fn all_zero_info_string_yields_a_pure_comb() {
        // Coded string 101010 has DFT [3,0,0,3,0,0].
        let spec = dft_info_bits_manchester(&InfoBits::from_u8(&[0, 0, 0])).unwrap();
        let want = [3., 0., 0., 3., 0., 0.];
        for (k, w) in want.iter().enumerate() {
            assert!(capprox(spec.at(k as i64), c(*w, 0.), 1e-12));
        }
    }

    #[test]
    fn coded_1001_matches_the_table_column_for_info_10() {
        // Manchester(1,0) = [0,1,1,0]; its DFT carries the number of ON
        // symbols at k = 0.
        let coded = manchester_encode(&InfoBits::from_u8(&[1, 0]));
        assert_eq!(coded, CodedBits::from_u8(&[0, 1, 1, 0]));
        let spec = dft_coded_bits(&coded).unwrap();
        let want = [c(2., 0.), c(-1., -1.), c(0., 0.), c(-1., 1.)];
        for (k, w) in want.iter().enumerate() {
            assert!(capprox(spec.at(k as i64), *w, 1e-12));
        }
        let table = bcal_table(2).unwrap();
        let col = table.column(&InfoBits::from_u8(&[1, 0])).unwrap();
        for (k, w) in want.iter().enumerate() {
            assert!(capprox(col[k], *w, 1e-12));
        }
    }

    #[test]
    fn dc_coefficient_counts_on_symbols() {
        for s in 0..16u32 {
            let coded = CodedBits((0..4).map(|i| (s >> i) & 1 == 1).collect());
            let spec = dft_coded_bits(&coded).unwrap();
            assert!(capprox(spec.at(0), c(coded.ones() as f64, 0.), 1e-12));
        }
    }

    #[test]
    fn conjugate_symmetry_for_real_bits() {
        let coded = CodedBits::from_u8(&[1, 0, 1, 1, 0, 1]);
        let spec = dft_coded_bits(&coded).unwrap();
        for k in 1..coded.len() as i64 {
            assert!(capprox(spec.at(k).conj(), spec.at(-k), 1e-12));
        }
    }

    #[test]
    fn interpolated_spectrum_agrees_on_the_integer_grid() {
        let coded = CodedBits::from_u8(&[0, 1, 1, 0, 1, 0, 0, 1]);
        let spec = dft_coded_bits(&coded).unwrap();
        for k in -8..16i64 {
            assert!(capprox(bit_spectrum_at(&coded, k as f64), spec.at(k), 1e-12));
        }
        // And it is n_bit-periodic at fractional arguments too.
        let f = 2.34;
        assert!(capprox(
            bit_spectrum_at(&coded, f),
            bit_spectrum_at(&coded, f + 8.0),
            1e-12
        ));
    }

    #[test]
    fn expected_power_examples() {
        assert_eq!(expected_bit_power(0, 4, true), 4.0);
        assert_eq!(expected_bit_power(2, 4, true), 2.0);
        assert_eq!(expected_bit_power(1, 4, false), 1.0);
        assert_eq!(expected_bit_power(4, 4, false), 5.0);
    }

    #[test]
    fn expected_power_matches_a_small_exhaustive_ensemble() {
        // Exact ensemble average over all strings is cheap for n_bit = 4.
        let n_bit = 4usize;
        for manchester in [true, false] {
            for k in 0..n_bit {
                let mut acc = 0.0;
                let count = if manchester { 4usize } else { 16 };
                for s in 0..count {
                    let coded = if manchester {
                        manchester_encode(&InfoBits((0..2).map(|i| (s >> i) & 1 == 1).collect()))
                    } else {
                        CodedBits((0..4).map(|i| (s >> i) & 1 == 1).collect())
                    };
                    acc += dft_coded_bits(&coded).unwrap().at(k as i64).norm_sqr();
                }
                let mean = acc / count as f64;
                let want = expected_bit_power(k, n_bit, manchester);
                assert!(
                    (mean - want).abs() < 1e-12,
                    "k={k} manchester={manchester}: {mean} vs {want}"
                );
            }
        }
    }

    #[test]
    fn table_csv_has_header_and_all_rows() {
        let csv = bcal_table(2).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5); // header + 4 coefficients
        assert!(lines[0].starts_with("k,\"00\",\"01\",\"10\",\"11\""));
    }
}
