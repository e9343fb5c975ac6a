//! Plain-text and binary writers for generated artifacts.
//!
//! CSV tables carry a single header line; the binary signal format is a
//! fixed 32-byte little-endian header (magic, n_fft, n_cp, sample rate,
//! sample count) followed by interleaved re/im doubles.

use crate::ofdm::TimeSignal;
use num_complex::Complex64;
use serde::Serialize;
use std::io::{self, Read, Write};
use thiserror::Error;

pub const SIGNAL_MAGIC: &[u8; 8] = b"OOKWAVE1";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("bad signal file: {0}")]
    BadSignal(String),
}

/// Subcarrier table of one generated frame. `f0` is the signed grid index
/// of the first coefficient.
pub fn write_frame_csv<W: Write>(
    mut w: W,
    coefficients: &[Complex64],
    f0: i32,
) -> Result<(), ExportError> {
    writeln!(w, "subcarrier,re,im,abs")?;
    for (j, c) in coefficients.iter().enumerate() {
        writeln!(w, "{},{:.17e},{:.17e},{:.17e}", f0 + j as i32, c.re, c.im, c.norm())?;
    }
    Ok(())
}

/// Complex time series with symbol annotation.
pub fn write_signal_csv<W: Write>(mut w: W, signal: &TimeSignal) -> Result<(), ExportError> {
    writeln!(w, "n,t_seconds,re,im,abs,symbol,in_cp")?;
    for (n, v) in signal.samples.iter().enumerate() {
        let located = signal
            .boundaries
            .iter()
            .enumerate()
            .find(|(_, b)| n >= b.start && n < b.start + b.len());
        let (sym, in_cp) = match located {
            Some((s, b)) => (s as i64, (n < b.body_start()) as u8),
            None => (-1, 0),
        };
        writeln!(
            w,
            "{},{:.12e},{:.17e},{:.17e},{:.17e},{},{}",
            n,
            n as f64 / signal.sample_rate,
            v.re,
            v.im,
            v.norm(),
            sym,
            in_cp
        )?;
    }
    Ok(())
}

/// Real-valued series at a given rate (envelope, ADC stream).
pub fn write_envelope_csv<W: Write>(
    mut w: W,
    values: &[f64],
    rate: f64,
) -> Result<(), ExportError> {
    writeln!(w, "n,t_seconds,value")?;
    for (n, v) in values.iter().enumerate() {
        writeln!(w, "{},{:.12e},{:.17e}", n, n as f64 / rate, v)?;
    }
    Ok(())
}

/// Per-subcarrier power on the FFT grid, written in signed-index order
/// from -n_fft/2 to n_fft/2 - 1 with dB relative to the peak.
pub fn write_spectrum_csv<W: Write>(
    mut w: W,
    power: &[f64],
    f_sc: f64,
) -> Result<(), ExportError> {
    let n = power.len();
    let peak = power.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
    writeln!(w, "subcarrier,freq_hz,power,power_db")?;
    for s in -(n as i64 / 2)..(n as i64 - n as i64 / 2) {
        let p = power[s.rem_euclid(n as i64) as usize];
        let db = if p > 0.0 { 10.0 * (p / peak).log10() } else { f64::NEG_INFINITY };
        writeln!(w, "{},{:.6e},{:.17e},{:.6}", s, s as f64 * f_sc, p, db)?;
    }
    Ok(())
}

/// Overlaid sequence or any short complex vector.
pub fn write_sequence_csv<W: Write>(
    mut w: W,
    values: &[Complex64],
) -> Result<(), ExportError> {
    writeln!(w, "m,re,im,abs,phase")?;
    for (m, v) in values.iter().enumerate() {
        writeln!(w, "{},{:.17e},{:.17e},{:.17e},{:.17e}", m, v.re, v.im, v.norm(), v.arg())?;
    }
    Ok(())
}

/// Pretty JSON plus a trailing newline.
pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<(), ExportError> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Binary signal header contents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalHeader {
    pub n_fft: u32,
    pub n_cp: u32,
    pub sample_rate: f64,
    pub count: u64,
}

pub fn write_signal_binary<W: Write>(
    mut w: W,
    signal: &TimeSignal,
    n_fft: u32,
    n_cp: u32,
) -> Result<(), ExportError> {
    w.write_all(SIGNAL_MAGIC)?;
    w.write_all(&n_fft.to_le_bytes())?;
    w.write_all(&n_cp.to_le_bytes())?;
    w.write_all(&signal.sample_rate.to_le_bytes())?;
    w.write_all(&(signal.samples.len() as u64).to_le_bytes())?;
    for v in &signal.samples {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_signal_binary<R: Read>(
    mut r: R,
) -> Result<(SignalHeader, Vec<Complex64>), ExportError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != SIGNAL_MAGIC {
        return Err(ExportError::BadSignal("wrong magic".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let n_fft = u32::from_le_bytes(b4);
    r.read_exact(&mut b4)?;
    let n_cp = u32::from_le_bytes(b4);
    r.read_exact(&mut b8)?;
    let sample_rate = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8);
    let mut samples = Vec::with_capacity(count as usize);
    for _ in 0..count {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        samples.push(Complex64::new(re, im));
    }
    Ok((SignalHeader { n_fft, n_cp, sample_rate, count }, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ofdm::SymbolBoundary;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tiny_signal() -> TimeSignal {
        TimeSignal {
            samples: vec![c(1.0, 0.0), c(0.0, -2.0), c(0.5, 0.5), c(-1.0, 1.0)],
            sample_rate: 15.36e6,
            boundaries: vec![SymbolBoundary { start: 0, cp_len: 1, body_len: 3 }],
        }
    }

    #[test]
    fn binary_signal_round_trips() {
        let sig = tiny_signal();
        let mut buf = Vec::new();
        write_signal_binary(&mut buf, &sig, 512, 36).unwrap();
        assert_eq!(buf.len(), 32 + 4 * 16);
        let (header, samples) = read_signal_binary(buf.as_slice()).unwrap();
        assert_eq!(
            header,
            SignalHeader { n_fft: 512, n_cp: 36, sample_rate: 15.36e6, count: 4 }
        );
        assert_eq!(samples, sig.samples);
    }

    #[test]
    fn corrupt_magic_is_rejected() {
        let sig = tiny_signal();
        let mut buf = Vec::new();
        write_signal_binary(&mut buf, &sig, 512, 36).unwrap();
        buf[0] ^= 0xFF;
        assert!(read_signal_binary(buf.as_slice()).is_err());
    }

    #[test]
    fn csv_tables_have_headers_and_rows() {
        let mut buf = Vec::new();
        write_frame_csv(&mut buf, &[c(1., 2.), c(3., 4.)], -1).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "subcarrier,re,im,abs");
        assert!(lines[1].starts_with("-1,"));
        assert!(lines[2].starts_with("0,"));

        let mut buf = Vec::new();
        write_signal_csv(&mut buf, &tiny_signal()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        // First sample is inside the CP of symbol 0.
        assert!(text.lines().nth(1).unwrap().ends_with(",0,1"));

        let mut buf = Vec::new();
        write_envelope_csv(&mut buf, &[0.5, 1.0], 3.84e6).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);

        let mut buf = Vec::new();
        write_sequence_csv(&mut buf, &[c(0., 1.)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("phase"));
    }

    #[test]
    fn spectrum_rows_are_in_signed_order() {
        let power = vec![4.0, 3.0, 2.0, 1.0];
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &power, 30e3).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        // Signed index -2 maps to grid index 2.
        assert_eq!(first[0], "-2");
        assert_eq!(first[2].parse::<f64>().unwrap(), 2.0);
        // Peak row reads 0 dB.
        let peak_row = text.lines().find(|l| l.starts_with("0,")).unwrap();
        let db: f64 = peak_row.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(db, 0.0);
    }

    #[test]
    fn json_writer_appends_a_newline() {
        #[derive(Serialize)]
        struct Tiny {
            a: u32,
        }
        let mut buf = Vec::new();
        write_json(&mut buf, &Tiny { a: 7 }).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.ends_with('\n'));
        assert!(text.contains("\"a\": 7"));
    }
}
