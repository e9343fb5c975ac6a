//! Fast internal consistency checks, runnable from the CLI.
//!
//! Each check compares two independent routes to the same quantity and
//! reports the worst deviation against its tolerance. The whole list runs
//! in seconds.

use crate::bits::{dft_coded_bits, CodedBits};
use crate::config::{FdssKind, FdssSpec, SpreadingSpec, WaveformConfig};
use crate::fastpath::{fast_coefficients, interpolate_r0};
use crate::fourier::dft_forward_to;
use crate::ls::{ls_closed_form, ls_direct, ls_waveform, LsProfile};
use crate::precoder::{bessel_i0, generate_wus_symbol, kaiser_window};
use crate::receiver::butterworth_lowpass;
use crate::spreading::{flatten_phase, zc_sequence, zero_dc_phase};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub tolerance: f64,
    pub measured: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: &str, tolerance: f64, measured: f64) -> Self {
        CheckResult { name: name.to_string(), tolerance, measured, pass: measured <= tolerance }
    }

    /// One human-readable status line.
    pub fn line(&self) -> String {
        format!(
            "{} {:<52} measured {:>12.3e}  tolerance {:>9.1e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance
        )
    }
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.pass)
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn bit_strings(width: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << width).map(move |p| (0..width).map(|b| p >> b & 1 == 1).collect())
}

fn cfg_132(n_sc: usize, n_gb: usize, l_shift: i64, phi: f64) -> crate::config::CheckedConfig {
    WaveformConfig {
        n_fft: 512,
        n_cp: 36,
        f_sc: 30e3,
        f0: None,
        n_sc,
        n_gb,
        n_symb: 132,
        n_bit: 4,
        manchester: true,
        l_shift,
        phi,
        p_s: 1.0,
        alternate_phi_sign: false,
    }
    .validate()
    .expect("selftest config")
}

fn check_reference_table() -> CheckResult {
    let spec = dft_coded_bits(&CodedBits::from_u8(&[0, 1, 1, 0])).unwrap();
    let expect = [
        Complex64::new(2.0, 0.0),
        Complex64::new(-1.0, -1.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(-1.0, 1.0),
    ];
    CheckResult::new(
        "coded-bit dft matches the reference table",
        1e-12,
        max_diff(spec.values(), &expect),
    )
}

fn check_fast_path(integer: bool) -> CheckResult {
    let (name, phi, spreading) = if integer {
        (
            "closed-form generation matches the chain (integer ramp)",
            zero_dc_phase(66, 1, 4, 132).unwrap(),
            SpreadingSpec::zc(17, 2),
        )
    } else {
        (
            "closed-form generation matches the chain (fractional ramp)",
            flatten_phase(140, 132, 3),
            SpreadingSpec::zc(5, 2).with_guards(8, 8),
        )
    };
    let cc = cfg_132(140, 2, 3, phi);
    let fdss = FdssSpec::kaiser(4.0);
    let mut worst = 0.0f64;
    for bits in bit_strings(2) {
        let main = generate_wus_symbol(&bits, &cc, &fdss, &spreading).unwrap();
        let fast = fast_coefficients(&bits, &cc, &fdss, &spreading).unwrap();
        worst = worst.max(max_diff(&main.coefficients, &fast.coefficients));
    }
    CheckResult::new(name, 1e-9, worst)
}

fn check_ls_closed_form() -> CheckResult {
    let profile = LsProfile::new(512, 47, 4).unwrap();
    let mut worst = 0.0f64;
    for bits in bit_strings(4) {
        let coded = CodedBits(bits);
        let direct = ls_direct(&coded, &profile).unwrap();
        let closed = ls_closed_form(&coded, &profile).unwrap();
        worst = worst.max(max_diff(&direct, &closed));
    }
    CheckResult::new("ls closed form matches the held-bit dft", 1e-9, worst)
}

fn check_main_equals_ls() -> CheckResult {
    let cc = WaveformConfig {
        n_fft: 512,
        n_cp: 36,
        f_sc: 30e3,
        f0: None,
        n_sc: 48,
        n_gb: 0,
        n_symb: 48,
        n_bit: 4,
        manchester: false,
        l_shift: 0,
        phi: 0.0,
        p_s: 1.0,
        alternate_phi_sign: false,
    }
    .validate()
    .unwrap();
    let fdss = FdssSpec { kind: FdssKind::LsEquivalent, t_shift: None };
    let profile = LsProfile::new(512, 48, 4).unwrap();
    let mut worst = 0.0f64;
    for bits in bit_strings(4) {
        let main = generate_wus_symbol(&bits, &cc, &fdss, &SpreadingSpec::all_one()).unwrap();
        let ls = ls_waveform(&CodedBits(bits), &profile, 1.0, 0).unwrap();
        worst = worst.max(max_diff(&main.coefficients, &ls.coefficients));
    }
    CheckResult::new("shaped chain reproduces the least-squares waveform", 1e-9, worst)
}

fn check_comb_fraction() -> CheckResult {
    let cc = cfg_132(132, 6, 0, 0.0);
    let spreading = SpreadingSpec::zc(5, 1).with_guards(3, 4);
    let built = spreading.build(cc.n_seg(), cc.n_bit, 0.0).unwrap();
    let mut worst = 0.0f64;
    for bits in bit_strings(2) {
        let coded = crate::precoder::coded_from_input(&bits, &cc).unwrap();
        let d = crate::spreading::spread_bits(&coded, &built, cc.n_symb).unwrap();
        let frame = crate::precoder::dft_precode(&d.d, cc.n_symb).unwrap();
        let fraction = crate::metrics::comb_power_fraction(&frame, cc.n_bit).unwrap();
        worst = worst.max((fraction - 0.5).abs());
    }
    CheckResult::new("manchester comb power fraction is one half", 1e-12, worst)
}

fn check_interpolation_identity() -> CheckResult {
    let (n_seg, n_symb) = (33usize, 132usize);
    let r0 = zc_sequence(n_seg, 17, 5).unwrap();
    let r0_prime = dft_forward_to(&r0);
    let mut padded = vec![Complex64::new(0.0, 0.0); n_symb];
    padded[..n_seg].copy_from_slice(&r0);
    let full = dft_forward_to(&padded);
    let worst = (0..n_symb as i64)
        .map(|k| (interpolate_r0(&r0_prime, k, n_symb) - full[k as usize]).norm())
        .fold(0.0, f64::max);
    CheckResult::new("short-dft interpolation rebuilds the padded dft", 1e-9, worst)
}

fn check_bessel() -> CheckResult {
    // Simpson quadrature of I0(x) = (1/pi) * integral_0^pi exp(x cos t) dt.
    let quad = |x: f64| {
        let n = 4000usize;
        let h = std::f64::consts::PI / n as f64;
        let f = |t: f64| (x * t.cos()).exp();
        let mut s = f(0.0) + f(std::f64::consts::PI);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0 / std::f64::consts::PI
    };
    let worst = [0.5f64, 2.0, 4.0, 8.0]
        .iter()
        .map(|&x| {
            let q = quad(x);
            (bessel_i0(x) - q).abs() / q
        })
        .fold(0.0, f64::max);
    let k = kaiser_window(33, 4.0);
    let sym = (0..33)
        .map(|i| (k[i] - k[32 - i]).abs())
        .fold(worst, f64::max);
    CheckResult::new("kaiser window against quadrature bessel", 1e-9, sym)
}

fn check_tdlc_quantization() -> CheckResult {
    let profile = crate::channel::tdlc_profile(300e-9, 15.36e6).unwrap();
    let expect: Vec<usize> = vec![0, 1, 3, 4, 6, 10, 12, 20, 21, 25, 26, 29, 31, 32, 40];
    let delays_ok = profile.delays == expect;
    let energy = (profile.total_energy() - 1.0).abs();
    CheckResult::new(
        "tdl-c quantization and normalization",
        1e-12,
        if delays_ok { energy } else { 1.0 },
    )
}

fn check_butterworth_dc() -> CheckResult {
    let f = butterworth_lowpass(3, 1.98e6, 15.36e6).unwrap();
    CheckResult::new(
        "receiver filter has unit dc gain",
        1e-9,
        (f.response(0.0, 15.36e6) - Complex64::new(1.0, 0.0)).norm(),
    )
}

fn check_zero_dc_null() -> CheckResult {
    let phi = zero_dc_phase(66, 1, 4, 132).unwrap();
    let cc = cfg_132(132, 6, 0, phi);
    let mut worst = 0.0f64;
    for bits in bit_strings(2) {
        let sym =
            generate_wus_symbol(&bits, &cc, &FdssSpec::none(), &SpreadingSpec::all_one())
                .unwrap();
        worst = worst.max(sym.coefficients[66].norm());
    }
    CheckResult::new("ramp-steered null lands on the chosen subcarrier", 1e-9, worst)
}

/// Runs every check.
pub fn run_selftest() -> Vec<CheckResult> {
    vec![
        check_reference_table(),
        check_fast_path(true),
        check_fast_path(false),
        check_ls_closed_form(),
        check_main_equals_ls(),
        check_comb_fraction(),
        check_interpolation_identity(),
        check_bessel(),
        check_tdlc_quantization(),
        check_butterworth_dc(),
        check_zero_dc_null(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Instant;

    #[test]
    fn every_selftest_check_passes_quickly() {
        let start = Instant::now();
        let results = run_selftest();
        let elapsed = start.elapsed();
        for r in &results {
            assert!(r.pass, "{}", r.line());
        }
        assert!(all_passed(&results));
        assert!(results.len() >= 10);
        assert!(elapsed.as_secs() < 60, "selftest took {elapsed:?}");
    }

    #[test]
    fn status_lines_are_well_formed() {
        let r = CheckResult::new("example", 1e-9, 2e-9);
        assert!(!r.pass);
        assert!(r.line().starts_with("FAIL example"));
    }
}
