//! Thin wrappers around rustfft with a per-thread plan cache.
//!
//! Both transform directions are plain sums, without any 1/N factor:
//! forward `X[k] = sum_n x[n] exp(-j2*pi*k*n/N)` and inverse
//! `x[n] = sum_k X[k] exp(+j2*pi*n*k/N)`. Parseval checks therefore carry
//! an explicit factor N: `sum_n |idft(X)[n]|^2 = N * sum_k |X[k]|^2`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place unnormalized forward DFT.
pub fn dft_forward(data: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(data.len()).process(data));
}

/// In-place unnormalized inverse DFT (plain conjugate-exponent sum, no 1/N).
pub fn dft_inverse(data: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(data.len()).process(data));
}

/// Forward DFT of a borrowed slice.
pub fn dft_forward_to(data: &[Complex64]) -> Vec<Complex64> {
    let mut buf = data.to_vec();
    dft_forward(&mut buf);
    buf
}

/// Inverse DFT of a borrowed slice.
pub fn dft_inverse_to(data: &[Complex64]) -> Vec<Complex64> {
    let mut buf = data.to_vec();
    dft_inverse(&mut buf);
    buf
}

/// `exp(j*2*pi*turns)` with the argument reduced before the trig call, so
/// large multiples of a turn do not lose precision.
pub fn cis_turns(turns: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * turns.rem_euclid(1.0)).sin_cos();
    Complex64::new(c, s)
}
