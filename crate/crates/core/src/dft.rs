//! Thin DFT helpers over `rustfft` with the conventions used throughout the
//! crate: the forward transform is unnormalized, the inverse carries 1/N, so
//! `forward(inverse(x)) == x` up to floating-point round-off.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward DFT: `X[f] = sum_n x[n] e^{-2πi f n / N}`.
pub fn forward(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    forward_in_place(&mut buf);
    buf
}

pub fn forward_in_place(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
}

/// Inverse DFT with 1/N normalization: `x[n] = (1/N) sum_f X[f] e^{+2πi f n / N}`.
pub fn inverse(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    inverse_in_place(&mut buf);
    buf
}

pub fn inverse_in_place(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let n = buf.len();
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(buf));
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}
