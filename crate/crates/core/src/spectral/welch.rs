use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::types::{require_positive, NoiseSpectrum, PsdKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    /// Periodic Hann.
    #[default]
    Hann,
}

impl Window {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Hann => (0..n)
                .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
                .collect(),
        }
    }
}

fn step_for(segment_len: usize, overlap: f64) -> usize {
    let overlapping = (overlap * segment_len as f64).round() as usize;
    (segment_len - overlapping).max(1)
}

/// Number of segments `welch_psd` averages for these settings.
pub fn welch_segment_count(n: usize, segment_len: usize, overlap: f64) -> usize {
    if segment_len == 0 || segment_len > n {
        return 0;
    }
    (n - segment_len) / step_for(segment_len, overlap) + 1
}

/// One-sided Welch PSD estimate with per-segment mean removal.
///
/// Normalized so that `sum(psd) * df` equals the variance of the input.
/// The DC bin is dropped; the returned grid is `k / (segment_len dt)` for
/// `k = 1..=segment_len/2`.
pub fn welch_psd(
    x: &[f64],
    dt: f64,
    segment_len: usize,
    overlap: f64,
    window: Window,
    kind: PsdKind,
) -> Result<NoiseSpectrum> {
    let dt = require_positive("dt", dt)?;
    if segment_len < 4 || segment_len > x.len() {
        return Err(Error::invalid(format!(
            "segment length {segment_len} must lie in [4, {}]",
            x.len()
        )));
    }
    if !(0.0..=0.9).contains(&overlap) {
        return Err(Error::invalid(format!("overlap {overlap} must lie in [0, 0.9]")));
    }
    if let Some(v) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite sample {v}")));
    }

    let w = window.coefficients(segment_len);
    let w_power: f64 = w.iter().map(|c| c * c).sum();
    let step = step_for(segment_len, overlap);
    let fft = FftPlanner::new().plan_fft_forward(segment_len);
    let half = segment_len / 2;
    let mut acc = vec![0.0f64; half + 1];
    let mut buf = vec![Complex::new(0.0, 0.0); segment_len];
    let mut segments = 0usize;

    let mut start = 0;
    while start + segment_len <= x.len() {
        let seg = &x[start..start + segment_len];
        let mean = seg.iter().sum::<f64>() / segment_len as f64;
        for ((b, &s), &c) in buf.iter_mut().zip(seg).zip(&w) {
            *b = Complex::new((s - mean) * c, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += step;
    }

    let scale = dt / (w_power * segments as f64);
    let df = 1.0 / (segment_len as f64 * dt);
    let mut freqs = Vec::with_capacity(half);
    let mut values = Vec::with_capacity(half);
    for (k, a) in acc.iter().enumerate().skip(1) {
        let one_sided = if segment_len.is_multiple_of(2) && k == half { 1.0 } else { 2.0 };
        freqs.push(k as f64 * df);
        values.push(one_sided * a * scale);
    }
    NoiseSpectrum::new(freqs, values, kind)
}
