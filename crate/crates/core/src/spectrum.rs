//! Welch power spectral density estimate.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// One-sided PSD from averaged, Hann-windowed, mean-removed segments.
#[derive(Debug, Clone)]
pub struct Psd {
    pub frequencies: Vec<f64>,
    pub density: Vec<f64>,
    pub segments: usize,
}

impl Psd {
    /// Mean density over bins with frequency in `[lo, hi)`.
    pub fn band_mean(&self, lo: f64, hi: f64) -> Option<f64> {
        let (sum, count) = self
            .frequencies
            .iter()
            .zip(&self.density)
            .filter(|(f, _)| **f >= lo && **f < hi)
            .fold((0.0, 0usize), |(s, c), (_, d)| (s + d, c + 1));
        (count > 0).then(|| sum / count as f64)
    }
}

/// Welch estimate with 50 % overlap. Requires at least `min_segments` segments.
pub fn welch(
    samples: &[f64],
    sample_rate: u32,
    segment_len: usize,
    min_segments: usize,
) -> Result<Psd> {
    let hop = segment_len / 2;
    if segment_len < 2 || samples.len() < segment_len {
        return Err(Error::InsufficientData(format!(
            "{} samples is shorter than one {segment_len}-sample segment",
            samples.len()
        )));
    }
    let segments = (samples.len() - segment_len) / hop + 1;
    if segments < min_segments {
        return Err(Error::InsufficientData(format!(
            "{segments} segment(s) of {segment_len} samples available, {min_segments} required"
        )));
    }

    let window: Vec<f64> = (0..segment_len)
        .map(|n| {
            0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / segment_len as f64).cos()
        })
        .collect();
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(segment_len);

    let bins = segment_len / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut buf = vec![Complex::new(0.0, 0.0); segment_len];
    for seg in 0..segments {
        let chunk = &samples[seg * hop..seg * hop + segment_len];
        let mean = chunk.iter().sum::<f64>() / segment_len as f64;
        for ((b, x), w) in buf.iter_mut().zip(chunk).zip(&window) {
            *b = Complex::new((x - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }

    let fs = sample_rate as f64;
    let scale = 1.0 / (fs * window_power * segments as f64);
    let density = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || (segment_len.is_multiple_of(2) && k == bins - 1) {
                1.0
            } else {
                2.0
            };
            a * scale * one_sided
        })
        .collect();
    let frequencies = (0..bins).map(|k| k as f64 * fs / segment_len as f64).collect();
    Ok(Psd {
        frequencies,
        density,
        segments,
    })
}
