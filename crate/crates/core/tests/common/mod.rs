//! Independent reference computations for the test suites.
//!
//! None of these go through the filter bank: they use brute-force sums or a
//! single full-length FFT of the signal.

#![allow(dead_code)]

use std::f64::consts::PI;

use nearfield_core::Signal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

pub const FS: u32 = 44_100;

pub fn white_noise(seed: u64, len: usize, amplitude: f64) -> Signal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = (0..len).map(|_| amplitude * rng.gen_range(-1.0..1.0)).collect();
    Signal::new(x, FS).unwrap()
}

/// Cumulative sum of white noise, mean removed, scaled to a modest level.
pub fn brown_noise(seed: u64, len: usize) -> Signal {
    let white = white_noise(seed, len, 1.0);
    let mut acc = 0.0;
    let mut x: Vec<f64> = white
        .samples()
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    let mean = x.iter().sum::<f64>() / len as f64;
    let peak = x.iter().fold(0f64, |m, v| m.max((v - mean).abs()));
    for v in &mut x {
        *v = (*v - mean) / peak * 0.5;
    }
    Signal::new(x, FS).unwrap()
}

pub fn sine(freq: f64, len: usize, amplitude: f64) -> Vec<f64> {
    (0..len)
        .map(|n| amplitude * (2.0 * PI * freq * n as f64 / FS as f64).sin())
        .collect()
}

/// Sine with raised-cosine fades of `fade` samples at both ends.
pub fn faded_sine(freq: f64, len: usize, fade: usize) -> Signal {
    let x = sine(freq, len, 1.0)
        .into_iter()
        .enumerate()
        .map(|(n, v)| {
            let edge = n.min(len - 1 - n);
            if edge < fade {
                v * 0.5 * (1.0 - (PI * edge as f64 / fade as f64).cos())
            } else {
                v
            }
        })
        .collect();
    Signal::new(x, FS).unwrap()
}

/// Full convolution with `h`, cropped to `x.len()` samples from `(L-1)/2`.
pub fn direct_zero_phase(x: &[f64], h: &[f64]) -> Vec<f64> {
    let delay = (h.len() - 1) / 2;
    (0..x.len())
        .map(|i| {
            let k = i + delay;
            let lo = k.saturating_sub(x.len() - 1);
            let hi = k.min(h.len() - 1);
            (lo..=hi).map(|j| h[j] * x[k - j]).sum()
        })
        .collect()
}

/// |H(f)| of an FIR filter by direct evaluation of its DTFT.
pub fn magnitude_response(taps: &[f64], freq: f64, fs: f64) -> f64 {
    let w = 2.0 * PI * freq / fs;
    let z: Complex<f64> = taps
        .iter()
        .enumerate()
        .map(|(n, h)| Complex::from_polar(*h, -w * n as f64))
        .sum();
    z.norm()
}

pub fn db20(x: f64) -> f64 {
    20.0 * x.log10()
}

pub fn db10(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Fraction of the signal's energy falling in each band `[e_i, e_{i+1})`,
/// read off a single full-length periodogram (Parseval split by bin).
pub fn periodogram_band_weights(signal: &Signal, edges: &[f64]) -> Vec<f64> {
    let n = signal.len();
    let fs = signal.sample_rate() as f64;
    let mut buf: Vec<Complex<f64>> = signal.samples().iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mut bands = vec![0.0; edges.len() - 1];
    let mut total = 0.0;
    for (k, c) in buf.iter().enumerate() {
        // fold negative frequencies onto positive ones
        let bin = if k <= n / 2 { k } else { n - k };
        let f = bin as f64 * fs / n as f64;
        let p = c.norm_sqr();
        total += p;
        let idx = edges[1..]
            .iter()
            .position(|&hi| f < hi)
            .unwrap_or(edges.len() - 2);
        bands[idx] += p;
    }
    bands.iter().map(|b| b / total).collect()
}

/// Sample-lag of the cross-correlation maximum within `±max_lag`.
pub fn xcorr_argmax(x: &[f64], y: &[f64], max_lag: usize) -> i64 {
    let n = x.len();
    let mut best = (i64::MIN, f64::NEG_INFINITY);
    for lag in -(max_lag as i64)..=(max_lag as i64) {
        let mut acc = 0.0;
        for (i, xi) in x.iter().enumerate() {
            let j = i as i64 + lag;
            if j >= 0 && (j as usize) < n {
                acc += xi * y[j as usize];
            }
        }
        if acc > best.1 {
            best = (lag, acc);
        }
    }
    best.0
}

/// Expected relative band energies of pink (1/f) noise that flattens below
/// `flat_hz`, by closed-form integration of the density.
pub fn pink_band_integral(lo: f64, hi: f64, flat_hz: f64) -> f64 {
    let flat = |a: f64, b: f64| (b.min(flat_hz) - a.min(flat_hz)).max(0.0) / flat_hz;
    let slope = |a: f64, b: f64| {
        let a = a.max(flat_hz);
        let b = b.max(flat_hz);
        (b / a).ln()
    };
    flat(lo, hi) + slope(lo, hi)
}
