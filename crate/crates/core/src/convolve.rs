//! Overlap-add FFT convolution with center cropping.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Convolve `input` with each filter in `filters` (all of the same odd length `L`)
/// and crop the full convolution to `input.len()` samples starting at `(L-1)/2`.
///
/// For a symmetric filter this is a zero-phase filtering of `input` with
/// zero-padded edges.
pub(crate) fn convolve_centered(input: &[f64], filters: &[&[f64]]) -> Vec<Vec<f64>> {
    if filters.is_empty() {
        return Vec::new();
    }
    let taps = filters[0].len();
    debug_assert!(filters.iter().all(|f| f.len() == taps));
    let n = input.len();
    let delay = (taps - 1) / 2;

    let full_len = n + taps - 1;
    let fft_len = (4 * taps).next_power_of_two().min(full_len.next_power_of_two()).max(64);
    let block = fft_len - taps + 1;

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(fft_len);
    let inverse = planner.plan_fft_inverse(fft_len);

    let filter_spectra: Vec<Vec<Complex<f64>>> = filters
        .par_iter()
        .map(|f| spectrum(f, fft_len, &forward))
        .collect();

    let block_spectra: Vec<(usize, Vec<Complex<f64>>)> = (0..n)
        .step_by(block)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&start| {
            let end = (start + block).min(n);
            (start, spectrum(&input[start..end], fft_len, &forward))
        })
        .collect();

    filter_spectra
        .par_iter()
        .map(|h| overlap_add(&block_spectra, h, &inverse, fft_len, taps, n, delay))
        .collect()
}

fn spectrum(x: &[f64], fft_len: usize, fft: &Arc<dyn Fft<f64>>) -> Vec<Complex<f64>> {
    let mut buf = vec![Complex::new(0.0, 0.0); fft_len];
    for (b, &v) in buf.iter_mut().zip(x) {
        b.re = v;
    }
    fft.process(&mut buf);
    buf
}

fn overlap_add(
    blocks: &[(usize, Vec<Complex<f64>>)],
    h: &[Complex<f64>],
    inverse: &Arc<dyn Fft<f64>>,
    fft_len: usize,
    taps: usize,
    n: usize,
    delay: usize,
) -> Vec<f64> {
    let scale = 1.0 / fft_len as f64;
    let mut out = vec![0.0; n];
    let mut buf = vec![Complex::new(0.0, 0.0); fft_len];
    let mut scratch = vec![Complex::new(0.0, 0.0); inverse.get_inplace_scratch_len()];
    for (start, x) in blocks {
        for ((b, a), c) in buf.iter_mut().zip(x).zip(h) {
            *b = a * c;
        }
        inverse.process_with_scratch(&mut buf, &mut scratch);
        let block_len = (n - start).min(fft_len - taps + 1);
        // full-convolution index k = start + j maps to output index k - delay
        for (j, v) in buf.iter().take(block_len + taps - 1).enumerate() {
            let k = start + j;
            if k >= delay && k - delay < n {
                out[k - delay] += v.re * scale;
            }
        }
    }
    out
}
