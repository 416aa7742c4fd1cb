//! Zero-phase, complementary FIR subband filter bank.
//!
//! Each band filter is the difference of two Blackman-windowed sinc
//! lowpasses at the band's edges, `band_i = LP(e_{i+1}) − LP(e_i)`, with
//! `LP(0)` the zero filter and `LP(Nyquist)` a unit impulse. The bands
//! therefore telescope: their coefficient-wise sum is the unit impulse at the
//! center tap, and decomposing then summing reconstructs the input.
//!
//! Filtering is a single linear-phase convolution whose `(L−1)/2`-sample
//! delay is removed, so every band output is time-aligned with the input.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::convolve::convolve_centered;
use crate::error::{Error, Result};
use crate::signal::Signal;

/// Filter length used by the reference analyzer.
pub const DEFAULT_FILTER_LENGTH: usize = 16_383;
/// Short filter length for quick runs.
pub const FAST_FILTER_LENGTH: usize = 1_023;
pub const MIN_FILTER_LENGTH: usize = 63;

/// Named band mappings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// Ten broadband subbands: 0, 50, 200, 400, 800, 1.2k, 1.8k, 3k, 6k, 15k, Nyquist.
    #[serde(rename = "ids10")]
    Ids10,
    /// Eight 25 Hz-wide low-frequency subbands (150–175 Hz for subband 6).
    #[serde(rename = "nl8")]
    Nl8,
    /// `nl8` with subband 6 ending at 170 Hz: the 170–175 Hz gap
    /// becomes its own unlabelled band (nine bands in total).
    #[serde(rename = "nl8-verbatim")]
    Nl8Verbatim,
    /// Three bands isolating a 65 Hz tone: 0–50, 50–80, 80 Hz–Nyquist.
    #[serde(rename = "sine65")]
    Sine65,
    /// Three bands isolating a 100 Hz tone: 0–85, 85–115, 115 Hz–Nyquist.
    #[serde(rename = "sine100")]
    Sine100,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Ids10,
        Preset::Nl8,
        Preset::Nl8Verbatim,
        Preset::Sine65,
        Preset::Sine100,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Ids10 => "ids10",
            Preset::Nl8 => "nl8",
            Preset::Nl8Verbatim => "nl8-verbatim",
            Preset::Sine65 => "sine65",
            Preset::Sine100 => "sine100",
        }
    }

    fn interior_edges(self) -> &'static [f64] {
        match self {
            Preset::Ids10 => &[50.0, 200.0, 400.0, 800.0, 1200.0, 1800.0, 3000.0, 6000.0, 15000.0],
            Preset::Nl8 => &[50.0, 75.0, 100.0, 125.0, 150.0, 175.0, 200.0],
            Preset::Nl8Verbatim => &[50.0, 75.0, 100.0, 125.0, 150.0, 170.0, 175.0, 200.0],
            Preset::Sine65 => &[50.0, 80.0],
            Preset::Sine100 => &[85.0, 115.0],
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidMapping(format!("unknown preset {s:?}")))
    }
}

/// An ordered partition of `[0, Nyquist]` into contiguous bands `[e_i, e_{i+1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandMapping {
    edges: Vec<f64>,
    sample_rate: u32,
}

impl BandMapping {
    pub fn new(edges: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidMapping("sample rate must be positive".into()));
        }
        let nyquist = sample_rate as f64 / 2.0;
        if edges.len() < 3 {
            return Err(Error::InvalidMapping(format!(
                "at least 2 bands (3 edges) required, got {} edge(s)",
                edges.len()
            )));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidMapping("edges must be finite".into()));
        }
        if edges[0] != 0.0 {
            return Err(Error::InvalidMapping(format!(
                "first edge must be 0 Hz, got {}",
                edges[0]
            )));
        }
        let last = edges[edges.len() - 1];
        if last != nyquist {
            return Err(Error::InvalidMapping(format!(
                "last edge must be the Nyquist frequency {nyquist} Hz, got {last}"
            )));
        }
        if let Some(w) = edges.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMapping(format!(
                "edges must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(BandMapping { edges, sample_rate })
    }

    pub fn preset(preset: Preset, sample_rate: u32) -> Result<Self> {
        let mut edges = vec![0.0];
        edges.extend_from_slice(preset.interior_edges());
        edges.push(sample_rate as f64 / 2.0);
        BandMapping::new(edges, sample_rate)
    }

    /// Parse a plain-text mapping: one edge in Hz per line, `#` comments allowed.
    pub fn parse(text: &str, sample_rate: u32) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let edge: f64 = line.parse().map_err(|_| {
                Error::InvalidMapping(format!("line {}: not a number: {line:?}", lineno + 1))
            })?;
            edges.push(edge);
        }
        BandMapping::new(edges, sample_rate)
    }

    pub fn from_file(path: impl AsRef<Path>, sample_rate: u32) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading mapping {}", path.display()), e))?;
        BandMapping::parse(&text, sample_rate)
    }

    pub fn to_text(&self) -> String {
        self.edges.iter().map(|e| format!("{e}\n")).collect()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_bands(&self) -> usize {
        self.edges.len() - 1
    }

    /// `(low, high)` edges of band `index`.
    pub fn band(&self, index: usize) -> Option<(f64, f64)> {
        (index < self.num_bands()).then(|| (self.edges[index], self.edges[index + 1]))
    }

    pub fn bands(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.edges.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Set of zero-phase band filters realizing a [`BandMapping`].
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    mapping: BandMapping,
    taps: Vec<Vec<f64>>,
    length: usize,
}

/// Symmetric Blackman window of odd length `2·half + 1`, returned for offsets `0..=half`.
fn blackman_half(half: usize) -> Vec<f64> {
    let span = (2 * half) as f64;
    (0..=half)
        .map(|k| {
            let n = (half + k) as f64;
            let x = 2.0 * std::f64::consts::PI * n / span;
            0.42 - 0.5 * x.cos() + 0.08 * (2.0 * x).cos()
        })
        .collect()
}

/// Unit-DC-gain windowed-sinc lowpass at `cutoff` Hz, exactly symmetric.
fn lowpass(cutoff: f64, sample_rate: f64, window: &[f64]) -> Vec<f64> {
    let half = window.len() - 1;
    let length = 2 * half + 1;
    let nyquist = sample_rate / 2.0;
    let mut taps = vec![0.0; length];
    if cutoff <= 0.0 {
        return taps;
    }
    if cutoff >= nyquist {
        taps[half] = 1.0;
        return taps;
    }
    let fc = cutoff / sample_rate;
    let mut one_side = Vec::with_capacity(half + 1);
    for (k, w) in window.iter().enumerate() {
        let ideal = if k == 0 {
            2.0 * fc
        } else {
            let x = std::f64::consts::PI * k as f64;
            (2.0 * fc * x).sin() / x
        };
        one_side.push(ideal * w);
    }
    let dc: f64 = one_side[0] + 2.0 * one_side[1..].iter().sum::<f64>();
    for (k, v) in one_side.iter().enumerate() {
        let v = v / dc;
        taps[half + k] = v;
        taps[half - k] = v;
    }
    taps
}

/// Design a complementary zero-phase bank with `length` taps per band.
pub fn design_bank(mapping: &BandMapping, length: usize) -> Result<FilterBank> {
    if length.is_multiple_of(2) || length < MIN_FILTER_LENGTH {
        return Err(Error::InvalidLength(length));
    }
    let half = (length - 1) / 2;
    let window = blackman_half(half);
    let fs = mapping.sample_rate() as f64;
    let lowpasses: Vec<Vec<f64>> = mapping
        .edges()
        .iter()
        .map(|&e| lowpass(e, fs, &window))
        .collect();
    let taps = lowpasses
        .windows(2)
        .map(|pair| pair[1].iter().zip(&pair[0]).map(|(hi, lo)| hi - lo).collect())
        .collect();
    Ok(FilterBank {
        mapping: mapping.clone(),
        taps,
        length,
    })
}

impl FilterBank {
    pub fn mapping(&self) -> &BandMapping {
        &self.mapping
    }

    pub fn sample_rate(&self) -> u32 {
        self.mapping.sample_rate()
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn num_bands(&self) -> usize {
        self.taps.len()
    }

    /// Samples of group delay removed by the zero-phase realization.
    pub fn delay(&self) -> usize {
        (self.length - 1) / 2
    }

    pub fn taps(&self, band: usize) -> Option<&[f64]> {
        self.taps.get(band).map(Vec::as_slice)
    }

    pub fn all_taps(&self) -> &[Vec<f64>] {
        &self.taps
    }

    /// Real (zero-phase) amplitude response of `band` at `freq` Hz.
    pub fn amplitude_response(&self, band: usize, freq: f64) -> Option<f64> {
        let taps = self.taps.get(band)?;
        let half = self.delay();
        let w = 2.0 * std::f64::consts::PI * freq / self.sample_rate() as f64;
        let tail: f64 = (1..=half)
            .map(|k| taps[half + k] * (w * k as f64).cos())
            .sum();
        Some(taps[half] + 2.0 * tail)
    }

    fn check_rate(&self, signal: &Signal) -> Result<()> {
        if signal.sample_rate() != self.sample_rate() {
            return Err(Error::RateMismatch {
                expected: self.sample_rate(),
                actual: signal.sample_rate(),
            });
        }
        Ok(())
    }

    /// Filter `signal` through band `band` with the group delay removed.
    pub fn apply_zero_phase(&self, band: usize, signal: &Signal) -> Result<Signal> {
        let taps = self.taps.get(band).ok_or(Error::BandIndex {
            index: band,
            bands: self.num_bands(),
        })?;
        self.check_rate(signal)?;
        let out = convolve_centered(signal.samples(), &[taps.as_slice()])
            .pop()
            .expect("one filter in, one output");
        Ok(Signal::from_parts_unchecked(out, signal.sample_rate()))
    }

    /// Split `signal` into one time-aligned subband signal per band.
    pub fn decompose(&self, signal: &Signal) -> Result<Vec<Signal>> {
        self.check_rate(signal)?;
        let filters: Vec<&[f64]> = self.taps.iter().map(Vec::as_slice).collect();
        Ok(convolve_centered(signal.samples(), &filters)
            .into_iter()
            .map(|s| Signal::from_parts_unchecked(s, signal.sample_rate()))
            .collect())
    }

    /// Taps as CSV: `tap,band_1,...,band_N`, tap index relative to the center.
    pub fn taps_csv(&self) -> String {
        let mut out = String::from("tap");
        for b in 1..=self.num_bands() {
            out.push_str(&format!(",band_{b}"));
        }
        out.push('\n');
        let half = self.delay() as i64;
        for n in 0..self.length {
            out.push_str(&(n as i64 - half).to_string());
            for taps in &self.taps {
                out.push_str(&format!(",{}", taps[n]));
            }
            out.push('\n');
        }
        out
    }
}
