//! Test stimuli: level-calibrated sinusoids and seedable pink noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{normalize_to_level, Signal};
use crate::spectrum::welch;

/// Frequency below which the pink generator's spectrum flattens.
pub const PINK_FLATTEN_HZ: f64 = 20.0;

/// Minimum number of averaged segments for [`spectral_slope`].
pub const MIN_SLOPE_SEGMENTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StimulusKind {
    Pink { seed: u64 },
    Sine { frequency_hz: f64 },
}

/// Everything needed to regenerate a stimulus bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusSpec {
    #[serde(flatten)]
    pub kind: StimulusKind,
    pub duration_s: f64,
    pub sample_rate: u32,
    pub target_level_dbfs: f64,
}

impl StimulusSpec {
    pub fn sine(frequency_hz: f64, duration_s: f64, sample_rate: u32, target_level_dbfs: f64) -> Self {
        StimulusSpec {
            kind: StimulusKind::Sine { frequency_hz },
            duration_s,
            sample_rate,
            target_level_dbfs,
        }
    }

    pub fn pink(seed: u64, duration_s: f64, sample_rate: u32, target_level_dbfs: f64) -> Self {
        StimulusSpec {
            kind: StimulusKind::Pink { seed },
            duration_s,
            sample_rate,
            target_level_dbfs,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "duration must be positive, got {}",
                self.duration_s
            )));
        }
        if self.sample_rate == 0 {
            return Err(Error::InvalidSpec("sample rate must be positive".into()));
        }
        if !self.target_level_dbfs.is_finite() {
            return Err(Error::InvalidSpec("target level must be finite".into()));
        }
        if let StimulusKind::Sine { frequency_hz } = self.kind {
            let nyquist = self.sample_rate as f64 / 2.0;
            if !(frequency_hz > 0.0 && frequency_hz < nyquist) {
                return Err(Error::InvalidFrequency {
                    frequency: frequency_hz,
                    sample_rate: self.sample_rate,
                });
            }
        }
        Ok(())
    }

    fn target_len(&self) -> usize {
        ((self.duration_s * self.sample_rate as f64).round() as usize).max(1)
    }
}

/// Generate the stimulus described by `spec`.
pub fn generate(spec: &StimulusSpec) -> Result<Signal> {
    match spec.kind {
        StimulusKind::Pink { .. } => gen_pink(spec),
        StimulusKind::Sine { .. } => gen_sine(spec),
    }
}

/// Sample count holding a whole number of periods of `freq`, close to `target` samples.
fn whole_period_len(freq: f64, sample_rate: f64, target: usize) -> usize {
    let samples_per_period = sample_rate / freq;
    // smallest period count landing exactly on a sample boundary
    let exact = (1..=1000u32).find_map(|k| {
        let len = k as f64 * samples_per_period;
        ((len - len.round()).abs() < 1e-9).then(|| len.round() as usize)
    });
    match exact {
        Some(block) if block <= target => target / block * block,
        _ => {
            let periods = (target as f64 / samples_per_period).floor();
            if periods >= 1.0 {
                ((periods * samples_per_period).round() as usize).max(1)
            } else {
                target
            }
        }
    }
}

/// `A·sin(2π f n / fs)`, trimmed to whole periods, with `A` set so the measured
/// mean level equals the target.
pub fn gen_sine(spec: &StimulusSpec) -> Result<Signal> {
    spec.validate()?;
    let StimulusKind::Sine { frequency_hz } = spec.kind else {
        return Err(Error::InvalidSpec("gen_sine needs a sine spec".into()));
    };
    let fs = spec.sample_rate as f64;
    let len = whole_period_len(frequency_hz, fs, spec.target_len());
    let w = 2.0 * std::f64::consts::PI * frequency_hz / fs;
    let raw: Vec<f64> = (0..len).map(|n| (w * n as f64).sin()).collect();
    let raw = Signal::new(raw, spec.sample_rate)?;
    normalize_to_level(&raw, spec.target_level_dbfs).map_err(|_| {
        Error::InvalidSpec(format!(
            "{len}-sample sine at {frequency_hz} Hz has no energy; increase the duration"
        ))
    })
}

/// Voss-McCartney pink noise source.
///
/// Row `k` is redrawn whenever the sample counter has exactly `k` trailing
/// zeros, so it holds its value for `2^(k+1)` samples; an extra white row is
/// redrawn every sample. The row count puts the lowest row's hold time near
/// [`PINK_FLATTEN_HZ`], below which the spectrum flattens.
struct VossMcCartney {
    rng: ChaCha8Rng,
    rows: Vec<f64>,
    sum: f64,
    counter: u64,
}

impl VossMcCartney {
    fn new(seed: u64, sample_rate: u32) -> Self {
        let n_rows = ((sample_rate as f64 / PINK_FLATTEN_HZ).log2().round() as usize).clamp(1, 40);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<f64> = (0..n_rows).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sum = rows.iter().sum();
        VossMcCartney {
            rng,
            rows,
            sum,
            counter: 0,
        }
    }

    fn next_sample(&mut self) -> f64 {
        self.counter = self.counter.wrapping_add(1);
        let k = self.counter.trailing_zeros() as usize;
        if k < self.rows.len() {
            let fresh = self.rng.gen_range(-1.0..1.0);
            self.sum += fresh - self.rows[k];
            self.rows[k] = fresh;
        }
        self.sum + self.rng.gen_range(-1.0..1.0)
    }
}

/// Seed-deterministic pink noise at the target mean level.
pub fn gen_pink(spec: &StimulusSpec) -> Result<Signal> {
    spec.validate()?;
    let StimulusKind::Pink { seed } = spec.kind else {
        return Err(Error::InvalidSpec("gen_pink needs a pink spec".into()));
    };
    let mut source = VossMcCartney::new(seed, spec.sample_rate);
    let raw: Vec<f64> = (0..spec.target_len()).map(|_| source.next_sample()).collect();
    normalize_to_level(&Signal::new(raw, spec.sample_rate)?, spec.target_level_dbfs)
}

/// Least-squares slope, in dB per octave, of octave-band mean PSD versus
/// `log2(frequency)` over `[f_lo, f_hi]`.
///
/// The range is split into equal log-width bands of about one octave each; the
/// PSD is a Welch estimate whose segment length resolves `f_lo` with several bins.
pub fn spectral_slope(signal: &Signal, f_lo: f64, f_hi: f64) -> Result<f64> {
    let fs = signal.sample_rate() as f64;
    if !(f_lo > 0.0 && f_lo < f_hi && f_hi < fs / 2.0) {
        return Err(Error::InvalidInput(format!(
            "need 0 < f_lo < f_hi < Nyquist, got {f_lo}..{f_hi} at {fs} Hz"
        )));
    }
    let segment_len = ((8.0 * fs / f_lo).ceil() as usize).next_power_of_two();
    let psd = welch(
        signal.samples(),
        signal.sample_rate(),
        segment_len,
        MIN_SLOPE_SEGMENTS,
    )?;

    let span = (f_hi / f_lo).log2();
    let n_bands = (span - 1e-9).ceil().max(2.0) as usize;
    let width = span / n_bands as f64;
    let mut points = Vec::with_capacity(n_bands);
    for b in 0..n_bands {
        let lo = f_lo * 2f64.powf(b as f64 * width);
        let hi = f_lo * 2f64.powf((b + 1) as f64 * width);
        let mean = psd.band_mean(lo, hi).ok_or_else(|| {
            Error::InsufficientData(format!("no spectral bins between {lo} and {hi} Hz"))
        })?;
        if mean <= 0.0 {
            return Err(Error::InsufficientData(format!(
                "no energy between {lo:.1} and {hi:.1} Hz"
            )));
        }
        points.push(((lo * hi).sqrt().log2(), 10.0 * mean.log10()));
    }
    Ok(least_squares_slope(&points))
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
