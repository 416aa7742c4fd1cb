//! Waveform carrier, dB FS metering and mean-level normalization.
//!
//! The mean level of a signal is its mean power expressed in dB relative to
//! digital full scale: `10·log10((1/N)·Σ s[n]²)`. A full-scale DC signal sits
//! at 0 dB FS and a full-scale sinusoid at −3.0103 dB FS.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default sampling frequency of the measurement chain.
pub const DEFAULT_SAMPLE_RATE: u32 = 44_100;

/// A uniformly sampled mono waveform.
///
/// Samples are nominally in `[-1, 1]` but larger values are allowed (a
/// synthetic recording close to the source may exceed full scale). Every
/// sample is finite and there is at least one of them.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidSignal("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Signal {
            samples,
            sample_rate,
        })
    }

    /// All-zero signal of the given length.
    pub fn zeros(len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; a `Signal` holds at least one sample.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    pub fn mean_power(&self) -> f64 {
        self.energy() / self.samples.len() as f64
    }

    pub fn is_silent(&self) -> bool {
        self.samples.iter().all(|&s| s == 0.0)
    }

    /// Multiply every sample by `gain`.
    pub fn scaled(&self, gain: f64) -> Result<Signal> {
        Signal::new(
            self.samples.iter().map(|s| s * gain).collect(),
            self.sample_rate,
        )
    }

    /// First `len` samples (or the whole signal when it is shorter).
    pub fn truncated(&self, len: usize) -> Result<Signal> {
        let len = len.min(self.samples.len());
        Signal::new(self.samples[..len].to_vec(), self.sample_rate)
    }

    pub(crate) fn from_parts_unchecked(samples: Vec<f64>, sample_rate: u32) -> Signal {
        debug_assert!(!samples.is_empty() && sample_rate > 0);
        Signal {
            samples,
            sample_rate,
        }
    }
}

/// A decibel value that may be the distinct silence sentinel.
///
/// Zero energy has no finite logarithm. Instead of carrying `-inf` through
/// tables it is kept as [`Decibels::Silence`], which serializes as the
/// string `"silence"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decibels {
    Finite(f64),
    Silence,
}

/// Mean power level in dB FS.
pub type LevelDbfs = Decibels;

impl Decibels {
    /// `10·log10(ratio)`, or silence for a zero ratio.
    pub fn from_power_ratio(ratio: f64) -> Decibels {
        if ratio > 0.0 {
            Decibels::Finite(10.0 * ratio.log10())
        } else {
            Decibels::Silence
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Decibels::Finite(v) => Some(v),
            Decibels::Silence => None,
        }
    }

    pub fn is_silence(self) -> bool {
        matches!(self, Decibels::Silence)
    }

    /// Linear power ratio; zero for silence.
    pub fn power_ratio(self) -> f64 {
        match self {
            Decibels::Finite(v) => 10f64.powf(v / 10.0),
            Decibels::Silence => 0.0,
        }
    }
}

impl fmt::Display for Decibels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decibels::Finite(v) => write!(f, "{v}"),
            Decibels::Silence => f.write_str("silence"),
        }
    }
}

impl Serialize for Decibels {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Decibels::Finite(v) => serializer.serialize_f64(*v),
            Decibels::Silence => serializer.serialize_str("silence"),
        }
    }
}

impl<'de> Deserialize<'de> for Decibels {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(v) => Ok(Decibels::Finite(v)),
            Repr::Str(s) if s == "silence" => Ok(Decibels::Silence),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"silence\", got {s:?}"
            ))),
        }
    }
}

/// Mean power of `signal` in dB FS; [`Decibels::Silence`] for an all-zero signal.
pub fn mean_level_dbfs(signal: &Signal) -> LevelDbfs {
    Decibels::from_power_ratio(signal.mean_power())
}

/// Scale `signal` by a single positive gain so that its mean level equals `target_dbfs`.
pub fn normalize_to_level(signal: &Signal, target_dbfs: f64) -> Result<Signal> {
    if !target_dbfs.is_finite() {
        return Err(Error::InvalidInput(format!(
            "target level must be finite, got {target_dbfs}"
        )));
    }
    let power = signal.mean_power();
    if power == 0.0 {
        return Err(Error::CannotNormalize);
    }
    let target_power = 10f64.powf(target_dbfs / 10.0);
    signal.scaled((target_power / power).sqrt())
}

/// Amplitude gain corresponding to `db` decibels.
pub fn db_to_gain(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn gain_to_db(gain: f64) -> f64 {
    20.0 * gain.log10()
}
