//! Recordings of one stimulus/microphone pair indexed by source distance.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Grouping key of a series.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeriesKey {
    pub microphone: String,
    pub directivity: String,
    pub stimulus: String,
}

impl SeriesKey {
    pub fn new(
        microphone: impl Into<String>,
        directivity: impl Into<String>,
        stimulus: impl Into<String>,
    ) -> Self {
        SeriesKey {
            microphone: microphone.into(),
            directivity: directivity.into(),
            stimulus: stimulus.into(),
        }
    }

    /// `microphone_directivity_stimulus`, restricted to filename-safe characters.
    pub fn file_stem(&self) -> String {
        [&self.microphone, &self.directivity, &self.stimulus]
            .iter()
            .map(|s| sanitize(s))
            .collect::<Vec<_>>()
            .join("_")
    }
}

impl fmt::Display for SeriesKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.microphone, self.directivity, self.stimulus)
    }
}

pub(crate) fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '-' })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub distance_cm: f64,
    pub signal: Signal,
    pub path: Option<PathBuf>,
}

/// Distance-sorted recordings with unique distances and a shared sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSeries {
    key: SeriesKey,
    recordings: Vec<Recording>,
}

impl MeasurementSeries {
    pub fn new(key: SeriesKey, mut recordings: Vec<Recording>) -> Result<Self> {
        if recordings.is_empty() {
            return Err(Error::InvalidInput(format!("series {key} has no recordings")));
        }
        if let Some(r) = recordings
            .iter()
            .find(|r| !(r.distance_cm >= 0.0 && r.distance_cm.is_finite()))
        {
            return Err(Error::InvalidInput(format!(
                "distance must be finite and >= 0, got {}",
                r.distance_cm
            )));
        }
        recordings.sort_by(|a, b| a.distance_cm.total_cmp(&b.distance_cm));
        if let Some(w) = recordings.windows(2).find(|w| w[0].distance_cm == w[1].distance_cm) {
            return Err(Error::DuplicateDistance(w[0].distance_cm));
        }
        let rate = recordings[0].signal.sample_rate();
        if let Some(r) = recordings.iter().find(|r| r.signal.sample_rate() != rate) {
            return Err(Error::RateMismatch {
                expected: rate,
                actual: r.signal.sample_rate(),
            });
        }
        Ok(MeasurementSeries { key, recordings })
    }

    /// Convenience constructor from `(distance, signal)` pairs.
    pub fn from_signals(key: SeriesKey, points: Vec<(f64, Signal)>) -> Result<Self> {
        MeasurementSeries::new(
            key,
            points
                .into_iter()
                .map(|(distance_cm, signal)| Recording {
                    distance_cm,
                    signal,
                    path: None,
                })
                .collect(),
        )
    }

    pub fn key(&self) -> &SeriesKey {
        &self.key
    }

    pub fn recordings(&self) -> &[Recording] {
        &self.recordings
    }

    pub fn sample_rate(&self) -> u32 {
        self.recordings[0].signal.sample_rate()
    }

    pub fn distances(&self) -> Vec<f64> {
        self.recordings.iter().map(|r| r.distance_cm).collect()
    }

    pub fn get(&self, distance_cm: f64) -> Option<&Recording> {
        self.recordings.iter().find(|r| r.distance_cm == distance_cm)
    }

    pub fn len(&self) -> usize {
        self.recordings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recordings.is_empty()
    }

    pub fn min_len(&self) -> usize {
        self.recordings.iter().map(|r| r.signal.len()).min().unwrap_or(0)
    }

    /// Copy with every recording truncated to the shortest one.
    pub fn trimmed_to_common_length(&self) -> MeasurementSeries {
        let len = self.min_len();
        MeasurementSeries {
            key: self.key.clone(),
            recordings: self
                .recordings
                .iter()
                .map(|r| Recording {
                    distance_cm: r.distance_cm,
                    signal: r.signal.truncated(len).expect("len >= 1"),
                    path: r.path.clone(),
                })
                .collect(),
        }
    }

    /// Copy with every recording multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Result<MeasurementSeries> {
        let recordings = self
            .recordings
            .iter()
            .map(|r| {
                Ok(Recording {
                    distance_cm: r.distance_cm,
                    signal: r.signal.scaled(gain)?,
                    path: r.path.clone(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(MeasurementSeries {
            key: self.key.clone(),
            recordings,
        })
    }
}
