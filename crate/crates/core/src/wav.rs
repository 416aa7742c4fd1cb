//! RIFF/WAVE ingestion and export (PCM16, PCM24, Float32, little-endian).
//!
//! Integer PCM is scaled by `2^(bits-1)`: a 16-bit value of 32767 reads as
//! 32767/32768. The sample rate in the header is authoritative.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Sample encodings supported by the reader and writer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WavEncoding {
    Pcm16,
    Pcm24,
    Float32,
}

impl WavEncoding {
    fn spec(self, sample_rate: u32) -> hound::WavSpec {
        let (bits_per_sample, sample_format) = match self {
            WavEncoding::Pcm16 => (16, hound::SampleFormat::Int),
            WavEncoding::Pcm24 => (24, hound::SampleFormat::Int),
            WavEncoding::Float32 => (32, hound::SampleFormat::Float),
        };
        hound::WavSpec {
            channels: 1,
            sample_rate,
            bits_per_sample,
            sample_format,
        }
    }

    /// Quantization step in full-scale units (zero for float).
    pub fn lsb(self) -> f64 {
        match self {
            WavEncoding::Pcm16 => 1.0 / 32768.0,
            WavEncoding::Pcm24 => 1.0 / 8_388_608.0,
            WavEncoding::Float32 => 0.0,
        }
    }
}

impl std::str::FromStr for WavEncoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pcm16" | "16" => Ok(WavEncoding::Pcm16),
            "pcm24" | "24" => Ok(WavEncoding::Pcm24),
            "float32" | "f32" | "float" => Ok(WavEncoding::Float32),
            other => Err(Error::InvalidInput(format!("unknown WAV encoding {other:?}"))),
        }
    }
}

fn map_hound(path: &Path, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => Error::io(format!("reading {}", path.display()), e),
        hound::Error::Unsupported => Error::WavUnsupported {
            path: path.to_path_buf(),
            reason: "encoding not supported".into(),
        },
        other => Error::WavFormat {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    }
}

/// Read channel 0 of a WAV file.
pub fn load_wav(path: impl AsRef<Path>) -> Result<Signal> {
    load_wav_channel(path, 0)
}

/// Read one channel of a WAV file, scaled to full-scale units.
pub fn load_wav_channel(path: impl AsRef<Path>, channel: usize) -> Result<Signal> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(|e| map_hound(path, e))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channel >= channels {
        return Err(Error::ChannelOutOfRange { channel, channels });
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) | (hound::SampleFormat::Int, 24) => {
            let scale = (1i64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| map_hound(path, e))?
        }
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| map_hound(path, e))?,
        (format, bits) => {
            return Err(Error::WavUnsupported {
                path: path.to_path_buf(),
                reason: format!("{bits}-bit {format:?} samples"),
            })
        }
    };

    let samples: Vec<f64> = interleaved
        .into_iter()
        .skip(channel)
        .step_by(channels)
        .collect();
    if samples.is_empty() {
        return Err(Error::EmptySignal);
    }
    Signal::new(samples, spec.sample_rate).map_err(|e| match e {
        Error::InvalidSignal(reason) => Error::WavFormat {
            path: path.to_path_buf(),
            reason,
        },
        other => other,
    })
}

/// Write a mono WAV file. Integer encodings clip to the representable range.
pub fn save_wav(path: impl AsRef<Path>, signal: &Signal, encoding: WavEncoding) -> Result<()> {
    let path = path.as_ref();
    let ctx = || format!("writing {}", path.display());
    let mut writer = hound::WavWriter::create(path, encoding.spec(signal.sample_rate()))
        .map_err(|e| match e {
            hound::Error::IoError(io) => Error::io(ctx(), io),
            other => Error::WavFormat {
                path: path.to_path_buf(),
                reason: other.to_string(),
            },
        })?;
    let write_err = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(ctx(), io),
        other => Error::WavFormat {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    };
    match encoding {
        WavEncoding::Pcm16 | WavEncoding::Pcm24 => {
            let bits = if encoding == WavEncoding::Pcm16 { 16 } else { 24 };
            let scale = (1i64 << (bits - 1)) as f64;
            let (lo, hi) = (-scale, scale - 1.0);
            for &s in signal.samples() {
                let q = (s * scale).round().clamp(lo, hi) as i32;
                writer.write_sample(q).map_err(write_err)?;
            }
        }
        WavEncoding::Float32 => {
            for &s in signal.samples() {
                writer.write_sample(s as f32).map_err(write_err)?;
            }
        }
    }
    writer.finalize().map_err(write_err)
}
