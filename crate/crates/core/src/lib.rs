//! Broadband acoustic measurement analysis.
//!
//! - [`filterbank`]: complementary zero-phase FIR subband decomposition.
//! - [`balance`]: per-subband relative energy weights and their evolution with distance.
//! - [`level`]: mean-level curves against the 1/x spherical-wave law, validity limits.
//! - [`stimuli`]: pink noise and sinusoid generators, spectral slope check.
//! - [`synth`]: synthetic campaigns with known ground truth.
//! - [`campaign`]: manifest ingestion, batch analysis, comparison tables, export.

// `!(x > 0.0)` guards are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod balance;
pub mod campaign;
mod convolve;
pub mod error;
pub mod filterbank;
pub mod level;
pub mod series;
pub mod signal;
pub mod spectrum;
pub mod stimuli;
pub mod synth;
pub mod wav;

pub use balance::{balance_difference, spectral_balance, weight_evolution, BalanceResult, WeightEvolution};
pub use campaign::{
    analyze, compare_to_stimulus, export, ingest, AnalysisConfig, CampaignResult, ComparisonRow,
    ComparisonTable, Manifest, MeasurementEntry,
};
pub use error::{Error, Result};
pub use filterbank::{design_bank, BandMapping, FilterBank, Preset};
pub use level::{
    gap_curve, measured_level_curve, theoretical_amplification, validity_limit, CurvePoint,
    LevelCurve, ValidityVerdict,
};
pub use series::{MeasurementSeries, Recording, SeriesKey};
pub use signal::{mean_level_dbfs, normalize_to_level, Decibels, LevelDbfs, Signal};
pub use stimuli::{gen_pink, gen_sine, spectral_slope, StimulusSpec};
pub use synth::{directivity_gain, synth_campaign, synth_recording, DirectivityModel, DistanceProfile};
pub use wav::{load_wav, save_wav, WavEncoding};
