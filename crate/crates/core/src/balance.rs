//! Spectral balance: per-subband relative energy weights.
//!
//! The weight of a subband is the sum of squares of its samples divided by
//! the sum of squares of the whole signal. Weights are energy ratios, so
//! their relative-dB form is `10·log10`, not `20·log10`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::{BandMapping, FilterBank};
use crate::level::CurvePoint;
use crate::series::MeasurementSeries;
use crate::signal::{mean_level_dbfs, Decibels, LevelDbfs, Signal};

/// Subband energies below this fraction of the total count as silence.
pub const SUBBAND_SILENCE_FLOOR: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceResult {
    pub mapping: BandMapping,
    pub weights_linear: Vec<f64>,
    pub weights_db: Vec<Decibels>,
    pub mean_level: LevelDbfs,
}

impl BalanceResult {
    pub fn num_bands(&self) -> usize {
        self.weights_linear.len()
    }

    pub fn total_linear(&self) -> f64 {
        self.weights_linear.iter().sum()
    }

    /// One row per band: `band,low_hz,high_hz,weight_linear,weight_db`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("band,low_hz,high_hz,weight_linear,weight_db\n");
        for (i, ((lo, hi), (lin, db))) in self
            .mapping
            .bands()
            .zip(self.weights_linear.iter().zip(&self.weights_db))
            .enumerate()
        {
            out.push_str(&format!("{},{lo},{hi},{lin},{db}\n", i + 1));
        }
        out
    }
}

/// Relative weight of every subband of `signal` in `bank`'s mapping.
pub fn spectral_balance(signal: &Signal, bank: &FilterBank) -> Result<BalanceResult> {
    let total = signal.energy();
    if total == 0.0 {
        return Err(Error::Silence);
    }
    let subbands = bank.decompose(signal)?;
    let mut weights_linear = Vec::with_capacity(subbands.len());
    let mut weights_db = Vec::with_capacity(subbands.len());
    for band in &subbands {
        let ratio = band.energy() / total;
        if ratio <= SUBBAND_SILENCE_FLOOR {
            weights_linear.push(0.0);
            weights_db.push(Decibels::Silence);
        } else {
            weights_linear.push(ratio);
            weights_db.push(Decibels::from_power_ratio(ratio));
        }
    }
    Ok(BalanceResult {
        mapping: bank.mapping().clone(),
        weights_linear,
        weights_db,
        mean_level: mean_level_dbfs(signal),
    })
}

/// Weight of one band relative to its weight at the reference distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightEvolution {
    pub band_index: usize,
    pub low_hz: f64,
    pub high_hz: f64,
    /// One point per measured distance; `None` where the band is silent.
    pub points: Vec<CurvePoint>,
}

/// Balances of every recording in `series`, in distance order.
pub fn series_balances(series: &MeasurementSeries, bank: &FilterBank) -> Result<Vec<BalanceResult>> {
    series
        .recordings()
        .par_iter()
        .map(|r| {
            spectral_balance(&r.signal, bank).map_err(|e| match e {
                Error::Silence => Error::InvalidInput(format!(
                    "recording at {} cm is silent",
                    r.distance_cm
                )),
                other => other,
            })
        })
        .collect()
}

/// Per-band weight evolution from precomputed balances.
pub fn evolution_from_balances(
    distances: &[f64],
    balances: &[BalanceResult],
    reference_distance: f64,
) -> Result<Vec<WeightEvolution>> {
    let ref_idx = distances
        .iter()
        .position(|&d| d == reference_distance)
        .ok_or(Error::MissingReference(reference_distance))?;
    let reference = &balances[ref_idx];
    let mapping = &reference.mapping;
    let evolutions = mapping
        .bands()
        .enumerate()
        .map(|(band, (low_hz, high_hz))| {
            let ref_db = reference.weights_db[band].value();
            let points = distances
                .iter()
                .zip(balances)
                .map(|(&distance_cm, b)| {
                    let value_db = if distance_cm == reference_distance {
                        ref_db.map(|_| 0.0)
                    } else {
                        match (b.weights_db[band].value(), ref_db) {
                            (Some(w), Some(r)) => Some(w - r),
                            _ => None,
                        }
                    };
                    if value_db.is_none() {
                        log::warn!(
                            "band {} silent at {distance_cm} cm or at the reference; point excluded",
                            band + 1
                        );
                    }
                    CurvePoint {
                        distance_cm,
                        value_db,
                    }
                })
                .collect();
            WeightEvolution {
                band_index: band,
                low_hz,
                high_hz,
                points,
            }
        })
        .collect();
    Ok(evolutions)
}

/// Per-band relative-weight change versus distance, 0 dB at the reference distance.
pub fn weight_evolution(
    series: &MeasurementSeries,
    bank: &FilterBank,
    reference_distance: f64,
) -> Result<Vec<WeightEvolution>> {
    if series.get(reference_distance).is_none() {
        return Err(Error::MissingReference(reference_distance));
    }
    let balances = series_balances(series, bank)?;
    evolution_from_balances(&series.distances(), &balances, reference_distance)
}

/// Subband weight differences between a stimulus and a recording.
///
/// A positive difference means the band weighs more in the stimulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceDifference {
    pub diffs_db: Vec<Option<f64>>,
    pub stimulus_level: LevelDbfs,
    pub recording_level: LevelDbfs,
}

pub fn balance_difference(
    stimulus: &BalanceResult,
    recording: &BalanceResult,
) -> Result<BalanceDifference> {
    if stimulus.mapping != recording.mapping {
        return Err(Error::MappingMismatch(format!(
            "stimulus edges {:?} vs recording edges {:?}",
            stimulus.mapping.edges(),
            recording.mapping.edges()
        )));
    }
    let diffs_db = stimulus
        .weights_db
        .iter()
        .zip(&recording.weights_db)
        .map(|(s, r)| match (s.value(), r.value()) {
            (Some(s), Some(r)) => Some(s - r),
            _ => None,
        })
        .collect();
    Ok(BalanceDifference {
        diffs_db,
        stimulus_level: stimulus.mean_level,
        recording_level: recording.mean_level,
    })
}
