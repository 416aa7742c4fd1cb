//! Synthetic measurement campaigns with known ground truth.
//!
//! A synthetic recording is the stimulus scaled by the exact 1/x law and by
//! the first-order directivity gain `D(θ) = m + (1 − m)·cos θ`, optionally
//! reshaped band by band with a piecewise-linear distance profile. The
//! directivity is a broadband gain only; this is a harness for the analyzer,
//! not a physical near-field model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::FilterBank;
use crate::series::{MeasurementSeries, Recording, SeriesKey};
use crate::signal::{db_to_gain, Signal};

/// First-order microphone directivity with omnidirectional fraction `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectivityModel {
    m: f64,
}

impl DirectivityModel {
    pub const OMNI: DirectivityModel = DirectivityModel { m: 1.0 };
    pub const CARDIOID: DirectivityModel = DirectivityModel { m: 0.5 };
    pub const BIDIRECTIONAL: DirectivityModel = DirectivityModel { m: 0.0 };

    pub fn new(m: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::InvalidInput(format!(
                "omnidirectional fraction must be in [0, 1], got {m}"
            )));
        }
        Ok(DirectivityModel { m })
    }

    /// Look up a named pattern: omni, cardioid, bidirectional (or figure-8).
    pub fn from_label(label: &str) -> Option<Self> {
        match label.to_ascii_lowercase().as_str() {
            "omni" | "omnidirectional" => Some(Self::OMNI),
            "cardioid" | "cardio" => Some(Self::CARDIOID),
            "bidirectional" | "bidi" | "figure-8" | "figure8" => Some(Self::BIDIRECTIONAL),
            _ => None,
        }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn gain(&self, theta: f64) -> f64 {
        directivity_gain(*self, theta)
    }
}

/// `m + (1 − m)·cos θ`.
pub fn directivity_gain(model: DirectivityModel, theta: f64) -> f64 {
    model.m + (1.0 - model.m) * theta.cos()
}

/// Gain breakpoints for one subband. `band` is the 1-based subband number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandProfile {
    pub band: usize,
    /// `(distance_cm, gain_db)` pairs, strictly increasing in distance.
    pub breakpoints: Vec<(f64, f64)>,
}

/// Per-band extra gain as a piecewise-linear function of distance.
///
/// Bands without a profile get 0 dB. Outside the breakpoint range the end
/// values are held.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DistanceProfile {
    pub bands: Vec<BandProfile>,
}

impl DistanceProfile {
    pub fn new(bands: Vec<BandProfile>) -> Result<Self> {
        let profile = DistanceProfile { bands };
        profile.validate()?;
        Ok(profile)
    }

    /// Profile on a single band (0-based index).
    pub fn single(band_index: usize, breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        DistanceProfile::new(vec![BandProfile {
            band: band_index + 1,
            breakpoints,
        }])
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for bp in &self.bands {
            if bp.band == 0 {
                return Err(Error::InvalidSpec("profile band numbers start at 1".into()));
            }
            if !seen.insert(bp.band) {
                return Err(Error::InvalidSpec(format!("band {} profiled twice", bp.band)));
            }
            if bp.breakpoints.is_empty() {
                return Err(Error::InvalidSpec(format!("band {} has no breakpoints", bp.band)));
            }
            if bp
                .breakpoints
                .iter()
                .any(|(d, g)| !d.is_finite() || !g.is_finite())
            {
                return Err(Error::InvalidSpec(format!(
                    "band {} has a non-finite breakpoint",
                    bp.band
                )));
            }
            if bp.breakpoints.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::InvalidSpec(format!(
                    "band {} breakpoints must be sorted by distance without repeats",
                    bp.band
                )));
            }
        }
        Ok(())
    }

    /// Highest profiled 1-based band number.
    pub fn max_band(&self) -> usize {
        self.bands.iter().map(|b| b.band).max().unwrap_or(0)
    }

    pub fn is_flat(&self) -> bool {
        self.bands
            .iter()
            .all(|b| b.breakpoints.iter().all(|(_, g)| *g == 0.0))
    }

    /// Interpolated gain in dB for 0-based `band_index` at `distance_cm`.
    pub fn gain_db(&self, band_index: usize, distance_cm: f64) -> f64 {
        let Some(bp) = self.bands.iter().find(|b| b.band == band_index + 1) else {
            return 0.0;
        };
        let pts = &bp.breakpoints;
        let (first, last) = (pts[0], pts[pts.len() - 1]);
        if distance_cm <= first.0 {
            return first.1;
        }
        if distance_cm >= last.0 {
            return last.1;
        }
        let i = pts.partition_point(|p| p.0 <= distance_cm);
        let (d0, g0) = pts[i - 1];
        let (d1, g1) = pts[i];
        g0 + (g1 - g0) * (distance_cm - d0) / (d1 - d0)
    }
}

/// Broadband gain applied at `distance_cm`: `(x_ref / x)·D(θ)`.
fn broadband_gain(distance_cm: f64, x_ref_cm: f64, model: DirectivityModel, theta: f64) -> Result<f64> {
    if !(distance_cm > 0.0) {
        return Err(Error::Singularity(distance_cm));
    }
    if !(x_ref_cm > 0.0) {
        return Err(Error::Singularity(x_ref_cm));
    }
    Ok(x_ref_cm / distance_cm * directivity_gain(model, theta))
}

fn check_profile(profile: &DistanceProfile, bank: &FilterBank, rate: u32) -> Result<()> {
    profile.validate()?;
    if profile.max_band() > bank.num_bands() {
        return Err(Error::MappingMismatch(format!(
            "profile addresses band {} but the filter bank has {} bands",
            profile.max_band(),
            bank.num_bands()
        )));
    }
    if bank.sample_rate() != rate {
        return Err(Error::RateMismatch {
            expected: bank.sample_rate(),
            actual: rate,
        });
    }
    Ok(())
}

fn reshape(subbands: &[Signal], profile: &DistanceProfile, distance_cm: f64, gain: f64) -> Signal {
    let len = subbands[0].len();
    let mut out = vec![0.0; len];
    for (i, band) in subbands.iter().enumerate() {
        let g = gain * db_to_gain(profile.gain_db(i, distance_cm));
        for (o, s) in out.iter_mut().zip(band.samples()) {
            *o += g * s;
        }
    }
    Signal::from_parts_unchecked(out, subbands[0].sample_rate())
}

/// One synthetic recording of `stimulus` at `distance_cm`.
///
/// With a profile, the stimulus is split by `bank`, each subband is scaled by
/// its interpolated gain and the subbands are summed back.
pub fn synth_recording(
    stimulus: &Signal,
    distance_cm: f64,
    x_ref_cm: f64,
    model: DirectivityModel,
    theta: f64,
    profile: Option<&DistanceProfile>,
    bank: Option<&FilterBank>,
) -> Result<Signal> {
    let gain = broadband_gain(distance_cm, x_ref_cm, model, theta)?;
    match profile {
        None => stimulus.scaled(gain),
        Some(profile) => {
            let bank = bank.ok_or_else(|| {
                Error::MappingMismatch("a distance profile needs a filter bank".into())
            })?;
            check_profile(profile, bank, stimulus.sample_rate())?;
            let subbands = bank.decompose(stimulus)?;
            Ok(reshape(&subbands, profile, distance_cm, gain))
        }
    }
}

/// Description of a synthetic campaign, minus the stimulus waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCampaignSpec {
    pub key: SeriesKey,
    pub distances_cm: Vec<f64>,
    #[serde(default = "default_reference")]
    pub reference_distance_cm: f64,
    pub directivity_m: f64,
    #[serde(default)]
    pub theta_rad: f64,
    #[serde(default)]
    pub profile: Option<DistanceProfile>,
}

fn default_reference() -> f64 {
    crate::level::DEFAULT_REFERENCE_CM
}

/// Injected gain per band and distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRow {
    /// 1-based subband number.
    pub band: usize,
    pub distance_cm: f64,
    pub injected_gain_db: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub rows: Vec<GroundTruthRow>,
}

impl GroundTruth {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("band,distance_cm,injected_gain_db\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.band, r.distance_cm, r.injected_gain_db));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some("band,distance_cm,injected_gain_db") => {}
            other => {
                return Err(Error::InvalidInput(format!(
                    "unexpected ground-truth header {other:?}"
                )))
            }
        }
        let rows = lines
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let bad = || Error::InvalidInput(format!("bad ground-truth row {line:?}"));
                let mut f = line.split(',');
                let band = f.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                let distance_cm = f.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                let injected_gain_db = f.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                Ok(GroundTruthRow {
                    band,
                    distance_cm,
                    injected_gain_db,
                })
            })
            .collect::<Result<_>>()?;
        Ok(GroundTruth { rows })
    }

    /// Injected gain for 0-based `band_index` at `distance_cm`, 0 dB when absent.
    pub fn gain_db(&self, band_index: usize, distance_cm: f64) -> f64 {
        self.rows
            .iter()
            .find(|r| r.band == band_index + 1 && r.distance_cm == distance_cm)
            .map_or(0.0, |r| r.injected_gain_db)
    }

    /// Relative-weight change of band `band_index` at `distance_cm` versus the
    /// reference distance implied by the injected gains, given the stimulus'
    /// linear band weights.
    ///
    /// Boosting one band also raises the total energy, so the band's relative
    /// weight moves by the injected gain minus the change in total energy.
    pub fn expected_weight_delta(
        &self,
        band_index: usize,
        distance_cm: f64,
        reference_cm: f64,
        stimulus_weights: &[f64],
    ) -> f64 {
        let total = |d: f64| -> f64 {
            stimulus_weights
                .iter()
                .enumerate()
                .map(|(j, w)| w * 10f64.powf(self.gain_db(j, d) / 10.0))
                .sum()
        };
        self.gain_db(band_index, distance_cm) - self.gain_db(band_index, reference_cm)
            - 10.0 * (total(distance_cm) / total(reference_cm)).log10()
    }

    /// Expected mean-level amplification at `distance_cm` relative to the reference.
    pub fn expected_level_amplification(
        &self,
        distance_cm: f64,
        reference_cm: f64,
        stimulus_weights: &[f64],
    ) -> f64 {
        let total = |d: f64| -> f64 {
            stimulus_weights
                .iter()
                .enumerate()
                .map(|(j, w)| w * 10f64.powf(self.gain_db(j, d) / 10.0))
                .sum()
        };
        20.0 * (reference_cm / distance_cm).log10()
            + 10.0 * (total(distance_cm) / total(reference_cm)).log10()
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCampaign {
    pub series: MeasurementSeries,
    pub ground_truth: GroundTruth,
}

/// One synthetic recording per distance plus the injected per-band gains.
pub fn synth_campaign(
    spec: &SyntheticCampaignSpec,
    stimulus: &Signal,
    bank: Option<&FilterBank>,
) -> Result<SyntheticCampaign> {
    if spec.distances_cm.is_empty() {
        return Err(Error::InvalidSpec("campaign has no distances".into()));
    }
    if let Some(d) = spec.distances_cm.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        return Err(Error::InvalidSpec(format!("distances must be positive, got {d}")));
    }
    let mut sorted = spec.distances_cm.clone();
    sorted.sort_by(f64::total_cmp);
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateDistance(w[0]));
    }
    let model = DirectivityModel::new(spec.directivity_m)?;

    let shaping = match (&spec.profile, bank) {
        (Some(profile), Some(bank)) => {
            check_profile(profile, bank, stimulus.sample_rate())?;
            Some((profile, bank.decompose(stimulus)?))
        }
        (Some(_), None) => {
            return Err(Error::MappingMismatch(
                "a distance profile needs a filter bank".into(),
            ))
        }
        (None, _) => None,
    };

    let recordings = spec
        .distances_cm
        .par_iter()
        .map(|&distance_cm| {
            let gain = broadband_gain(distance_cm, spec.reference_distance_cm, model, spec.theta_rad)?;
            let signal = match &shaping {
                Some((profile, subbands)) => reshape(subbands, profile, distance_cm, gain),
                None => stimulus.scaled(gain)?,
            };
            Ok(Recording {
                distance_cm,
                signal,
                path: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let series = MeasurementSeries::new(spec.key.clone(), recordings)?;

    let mut ground_truth = GroundTruth::default();
    if let Some(bank) = bank {
        for band in 0..bank.num_bands() {
            for &distance_cm in &sorted {
                let injected_gain_db = spec
                    .profile
                    .as_ref()
                    .map_or(0.0, |p| p.gain_db(band, distance_cm));
                ground_truth.rows.push(GroundTruthRow {
                    band: band + 1,
                    distance_cm,
                    injected_gain_db,
                });
            }
        }
    }
    Ok(SyntheticCampaign {
        series,
        ground_truth,
    })
}
