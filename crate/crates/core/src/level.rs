//! Mean-level amplification versus distance, the 1/x spherical-wave law,
//! and validity-limit detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::MeasurementSeries;
use crate::signal::mean_level_dbfs;

/// Default tolerance for deviations from the wave prediction, in dB.
pub const DEFAULT_THRESHOLD_DB: f64 = 1.0;
/// Default reference distance, in cm.
pub const DEFAULT_REFERENCE_CM: f64 = 100.0;
/// Minimum number of compliant points backing a validity limit.
pub const DEFAULT_MIN_SUPPORT: usize = 2;

/// A `(distance, dB)` sample of a curve. `value_db` is `None` where the value is
/// undefined (silent recording, or the 1/x law evaluated at the source).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub distance_cm: f64,
    pub value_db: Option<f64>,
}

impl CurvePoint {
    pub fn new(distance_cm: f64, value_db: f64) -> Self {
        CurvePoint {
            distance_cm,
            value_db: Some(value_db),
        }
    }
}

/// Mean-level amplification relative to the reference distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCurve {
    pub reference_distance_cm: f64,
    pub points: Vec<CurvePoint>,
}

/// `20·log10(x_ref / x)`: level gain of a spherical wave at `x` relative to `x_ref`.
pub fn theoretical_amplification(x_cm: f64, x_ref_cm: f64) -> Result<f64> {
    if !(x_cm > 0.0) {
        return Err(Error::Singularity(x_cm));
    }
    if !(x_ref_cm > 0.0) {
        return Err(Error::Singularity(x_ref_cm));
    }
    Ok(20.0 * (x_ref_cm / x_cm).log10())
}

/// Mean level of every recording minus the mean level at the reference distance.
pub fn measured_level_curve(series: &MeasurementSeries, reference_distance: f64) -> Result<LevelCurve> {
    let reference = series
        .get(reference_distance)
        .ok_or(Error::MissingReference(reference_distance))?;
    let ref_level = mean_level_dbfs(&reference.signal).value();
    let points = series
        .recordings()
        .iter()
        .map(|r| {
            let value_db = if r.distance_cm == reference_distance {
                ref_level.map(|_| 0.0)
            } else {
                match (mean_level_dbfs(&r.signal).value(), ref_level) {
                    (Some(l), Some(rl)) => Some(l - rl),
                    _ => None,
                }
            };
            CurvePoint {
                distance_cm: r.distance_cm,
                value_db,
            }
        })
        .collect();
    Ok(LevelCurve {
        reference_distance_cm: reference_distance,
        points,
    })
}

/// Measured, theoretical and gap values at one distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub distance_cm: f64,
    pub measured_db: Option<f64>,
    /// `None` at the source (x = 0), where the law is undefined.
    pub theoretical_db: Option<f64>,
    /// `measured − theoretical`; negative means measured below the law.
    pub gap_db: Option<f64>,
}

impl GapPoint {
    pub fn theory_undefined(&self) -> bool {
        self.theoretical_db.is_none()
    }

    pub fn as_deviation(&self) -> CurvePoint {
        CurvePoint {
            distance_cm: self.distance_cm,
            value_db: self.gap_db,
        }
    }
}

/// Deviation of a measured curve from the 1/x law, point by point.
pub fn gap_curve(measured: &LevelCurve, x_ref_cm: f64) -> Result<Vec<GapPoint>> {
    if !(x_ref_cm > 0.0) {
        return Err(Error::Singularity(x_ref_cm));
    }
    Ok(measured
        .points
        .iter()
        .map(|p| {
            let theoretical_db = (p.distance_cm > 0.0)
                .then(|| theoretical_amplification(p.distance_cm, x_ref_cm).ok())
                .flatten();
            let gap_db = match (p.value_db, theoretical_db) {
                (Some(m), Some(t)) => Some(m - t),
                _ => None,
            };
            GapPoint {
                distance_cm: p.distance_cm,
                measured_db: p.value_db,
                theoretical_db,
                gap_db,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityVerdict {
    pub limit_distance_cm: Option<f64>,
    pub threshold_db: f64,
    pub rule: String,
}

impl ValidityVerdict {
    pub fn is_valid_somewhere(&self) -> bool {
        self.limit_distance_cm.is_some()
    }
}

/// Smallest distance `d` such that every defined point at distance ≥ `d` has
/// `|deviation| ≤ threshold`.
///
/// The compliant tail must hold at least `min_support` defined points; a
/// single compliant farthest point (typically the reference itself, which is
/// 0 dB by construction) is not enough to claim a limit. Undefined points are
/// skipped.
pub fn validity_limit_with_support(
    curve: &[CurvePoint],
    threshold_db: f64,
    min_support: usize,
) -> Result<ValidityVerdict> {
    if curve.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "validity limit needs at least 2 points, got {}",
            curve.len()
        )));
    }
    if !(threshold_db > 0.0) {
        return Err(Error::InvalidInput(format!(
            "threshold must be positive, got {threshold_db}"
        )));
    }
    let mut defined: Vec<(f64, f64)> = curve
        .iter()
        .filter_map(|p| p.value_db.map(|v| (p.distance_cm, v)))
        .collect();
    defined.sort_by(|a, b| a.0.total_cmp(&b.0));

    let tail = defined
        .iter()
        .rev()
        .take_while(|(_, v)| v.abs() <= threshold_db)
        .count();
    let limit_distance_cm = (tail >= min_support.max(1)).then(|| defined[defined.len() - tail].0);
    Ok(ValidityVerdict {
        limit_distance_cm,
        threshold_db,
        rule: format!(
            "all points at distance >= limit satisfy |deviation| <= {threshold_db} dB \
             (at least {} compliant point(s))",
            min_support.max(1)
        ),
    })
}

/// [`validity_limit_with_support`] with the default support of two points.
pub fn validity_limit(curve: &[CurvePoint], threshold_db: f64) -> Result<ValidityVerdict> {
    validity_limit_with_support(curve, threshold_db, DEFAULT_MIN_SUPPORT)
}

/// A decrease to an interior minimum followed by a rise ("re-equalization").
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reequalization {
    pub minimum_distance_cm: f64,
    pub minimum_db: f64,
    /// Rise from the minimum to the farthest point.
    pub rise_db: f64,
}

/// Detect an interior minimum that both the nearest and the farthest points
/// exceed by more than `threshold_db`.
pub fn detect_reequalization(curve: &[CurvePoint], threshold_db: f64) -> Option<Reequalization> {
    let mut defined: Vec<(f64, f64)> = curve
        .iter()
        .filter_map(|p| p.value_db.map(|v| (p.distance_cm, v)))
        .collect();
    if defined.len() < 3 {
        return None;
    }
    defined.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (idx, &(distance, min)) = defined
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?;
    if idx == 0 || idx == defined.len() - 1 {
        return None;
    }
    let first = defined[0].1;
    let last = defined[defined.len() - 1].1;
    (first - min > threshold_db && last - min > threshold_db).then_some(Reequalization {
        minimum_distance_cm: distance,
        minimum_db: min,
        rise_db: last - min,
    })
}
