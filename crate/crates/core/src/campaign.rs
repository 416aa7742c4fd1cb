//! Measurement campaigns: manifest ingestion, per-series analysis, stimulus
//! comparison tables, and deterministic export.
//!
//! # Manifest format
//!
//! ```json
//! {
//!   "channel": 0,
//!   "entries": [
//!     { "path": "ecm8000_music_100.wav", "distance_cm": 100,
//!       "microphone": "ECM8000", "directivity": "omni", "stimulus": "music" }
//!   ]
//! }
//! ```
//!
//! Relative paths resolve against the manifest's directory. Entries are
//! grouped into series by `(microphone, directivity, stimulus)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::balance::{balance_difference, evolution_from_balances, series_balances, spectral_balance};
use crate::error::{Error, Result};
use crate::filterbank::FilterBank;
use crate::level::{
    detect_reequalization, gap_curve, measured_level_curve, validity_limit_with_support, CurvePoint,
    GapPoint, LevelCurve, Reequalization, ValidityVerdict, DEFAULT_MIN_SUPPORT,
    DEFAULT_REFERENCE_CM, DEFAULT_THRESHOLD_DB,
};
use crate::series::{MeasurementSeries, Recording, SeriesKey};
use crate::signal::{LevelDbfs, Signal};
use crate::synth::SyntheticCampaign;
use crate::wav::{load_wav_channel, save_wav, WavEncoding};

/// One recording listed in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementEntry {
    pub path: PathBuf,
    pub distance_cm: f64,
    pub microphone: String,
    /// omni, cardioid, bidirectional or sensor.
    pub directivity: String,
    /// pink, music, sine65, sine100, ...
    pub stimulus: String,
}

impl MeasurementEntry {
    pub fn key(&self) -> SeriesKey {
        SeriesKey::new(&self.microphone, &self.directivity, &self.stimulus)
    }

    fn validate(&self) -> Result<()> {
        if !(self.distance_cm >= 0.0 && self.distance_cm.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{}: distance must be >= 0, got {}",
                self.path.display(),
                self.distance_cm
            )));
        }
        for (name, v) in [
            ("microphone", &self.microphone),
            ("directivity", &self.directivity),
            ("stimulus", &self.stimulus),
        ] {
            if v.trim().is_empty() {
                return Err(Error::InvalidInput(format!(
                    "{}: empty {name} label",
                    self.path.display()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Manifest {
    /// Channel read from multichannel files.
    #[serde(default)]
    pub channel: usize,
    pub entries: Vec<MeasurementEntry>,
}

impl Manifest {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Manifest> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading manifest {}", path.display()), e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::json(format!("parsing manifest {}", path.display()), e))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::json("serializing manifest", e))?;
        std::fs::write(path, text + "\n")
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }
}

/// A series that could not be loaded or analyzed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesError {
    pub series: SeriesKey,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    pub series: Vec<MeasurementSeries>,
    pub errors: Vec<SeriesError>,
}

impl IngestReport {
    /// Number of distinct series named by the manifest.
    pub fn series_count(&self) -> usize {
        self.series.len() + self.errors.len()
    }
}

/// Load and group every entry of the manifest at `manifest_path`.
pub fn ingest(manifest_path: impl AsRef<Path>) -> Result<IngestReport> {
    let manifest_path = manifest_path.as_ref();
    let manifest = Manifest::from_file(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    Ok(ingest_manifest(&manifest, base))
}

/// Group entries into series and load their recordings. Series with a
/// missing file, duplicate distance or rate mismatch are reported, not dropped.
pub fn ingest_manifest(manifest: &Manifest, base_dir: &Path) -> IngestReport {
    let mut groups: BTreeMap<SeriesKey, Vec<&MeasurementEntry>> = BTreeMap::new();
    for entry in &manifest.entries {
        groups.entry(entry.key()).or_default().push(entry);
    }

    let loaded: Vec<std::result::Result<MeasurementSeries, SeriesError>> = groups
        .into_par_iter()
        .map(|(key, entries)| {
            let fail = |e: Error| SeriesError {
                series: key.clone(),
                message: e.to_string(),
            };
            let mut recordings = Vec::with_capacity(entries.len());
            for entry in entries {
                entry.validate().map_err(fail)?;
                let path = if entry.path.is_absolute() {
                    entry.path.clone()
                } else {
                    base_dir.join(&entry.path)
                };
                let signal = load_wav_channel(&path, manifest.channel).map_err(fail)?;
                recordings.push(Recording {
                    distance_cm: entry.distance_cm,
                    signal,
                    path: Some(path),
                });
            }
            MeasurementSeries::new(key.clone(), recordings).map_err(fail)
        })
        .collect();

    let mut report = IngestReport::default();
    for r in loaded {
        match r {
            Ok(s) => report.series.push(s),
            Err(e) => report.errors.push(e),
        }
    }
    report
}

/// Write a synthetic campaign as Float32 WAVs plus `manifest.json`,
/// `ground_truth.csv` and `stimulus.wav` in `out_dir`. Returns the manifest.
pub fn write_synthetic(
    campaign: &SyntheticCampaign,
    stimulus: &Signal,
    out_dir: impl AsRef<Path>,
) -> Result<Manifest> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    save_wav(out_dir.join("stimulus.wav"), stimulus, WavEncoding::Float32)?;
    let key = campaign.series.key();
    let stem = key.file_stem();
    let mut entries = Vec::with_capacity(campaign.series.len());
    for r in campaign.series.recordings() {
        let name = format!("{stem}_{}cm.wav", r.distance_cm.to_string().replace('.', "p"));
        save_wav(out_dir.join(&name), &r.signal, WavEncoding::Float32)?;
        entries.push(MeasurementEntry {
            path: PathBuf::from(name),
            distance_cm: r.distance_cm,
            microphone: key.microphone.clone(),
            directivity: key.directivity.clone(),
            stimulus: key.stimulus.clone(),
        });
    }
    let manifest = Manifest { channel: 0, entries };
    manifest.write(out_dir.join("manifest.json"))?;
    write_file(&out_dir.join("ground_truth.csv"), &campaign.ground_truth.to_csv())?;
    Ok(manifest)
}

/// Analysis parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub reference_distance_cm: f64,
    pub threshold_db: f64,
    pub min_support: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            reference_distance_cm: DEFAULT_REFERENCE_CM,
            threshold_db: DEFAULT_THRESHOLD_DB,
            min_support: DEFAULT_MIN_SUPPORT,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_db > 0.0) {
            return Err(Error::InvalidInput(format!(
                "threshold must be positive, got {}",
                self.threshold_db
            )));
        }
        if !(self.reference_distance_cm > 0.0) {
            return Err(Error::Singularity(self.reference_distance_cm));
        }
        Ok(())
    }
}

/// Analysis of one band of one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandResult {
    /// 1-based subband number.
    pub band: usize,
    pub low_hz: f64,
    pub high_hz: f64,
    pub evolution: Vec<CurvePoint>,
    pub verdict: ValidityVerdict,
    pub reequalization: Option<Reequalization>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub key: SeriesKey,
    pub distances_cm: Vec<f64>,
    pub trimmed_length: usize,
    pub level_curve: LevelCurve,
    pub gaps: Vec<GapPoint>,
    pub level_verdict: ValidityVerdict,
    pub max_abs_gap_db: Option<f64>,
    pub bands: Vec<BandResult>,
    pub warnings: Vec<String>,
}

/// Level curve, 1/x gaps, weight evolutions and validity verdicts of one series.
pub fn analyze(
    series: &MeasurementSeries,
    bank: &FilterBank,
    config: &AnalysisConfig,
) -> Result<SeriesResult> {
    let in_series = |e: Error| Error::InSeries {
        series: series.key().to_string(),
        source: Box::new(e),
    };
    analyze_inner(series, bank, config).map_err(in_series)
}

fn analyze_inner(
    series: &MeasurementSeries,
    bank: &FilterBank,
    config: &AnalysisConfig,
) -> Result<SeriesResult> {
    config.validate()?;
    let reference = config.reference_distance_cm;
    if series.get(reference).is_none() {
        return Err(Error::MissingReference(reference));
    }
    if series.sample_rate() != bank.sample_rate() {
        return Err(Error::RateMismatch {
            expected: bank.sample_rate(),
            actual: series.sample_rate(),
        });
    }
    let mut warnings = Vec::new();
    let trimmed = series.trimmed_to_common_length();
    let trimmed_length = trimmed.min_len();
    if series.recordings().iter().any(|r| r.signal.len() != trimmed_length) {
        warnings.push(format!(
            "recordings trimmed to the common length of {trimmed_length} samples"
        ));
    }

    let level_curve = measured_level_curve(&trimmed, reference)?;
    let gaps = gap_curve(&level_curve, reference)?;
    let deviations: Vec<CurvePoint> = gaps.iter().map(GapPoint::as_deviation).collect();
    for g in gaps.iter().filter(|g| g.theory_undefined()) {
        warnings.push(format!(
            "1/x law undefined at {} cm; gap not computed",
            g.distance_cm
        ));
    }
    let level_verdict = validity_limit_with_support(&deviations, config.threshold_db, config.min_support)?;
    let max_abs_gap_db = gaps
        .iter()
        .filter_map(|g| g.gap_db.map(f64::abs))
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));

    let distances = trimmed.distances();
    let balances = series_balances(&trimmed, bank)?;
    let evolutions = evolution_from_balances(&distances, &balances, reference)?;
    let mut bands = Vec::with_capacity(evolutions.len());
    for evo in evolutions {
        let silent: Vec<f64> = evo
            .points
            .iter()
            .filter(|p| p.value_db.is_none())
            .map(|p| p.distance_cm)
            .collect();
        if !silent.is_empty() {
            warnings.push(format!(
                "band {} silent at {:?} cm; excluded from its evolution curve",
                evo.band_index + 1,
                silent
            ));
        }
        let verdict =
            validity_limit_with_support(&evo.points, config.threshold_db, config.min_support)?;
        let reequalization = detect_reequalization(&evo.points, config.threshold_db);
        bands.push(BandResult {
            band: evo.band_index + 1,
            low_hz: evo.low_hz,
            high_hz: evo.high_hz,
            evolution: evo.points,
            verdict,
            reequalization,
        });
    }

    Ok(SeriesResult {
        key: series.key().clone(),
        distances_cm: distances,
        trimmed_length,
        level_curve,
        gaps,
        level_verdict,
        max_abs_gap_db,
        bands,
        warnings,
    })
}

/// One comparison row: stimulus minus recording weight per band, plus
/// both mean levels. Positive means the band weighs more in the stimulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub distance_cm: f64,
    pub diffs_db: Vec<Option<f64>>,
    pub stimulus_level: LevelDbfs,
    pub recording_level: LevelDbfs,
}

/// `"{stimulus}/{microphone} {directivity}"`.
pub fn comparison_label(stimulus_name: &str, key: &SeriesKey) -> String {
    format!("{stimulus_name}/{} {}", key.microphone, key.directivity)
}

/// Compare the stimulus' balance with the series' recording at `at_distance_cm`.
pub fn compare_to_stimulus(
    stimulus: &Signal,
    series: &MeasurementSeries,
    bank: &FilterBank,
    at_distance_cm: f64,
    label: impl Into<String>,
) -> Result<ComparisonRow> {
    let recording = series
        .get(at_distance_cm)
        .ok_or(Error::MissingDistance(at_distance_cm))?;
    let stimulus_balance = spectral_balance(stimulus, bank)?;
    let recording_balance = spectral_balance(&recording.signal, bank)?;
    let diff = balance_difference(&stimulus_balance, &recording_balance)?;
    Ok(ComparisonRow {
        label: label.into(),
        distance_cm: at_distance_cm,
        diffs_db: diff.diffs_db,
        stimulus_level: diff.stimulus_level,
        recording_level: diff.recording_level,
    })
}

/// Rows of subband weight differences sharing one band mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub num_bands: usize,
    pub rows: Vec<ComparisonRow>,
}

fn short_db(v: f64, signed: bool) -> String {
    let r = (v * 10.0).round() / 10.0;
    if r == 0.0 {
        return "0".into();
    }
    let s = if signed { format!("{r:+.1}") } else { format!("{r:.1}") };
    s.strip_suffix(".0").map(str::to_owned).unwrap_or(s)
}

fn level_text(l: LevelDbfs) -> String {
    match l.value() {
        Some(v) => short_db(v, false),
        None => "silence".into(),
    }
}

impl ComparisonTable {
    pub fn new(num_bands: usize, rows: Vec<ComparisonRow>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.diffs_db.len() != num_bands) {
            return Err(Error::MappingMismatch(format!(
                "row {:?} has {} bands, table has {num_bands}",
                r.label,
                r.diffs_db.len()
            )));
        }
        Ok(ComparisonTable { num_bands, rows })
    }

    /// `label,band_1,...,band_N,stimulus_level_dbfs,recording_level_dbfs`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for b in 1..=self.num_bands {
            let _ = write!(out, ",band_{b}");
        }
        out.push_str(",stimulus_level_dbfs,recording_level_dbfs\n");
        for row in &self.rows {
            out.push_str(&csv_field(&row.label));
            for d in &row.diffs_db {
                out.push(',');
                if let Some(d) = d {
                    let _ = write!(out, "{d}");
                }
            }
            let _ = writeln!(out, ",{},{}", row.stimulus_level, row.recording_level);
        }
        out
    }

    /// Fixed-width text in the layout `subband | 1 ... N | mean levels`, with
    /// one-decimal signed differences and `stimulus/recording` levels.
    pub fn render_text(&self) -> String {
        let mut header = vec!["subband".to_string()];
        header.extend((1..=self.num_bands).map(|b| b.to_string()));
        header.push("mean levels".into());
        let mut rows = vec![header];
        for row in &self.rows {
            let mut cells = vec![row.label.clone()];
            cells.extend(row.diffs_db.iter().map(|d| match d {
                Some(v) => short_db(*v, true),
                None => "silence".into(),
            }));
            cells.push(format!(
                "{}/{}",
                level_text(row.stimulus_level),
                level_text(row.recording_level)
            ));
            rows.push(cells);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for r in &rows {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .map(|(cell, w)| format!("{cell:>w$}"))
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Settings that determine every number in a campaign result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub mapping_edges_hz: Vec<f64>,
    pub sample_rate: u32,
    pub filter_length: usize,
    pub reference_distance_cm: f64,
    pub threshold_db: f64,
    pub min_support: usize,
    pub trimming: String,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(bank: &FilterBank, config: &AnalysisConfig) -> Provenance {
        let mut p = Provenance {
            mapping_edges_hz: bank.mapping().edges().to_vec(),
            sample_rate: bank.sample_rate(),
            filter_length: bank.length(),
            reference_distance_cm: config.reference_distance_cm,
            threshold_db: config.threshold_db,
            min_support: config.min_support,
            trimming: "recordings trimmed to the shortest length within each series".into(),
            config_hash: String::new(),
        };
        let canonical = serde_json::to_string(&p).expect("provenance serializes");
        p.config_hash = hex::encode(Sha256::digest(canonical.as_bytes()));
        p
    }

    pub fn render_text(&self) -> String {
        let edges: Vec<String> = self.mapping_edges_hz.iter().map(|e| e.to_string()).collect();
        format!(
            "mapping: {}\nsample rate: {} Hz\nfilter length: {}\nreference distance: {} cm\n\
             threshold: {} dB\nmin support: {}\nconfig hash: {}\n",
            edges.join(","),
            self.sample_rate,
            self.filter_length,
            self.reference_distance_cm,
            self.threshold_db,
            self.min_support,
            self.config_hash
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub provenance: Provenance,
    pub series: Vec<SeriesResult>,
    pub errors: Vec<SeriesError>,
    pub comparisons: Option<ComparisonTable>,
}

impl CampaignResult {
    /// Largest |gap| to the 1/x law over every analyzed series.
    pub fn max_abs_gap_db(&self) -> Option<f64> {
        self.series
            .iter()
            .filter_map(|s| s.max_abs_gap_db)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
    }
}

/// Analyze every ingested series; failures become per-series errors.
pub fn run_campaign(report: IngestReport, bank: &FilterBank, config: &AnalysisConfig) -> CampaignResult {
    let outcomes: Vec<std::result::Result<SeriesResult, SeriesError>> = report
        .series
        .par_iter()
        .map(|s| {
            analyze(s, bank, config).map_err(|e| SeriesError {
                series: s.key().clone(),
                message: e.to_string(),
            })
        })
        .collect();
    let mut series = Vec::new();
    let mut errors = report.errors;
    for o in outcomes {
        match o {
            Ok(r) => series.push(r),
            Err(e) => errors.push(e),
        }
    }
    series.sort_by(|a, b| a.key.cmp(&b.key));
    errors.sort_by(|a, b| a.series.cmp(&b.series));
    CampaignResult {
        provenance: Provenance::new(bank, config),
        series,
        errors,
        comparisons: None,
    }
}

#[derive(Serialize)]
struct BandSummary<'a> {
    band: usize,
    low_hz: f64,
    high_hz: f64,
    verdict: &'a ValidityVerdict,
    reequalization: &'a Option<Reequalization>,
}

#[derive(Serialize)]
struct SeriesSummary<'a> {
    key: &'a SeriesKey,
    distances_cm: &'a [f64],
    trimmed_length: usize,
    level_verdict: &'a ValidityVerdict,
    max_abs_gap_db: Option<f64>,
    bands: Vec<BandSummary<'a>>,
    warnings: &'a [String],
}

#[derive(Serialize)]
struct Summary<'a> {
    provenance: &'a Provenance,
    max_abs_gap_db: Option<f64>,
    series: Vec<SeriesSummary<'a>>,
    errors: &'a [SeriesError],
    comparisons: &'a Option<ComparisonTable>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Summary JSON of a campaign result.
pub fn summary_json(result: &CampaignResult) -> String {
    let summary = Summary {
        provenance: &result.provenance,
        max_abs_gap_db: result.max_abs_gap_db(),
        series: result
            .series
            .iter()
            .map(|s| SeriesSummary {
                key: &s.key,
                distances_cm: &s.distances_cm,
                trimmed_length: s.trimmed_length,
                level_verdict: &s.level_verdict,
                max_abs_gap_db: s.max_abs_gap_db,
                bands: s
                    .bands
                    .iter()
                    .map(|b| BandSummary {
                        band: b.band,
                        low_hz: b.low_hz,
                        high_hz: b.high_hz,
                        verdict: &b.verdict,
                        reequalization: &b.reequalization,
                    })
                    .collect(),
                warnings: &s.warnings,
            })
            .collect(),
        errors: &result.errors,
        comparisons: &result.comparisons,
    };
    serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"
}

/// Write curve CSVs, comparison tables and `summary.json` into `out_dir`.
///
/// Files are named `microphone_directivity_stimulus_metric.csv` where metric is
/// `level` or `bandNN`. Returns the written paths in creation order.
pub fn export(result: &CampaignResult, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    let mut written = Vec::new();

    for s in &result.series {
        let stem = s.key.file_stem();
        let mut level = String::from("distance_cm,value_db,theoretical_db,gap_db\n");
        for g in &s.gaps {
            let _ = writeln!(
                level,
                "{},{},{},{}",
                g.distance_cm,
                opt(g.measured_db),
                opt(g.theoretical_db),
                opt(g.gap_db)
            );
        }
        let path = out_dir.join(format!("{stem}_level.csv"));
        write_file(&path, &level)?;
        written.push(path);

        for b in &s.bands {
            let mut csv = String::from("distance_cm,value_db\n");
            for p in &b.evolution {
                let _ = writeln!(csv, "{},{}", p.distance_cm, opt(p.value_db));
            }
            let path = out_dir.join(format!("{stem}_band{:02}.csv", b.band));
            write_file(&path, &csv)?;
            written.push(path);
        }
    }

    if let Some(table) = &result.comparisons {
        let path = out_dir.join("comparison.csv");
        write_file(&path, &table.to_csv())?;
        written.push(path);
        let path = out_dir.join("comparison.txt");
        write_file(&path, &table.render_text())?;
        written.push(path);
    }

    let path = out_dir.join("summary.json");
    write_file(&path, &summary_json(result))?;
    written.push(path);
    Ok(written)
}

/// Read the first two columns of an exported curve CSV back into points.
pub fn read_curve_csv(path: impl AsRef<Path>) -> Result<Vec<CurvePoint>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let bad = || Error::InvalidInput(format!("{}: bad row {line:?}", path.display()));
            let mut f = line.split(',');
            let distance_cm = f.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let value_db = match f.next().ok_or_else(bad)? {
                "" => None,
                v => Some(v.parse().map_err(|_| bad())?),
            };
            Ok(CurvePoint {
                distance_cm,
                value_db,
            })
        })
        .collect()
}
