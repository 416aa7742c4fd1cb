//! `nearfield`: stimulus synthesis, synthetic campaigns and campaign analysis.
//!
//! Exit codes: 0 success, 1 analysis or I/O failure, 2 bad command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use nearfield_core::campaign::{
    comparison_label, ingest, run_campaign, write_synthetic, ComparisonTable, IngestReport,
    Provenance,
};
use nearfield_core::filterbank::{DEFAULT_FILTER_LENGTH, FAST_FILTER_LENGTH, MIN_FILTER_LENGTH};
use nearfield_core::level::{DEFAULT_MIN_SUPPORT, DEFAULT_REFERENCE_CM, DEFAULT_THRESHOLD_DB};
use nearfield_core::signal::DEFAULT_SAMPLE_RATE;
use nearfield_core::stimuli::{generate, StimulusSpec};
use nearfield_core::synth::SyntheticCampaignSpec;
use nearfield_core::{
    compare_to_stimulus, design_bank, export, load_wav, mean_level_dbfs, normalize_to_level,
    save_wav, synth_campaign, AnalysisConfig, BandMapping, FilterBank, Preset, Signal, WavEncoding,
};

#[derive(Parser, Debug)]
#[command(name = "nearfield", version, about = "Subband analysis of microphone distance campaigns")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "NEARFIELD_OUT_DIR", default_value = ".")]
    out: PathBuf,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a pink-noise or sine stimulus as WAV plus a JSON sidecar.
    Synth(SynthArgs),
    /// Generate a synthetic distance campaign from a JSON description.
    SynthCampaign(SynthCampaignArgs),
    /// Analyze every series of a manifest and export curves and verdicts.
    Analyze(AnalyzeArgs),
    /// Compare a stimulus' subband balance with each series' recording at one distance.
    Compare(CompareArgs),
    /// Rescale WAV files to a common mean level.
    Normalize(NormalizeArgs),
    /// Print a band mapping and optionally export the designed taps.
    Bands(BandsArgs),
}

#[derive(Args, Debug, Clone)]
struct BankArgs {
    /// Built-in band mapping: ids10, nl8, nl8-verbatim, sine65, sine100.
    #[arg(long, default_value = "ids10", conflicts_with = "mapping")]
    preset: Preset,

    /// Band-edge file, one frequency in Hz per line, from 0 to Nyquist.
    #[arg(long)]
    mapping: Option<PathBuf>,

    /// Taps per band filter (odd, at least 63).
    #[arg(long, value_parser = parse_length, conflicts_with = "fast")]
    length: Option<usize>,

    /// Use 1023-tap filters.
    #[arg(long)]
    fast: bool,
}

impl BankArgs {
    fn length(&self) -> usize {
        match (self.length, self.fast) {
            (Some(l), _) => l,
            (None, true) => FAST_FILTER_LENGTH,
            (None, false) => DEFAULT_FILTER_LENGTH,
        }
    }

    fn mapping(&self, sample_rate: u32) -> Result<BandMapping> {
        match &self.mapping {
            Some(path) => BandMapping::from_file(path, sample_rate)
                .with_context(|| format!("loading band mapping {}", path.display())),
            None => Ok(BandMapping::preset(self.preset, sample_rate)?),
        }
    }

    fn design(&self, sample_rate: u32) -> Result<FilterBank> {
        let mapping = self.mapping(sample_rate)?;
        Ok(design_bank(&mapping, self.length())?)
    }
}

#[derive(Args, Debug, Clone)]
struct AnalysisArgs {
    /// Reference distance in cm (0 dB point of every curve).
    #[arg(long, default_value_t = DEFAULT_REFERENCE_CM, value_parser = parse_positive)]
    reference: f64,

    /// Deviation tolerance in dB for validity limits.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_DB, value_parser = parse_positive)]
    threshold: f64,

    /// Compliant points needed before a validity limit is claimed.
    #[arg(long, default_value_t = DEFAULT_MIN_SUPPORT)]
    min_support: usize,
}

impl AnalysisArgs {
    fn config(&self) -> AnalysisConfig {
        AnalysisConfig {
            reference_distance_cm: self.reference,
            threshold_db: self.threshold,
            min_support: self.min_support,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Kind {
    Pink,
    Sine,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Encoding {
    Pcm16,
    Pcm24,
    Float32,
}

impl From<Encoding> for WavEncoding {
    fn from(e: Encoding) -> Self {
        match e {
            Encoding::Pcm16 => WavEncoding::Pcm16,
            Encoding::Pcm24 => WavEncoding::Pcm24,
            Encoding::Float32 => WavEncoding::Float32,
        }
    }
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: Kind,

    /// Sine frequency in Hz.
    #[arg(long, required_if_eq("kind", "sine"))]
    freq: Option<f64>,

    /// Pink-noise seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Target mean level in dB FS.
    #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
    level: f64,

    /// Duration in seconds.
    #[arg(long, default_value_t = 10.0)]
    dur: f64,

    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE)]
    sample_rate: u32,

    #[arg(long, value_enum, default_value = "float32")]
    encoding: Encoding,

    /// Output file name inside the output directory.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args, Debug)]
struct SynthCampaignArgs {
    /// Campaign description (JSON).
    #[arg(long)]
    spec: PathBuf,

    /// Use this WAV as the stimulus instead of the one described in the campaign file.
    #[arg(long)]
    stimulus: Option<PathBuf>,

    #[command(flatten)]
    bank: BankArgs,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    manifest: PathBuf,

    /// Stimulus WAV; adds a comparison table at the reference distance.
    #[arg(long)]
    stimulus: Option<PathBuf>,

    /// Stimulus name used in comparison row labels (default: file stem).
    #[arg(long)]
    stimulus_name: Option<String>,

    #[command(flatten)]
    bank: BankArgs,

    #[command(flatten)]
    analysis: AnalysisArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    manifest: PathBuf,

    #[arg(long)]
    stimulus: PathBuf,

    /// Distance in cm of the recording compared with the stimulus.
    #[arg(long, default_value_t = DEFAULT_REFERENCE_CM)]
    at: f64,

    /// Stimulus name used in row labels (default: file stem).
    #[arg(long)]
    stimulus_name: Option<String>,

    #[command(flatten)]
    bank: BankArgs,
}

#[derive(Args, Debug)]
struct NormalizeArgs {
    /// WAV files to rescale; results keep their names in the output directory.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,

    /// Target mean level in dB FS.
    #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
    level: f64,

    /// Multichannel input: channel to read.
    #[arg(long, default_value_t = 0)]
    channel: usize,

    #[arg(long, value_enum, default_value = "float32")]
    encoding: Encoding,
}

#[derive(Args, Debug)]
struct BandsArgs {
    #[command(flatten)]
    bank: BankArgs,

    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE)]
    sample_rate: u32,

    /// Also write the designed taps to taps.csv in the output directory.
    #[arg(long)]
    taps: bool,
}

/// Campaign description read by `synth-campaign`.
#[derive(Debug, Serialize, Deserialize)]
struct CampaignFile {
    #[serde(flatten)]
    campaign: SyntheticCampaignSpec,
    #[serde(default)]
    stimulus: Option<StimulusSpec>,
}

/// Sidecar written next to each synthesized WAV.
#[derive(Serialize)]
struct Sidecar<'a> {
    file: &'a str,
    spec: &'a StimulusSpec,
    samples: usize,
    measured_level_dbfs: String,
    encoding: String,
}

fn parse_length(s: &str) -> std::result::Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n.is_multiple_of(2) || n < MIN_FILTER_LENGTH {
        return Err(format!("filter length must be odd and at least {MIN_FILTER_LENGTH}"));
    }
    Ok(n)
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err("must be a positive number".into());
    }
    Ok(v)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .init();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output directory {}", cli.out.display()))?;
    match &cli.command {
        Command::Synth(a) => synth(a, &cli.out),
        Command::SynthCampaign(a) => synth_campaign_cmd(a, &cli.out),
        Command::Analyze(a) => analyze_cmd(a, &cli.out),
        Command::Compare(a) => compare_cmd(a, &cli.out),
        Command::Normalize(a) => normalize_cmd(a, &cli.out),
        Command::Bands(a) => bands_cmd(a, &cli.out),
    }
}

fn print_provenance(lines: &[(&str, String)]) {
    eprintln!("# provenance");
    eprintln!("version: {}", env!("CARGO_PKG_VERSION"));
    for (k, v) in lines {
        eprintln!("{k}: {v}");
    }
}

fn print_bank_provenance(bank: &FilterBank, config: &AnalysisConfig) {
    eprintln!("# provenance");
    eprintln!("version: {}", env!("CARGO_PKG_VERSION"));
    eprint!("{}", Provenance::new(bank, config).render_text());
}

fn synth(a: &SynthArgs, out: &Path) -> Result<ExitCode> {
    let spec = match a.kind {
        Kind::Pink => StimulusSpec::pink(a.seed, a.dur, a.sample_rate, a.level),
        Kind::Sine => StimulusSpec::sine(a.freq.unwrap_or_default(), a.dur, a.sample_rate, a.level),
    };
    let name = a.name.clone().unwrap_or_else(|| match a.kind {
        Kind::Pink => format!("pink_seed{}.wav", a.seed),
        Kind::Sine => format!("sine{}.wav", a.freq.unwrap_or_default()),
    });
    print_provenance(&[
        ("command", "synth".into()),
        ("stimulus", serde_json::to_string(&spec)?),
        ("encoding", format!("{:?}", a.encoding).to_lowercase()),
    ]);
    let signal = generate(&spec)?;
    let path = out.join(&name);
    save_wav(&path, &signal, a.encoding.into())?;
    let level = mean_level_dbfs(&signal);
    let sidecar = Sidecar {
        file: &name,
        spec: &spec,
        samples: signal.len(),
        measured_level_dbfs: level.to_string(),
        encoding: format!("{:?}", a.encoding).to_lowercase(),
    };
    let sidecar_path = path.with_extension("json");
    std::fs::write(&sidecar_path, serde_json::to_string_pretty(&sidecar)? + "\n")
        .with_context(|| format!("writing {}", sidecar_path.display()))?;
    println!("{}: {} samples, {level} dB FS", path.display(), signal.len());
    Ok(ExitCode::SUCCESS)
}

fn synth_campaign_cmd(a: &SynthCampaignArgs, out: &Path) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&a.spec)
        .with_context(|| format!("reading campaign spec {}", a.spec.display()))?;
    let file: CampaignFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing campaign spec {}", a.spec.display()))?;
    let stimulus = match (&a.stimulus, &file.stimulus) {
        (Some(path), _) => load_wav(path)?,
        (None, Some(spec)) => generate(spec)?,
        (None, None) => bail!("the campaign file has no stimulus; pass --stimulus <wav>"),
    };
    // the bank shapes profiled bands and sizes the ground-truth table
    let bank = a.bank.design(stimulus.sample_rate())?;
    print_provenance(&[
        ("command", "synth-campaign".to_string()),
        ("series", file.campaign.key.to_string()),
        ("reference distance", format!("{} cm", file.campaign.reference_distance_cm)),
        ("directivity m", file.campaign.directivity_m.to_string()),
        ("theta", format!("{} rad", file.campaign.theta_rad)),
        ("mapping", edges_text(bank.mapping())),
        ("filter length", bank.length().to_string()),
    ]);
    let campaign = synth_campaign(&file.campaign, &stimulus, Some(&bank))?;
    let manifest = write_synthetic(&campaign, &stimulus, out)?;
    println!(
        "wrote {} recordings, manifest.json, ground_truth.csv and stimulus.wav to {}",
        manifest.entries.len(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn edges_text(mapping: &BandMapping) -> String {
    mapping
        .edges()
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Rate of the ingested recordings, or the default when nothing loaded.
fn campaign_rate(report: &IngestReport) -> u32 {
    report
        .series
        .first()
        .map_or(DEFAULT_SAMPLE_RATE, |s| s.sample_rate())
}

fn stimulus_name(path: &Path, name: &Option<String>) -> String {
    name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map_or_else(|| "stimulus".into(), |s| s.to_string_lossy().into_owned())
    })
}

fn comparison_rows(
    stimulus: &Signal,
    name: &str,
    report: &IngestReport,
    bank: &FilterBank,
    at: f64,
) -> (Option<ComparisonTable>, Vec<String>) {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for s in &report.series {
        match compare_to_stimulus(stimulus, s, bank, at, comparison_label(name, s.key())) {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(format!("{}: {e}", s.key())),
        }
    }
    (ComparisonTable::new(bank.num_bands(), rows).ok(), failures)
}

fn analyze_cmd(a: &AnalyzeArgs, out: &Path) -> Result<ExitCode> {
    let config = a.analysis.config();
    let report = ingest(&a.manifest)?;
    let bank = a.bank.design(campaign_rate(&report))?;
    print_bank_provenance(&bank, &config);
    let comparison = match &a.stimulus {
        Some(path) => {
            let stimulus = load_wav(path)?;
            let name = stimulus_name(path, &a.stimulus_name);
            Some(comparison_rows(&stimulus, &name, &report, &bank, config.reference_distance_cm))
        }
        None => None,
    };
    let mut result = run_campaign(report, &bank, &config);
    let mut failures: Vec<String> = result
        .errors
        .iter()
        .map(|e| format!("{}: {}", e.series, e.message))
        .collect();
    if let Some((table, compare_failures)) = comparison {
        result.comparisons = table;
        failures.extend(compare_failures);
    }
    let files = export(&result, out)?;

    for s in &result.series {
        let limit = s
            .level_verdict
            .limit_distance_cm
            .map_or_else(|| "none".into(), |d| format!("{d} cm"));
        let gap = s.max_abs_gap_db.map_or_else(|| "n/a".into(), |g| format!("{g:.3} dB"));
        println!("{}: {} points, max |gap| {gap}, level validity limit {limit}", s.key, s.distances_cm.len());
        for b in &s.bands {
            if let Some(r) = &b.reequalization {
                println!(
                    "  band {} ({}-{} Hz): minimum {:.2} dB at {} cm, rises {:.2} dB",
                    b.band, b.low_hz, b.high_hz, r.minimum_db, r.minimum_distance_cm, r.rise_db
                );
            }
        }
    }
    if let Some(table) = &result.comparisons {
        print!("{}", table.render_text());
    }
    println!("wrote {} files to {}", files.len(), out.display());
    report_failures(&failures)
}

fn report_failures(failures: &[String]) -> Result<ExitCode> {
    if failures.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    for f in failures {
        eprintln!("error: {f}");
    }
    eprintln!("{} series failed", failures.len());
    Ok(ExitCode::from(1))
}

fn compare_cmd(a: &CompareArgs, out: &Path) -> Result<ExitCode> {
    let report = ingest(&a.manifest)?;
    let stimulus = load_wav(&a.stimulus)?;
    let bank = a.bank.design(stimulus.sample_rate())?;
    let config = AnalysisConfig {
        reference_distance_cm: a.at,
        ..AnalysisConfig::default()
    };
    print_bank_provenance(&bank, &config);
    let name = stimulus_name(&a.stimulus, &a.stimulus_name);
    let (table, mut failures) = comparison_rows(&stimulus, &name, &report, &bank, a.at);
    failures.extend(report.errors.iter().map(|e| format!("{}: {}", e.series, e.message)));
    if let Some(table) = table {
        let csv = out.join("comparison.csv");
        std::fs::write(&csv, table.to_csv()).with_context(|| format!("writing {}", csv.display()))?;
        let txt = out.join("comparison.txt");
        let text = table.render_text();
        std::fs::write(&txt, &text).with_context(|| format!("writing {}", txt.display()))?;
        print!("{text}");
    }
    report_failures(&failures)
}

fn normalize_cmd(a: &NormalizeArgs, out: &Path) -> Result<ExitCode> {
    print_provenance(&[
        ("command", "normalize".into()),
        ("target level", format!("{} dB FS", a.level)),
        ("channel", a.channel.to_string()),
        ("encoding", format!("{:?}", a.encoding).to_lowercase()),
    ]);
    for input in &a.inputs {
        let name = input
            .file_name()
            .with_context(|| format!("{} is not a file", input.display()))?;
        let target = out.join(name);
        if target.exists() && same_file(&target, input) {
            bail!("refusing to overwrite {}; choose another --out", input.display());
        }
        let signal = nearfield_core::wav::load_wav_channel(input, a.channel)?;
        let before = mean_level_dbfs(&signal);
        let normalized = normalize_to_level(&signal, a.level)
            .with_context(|| format!("normalizing {}", input.display()))?;
        save_wav(&target, &normalized, a.encoding.into())?;
        println!(
            "{}: {before} -> {} dB FS",
            target.display(),
            mean_level_dbfs(&normalized)
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn bands_cmd(a: &BandsArgs, out: &Path) -> Result<ExitCode> {
    let mapping = a.bank.mapping(a.sample_rate)?;
    print_provenance(&[
        ("command", "bands".into()),
        ("sample rate", format!("{} Hz", a.sample_rate)),
        ("filter length", a.bank.length().to_string()),
    ]);
    println!("{}", edges_text(&mapping));
    for (i, (lo, hi)) in mapping.bands().enumerate() {
        println!("band {}: {lo}-{hi} Hz", i + 1);
    }
    if a.taps {
        let bank = design_bank(&mapping, a.bank.length())?;
        let path = out.join("taps.csv");
        std::fs::write(&path, bank.taps_csv()).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}
