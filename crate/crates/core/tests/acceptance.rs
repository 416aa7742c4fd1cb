//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits non-zero if any fails.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use common::*;
use nearfield_core::campaign::{
    comparison_label, ingest, run_campaign, write_synthetic, ComparisonTable, Manifest,
};
use nearfield_core::filterbank::{DEFAULT_FILTER_LENGTH, FAST_FILTER_LENGTH};
use nearfield_core::level::{validity_limit, CurvePoint};
use nearfield_core::stimuli::{gen_pink, spectral_slope, StimulusSpec};
use nearfield_core::synth::{
    synth_campaign, synth_recording, BandProfile, DistanceProfile, GroundTruth, SyntheticCampaignSpec,
};
use nearfield_core::{
    analyze, compare_to_stimulus, design_bank, directivity_gain, export, mean_level_dbfs,
    spectral_balance, weight_evolution, AnalysisConfig, BandMapping, DirectivityModel, FilterBank,
    Preset, SeriesKey, Signal,
};

type Outcome = Result<String, String>;

const CAMPAIGN_CM: [f64; 11] = [5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0];

fn bank(preset: Preset, length: usize) -> FilterBank {
    design_bank(&BandMapping::preset(preset, FS).unwrap(), length).unwrap()
}

fn pink(seed: u64, seconds: f64, level: f64) -> Signal {
    gen_pink(&StimulusSpec::pink(seed, seconds, FS, level)).unwrap()
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn complementarity() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for length in [DEFAULT_FILTER_LENGTH, FAST_FILTER_LENGTH] {
        let start = Instant::now();
        let b = bank(Preset::Ids10, length);
        let secs = start.elapsed().as_secs_f64();
        let centre = (length - 1) / 2;
        let worst = (0..length)
            .map(|n| {
                let sum: f64 = b.all_taps().iter().map(|h| h[n]).sum();
                let target = if n == centre { 1.0 } else { 0.0 };
                (sum - target).abs()
            })
            .fold(0.0, f64::max);
        ok &= worst <= 1e-10 && secs < 10.0;
        details.push(format!("L={length}: max tap error {worst:.2e}, design {secs:.3} s"));
    }
    ensure(ok, details.join("; "))
}

fn reconstruction() -> Outcome {
    let noise = white_noise(11, 10 * FS as usize, 0.5);
    let mut details = Vec::new();
    let mut ok = true;
    for preset in [Preset::Ids10, Preset::Nl8] {
        let b = bank(preset, DEFAULT_FILTER_LENGTH);
        let bands = b.decompose(&noise).unwrap();
        let residual: f64 = (0..noise.len())
            .map(|n| {
                let sum: f64 = bands.iter().map(|s| s.samples()[n]).sum();
                (sum - noise.samples()[n]).powi(2)
            })
            .sum();
        let db = db10(residual / noise.energy());
        ok &= db <= -60.0;
        details.push(format!("{}: residual {db:.1} dB", preset.name()));
    }
    ensure(ok, details.join("; "))
}

fn zero_phase() -> Outcome {
    let b = bank(Preset::Ids10, DEFAULT_FILTER_LENGTH);
    let len = 2 * FS as usize;
    let mut lags = Vec::new();
    for (i, (lo, hi)) in b.mapping().bands().enumerate() {
        let centre = (lo + hi) / 2.0;
        let input = faded_sine(centre, len, FS as usize / 10);
        let output = b.apply_zero_phase(i, &input).unwrap();
        let period = FS as f64 / centre;
        let max_lag = ((period / 2.0).floor() as usize).clamp(1, 1000);
        lags.push(xcorr_argmax(input.samples(), output.samples(), max_lag));
    }
    ensure(lags.iter().all(|&l| l == 0), format!("argmax lags per band {lags:?}"))
}

fn energy_partition() -> Outcome {
    let b = bank(Preset::Ids10, DEFAULT_FILTER_LENGTH);
    let mut details = Vec::new();
    let mut ok = true;
    for (name, signal) in [
        ("white", white_noise(4, 10 * FS as usize, 0.5)),
        ("pink", pink(4, 10.0, -20.0)),
    ] {
        let measured = spectral_balance(&signal, &b).unwrap().weights_linear;
        let oracle = periodogram_band_weights(&signal, b.mapping().edges());
        let total: f64 = measured.iter().sum();
        let max_abs = measured
            .iter()
            .zip(&oracle)
            .map(|(m, o)| (m - o).abs())
            .fold(0.0, f64::max);
        let max_rel = measured
            .iter()
            .zip(&oracle)
            .map(|(m, o)| ((m - o) / o).abs())
            .fold(0.0, f64::max);
        // the per-band bound is read in weight units, like the bound on the sum
        ok &= (0.98..=1.02).contains(&total) && max_abs <= 0.02;
        details.push(format!(
            "{name}: sum {total:.5}, max |w - oracle| {max_abs:.2e} (max relative {:.2}%)",
            100.0 * max_rel
        ));
    }
    ensure(ok, details.join("; "))
}

fn campaign_spec(key: SeriesKey, m: f64, theta: f64, profile: Option<DistanceProfile>) -> SyntheticCampaignSpec {
    SyntheticCampaignSpec {
        key,
        distances_cm: CAMPAIGN_CM.to_vec(),
        reference_distance_cm: 100.0,
        directivity_m: m,
        theta_rad: theta,
        profile,
    }
}

fn inverse_distance_loop() -> Outcome {
    let b = bank(Preset::Ids10, DEFAULT_FILTER_LENGTH);
    let stimulus = pink(5, 3.0, -30.0);
    let spec = campaign_spec(SeriesKey::new("synthetic", "cardioid", "pink"), 0.5, 0.0, None);
    let campaign = synth_campaign(&spec, &stimulus, Some(&b)).unwrap();
    let result = analyze(&campaign.series, &b, &AnalysisConfig::default()).unwrap();
    let worst = result.max_abs_gap_db.unwrap_or(f64::INFINITY);
    let limit = result.level_verdict.limit_distance_cm;
    ensure(
        worst <= 0.05 && limit == Some(5.0) && result.gaps.len() == CAMPAIGN_CM.len(),
        format!("max |gap| {worst:.2e} dB over {} points, limit {limit:?} cm", result.gaps.len()),
    )
}

fn profile(bands: &[(usize, &[(f64, f64)])]) -> DistanceProfile {
    DistanceProfile::new(
        bands
            .iter()
            .map(|(band, bps)| BandProfile {
                band: *band,
                breakpoints: bps.to_vec(),
            })
            .collect(),
    )
    .unwrap()
}

fn profile_recovery() -> Outcome {
    let b = bank(Preset::Ids10, DEFAULT_FILTER_LENGTH);
    let stimulus = pink(6, 5.0, -20.0);
    let weights = periodogram_band_weights(&stimulus, b.mapping().edges());
    let cases = [
        ("band-1 +8 dB near boost", profile(&[(1, &[(5.0, 8.0), (50.0, 0.0)])])),
        ("band-2 +12 dB", profile(&[(2, &[(5.0, 12.0), (30.0, 4.0), (100.0, 0.0)])])),
        ("band-5 -12 dB", profile(&[(5, &[(5.0, -12.0), (50.0, -3.0), (100.0, 0.0)])])),
        (
            "multi-band",
            profile(&[
                (3, &[(5.0, 6.0), (60.0, -2.0), (100.0, 0.0)]),
                (7, &[(5.0, -8.0), (100.0, 0.0)]),
                (9, &[(5.0, 10.0), (40.0, 0.0)]),
                (10, &[(5.0, -6.0), (70.0, -9.0), (100.0, 0.0)]),
            ]),
        ),
    ];
    let mut details = Vec::new();
    let mut ok = true;
    for (name, prof) in cases {
        let spec = campaign_spec(SeriesKey::new("synthetic", "omni", "pink"), 1.0, 0.0, Some(prof.clone()));
        let campaign = synth_campaign(&spec, &stimulus, Some(&b)).unwrap();
        let evolutions = weight_evolution(&campaign.series, &b, 100.0).unwrap();
        let mut worst = 0.0f64;
        for bp in &prof.bands {
            let band = bp.band - 1;
            for &(d, _) in &bp.breakpoints {
                let expected = campaign.ground_truth.expected_weight_delta(band, d, 100.0, &weights);
                let point = evolutions[band].points.iter().find(|p| p.distance_cm == d).unwrap();
                worst = worst.max((point.value_db.unwrap() - expected).abs());
            }
        }
        ok &= worst <= 0.3;
        details.push(format!("{name}: max error {worst:.3} dB"));
    }
    ensure(ok, details.join("; "))
}

fn validity_logic() -> Outcome {
    let pts = |v: &[(f64, f64)]| v.iter().map(|&(d, x)| CurvePoint::new(d, x)).collect::<Vec<_>>();
    let converging = pts(&[(5.0, -6.0), (25.0, -2.0), (50.0, -0.8), (75.0, 0.3), (100.0, 0.0)]);
    let oscillating = pts(&[
        (5.0, 1.5),
        (10.0, -1.5),
        (20.0, 1.5),
        (40.0, -1.5),
        (60.0, 1.5),
        (80.0, -1.5),
        (100.0, 0.0),
    ]);
    let a = validity_limit(&converging, 1.0).unwrap().limit_distance_cm;
    let b = validity_limit(&oscillating, 1.0).unwrap().limit_distance_cm;
    ensure(
        a == Some(50.0) && b.is_none(),
        format!("converging -> {a:?} cm, oscillating -> {b:?}"),
    )
}

fn pink_noise() -> Outcome {
    let spec = StimulusSpec::pink(1, 60.0, FS, -20.0);
    let a = gen_pink(&spec).unwrap();
    let again = gen_pink(&spec).unwrap();
    let slope = spectral_slope(&a, 100.0, 10_000.0).unwrap();
    let w = spectral_balance(&a, &bank(Preset::Ids10, DEFAULT_FILTER_LENGTH))
        .unwrap()
        .weights_linear;
    let ratio = w[2] / w[3];
    ensure(
        (slope + 3.0).abs() <= 0.5 && a == again && (ratio - 1.0).abs() <= 0.15,
        format!(
            "slope {slope:.3} dB/octave, repeatable {}, 200-400/400-800 energy ratio {ratio:.3}",
            a == again
        ),
    )
}

fn directivity() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..=100 {
        let m = i as f64 / 100.0;
        worst = worst.max((directivity_gain(DirectivityModel::new(m).unwrap(), 0.0) - 1.0).abs());
    }
    let cardioid = directivity_gain(DirectivityModel::CARDIOID, PI).abs();
    let figure8 = directivity_gain(DirectivityModel::BIDIRECTIONAL, PI / 2.0).abs();
    ensure(
        worst <= f64::EPSILON && cardioid <= f64::EPSILON && figure8 <= f64::EPSILON,
        format!("max |D(0)-1| {worst:.1e}, cardioid D(pi) {cardioid:.1e}, figure-8 D(pi/2) {figure8:.1e}"),
    )
}

/// Seven microphone rows with per-band gains of up to ±6 dB at 100 cm.
fn comparison_cases() -> Vec<(SeriesKey, f64, f64, Vec<f64>)> {
    let rows = [
        ("Endevco", "sensor", 1.0, 0.0),
        ("ECM8000", "omni", 1.0, 0.0),
        ("U89i", "omni", 1.0, 0.2),
        ("U89i", "bidirectional", 0.0, 0.6),
        ("U89i", "cardioid", 0.5, 0.4),
        ("AT2020", "cardioid", 0.5, 0.0),
        ("C-2", "cardioid", 0.5, 0.3),
    ];
    let mut rng = white_noise(77, rows.len() * 10, 6.0).into_samples().into_iter();
    rows.iter()
        .map(|&(mic, dir, m, theta)| {
            let gains = (0..10).map(|_| (rng.next().unwrap() * 10.0).round() / 10.0).collect();
            (SeriesKey::new(mic, dir, "music"), m, theta, gains)
        })
        .collect()
}

fn comparison_table() -> Outcome {
    let b = bank(Preset::Ids10, DEFAULT_FILTER_LENGTH);
    let stimulus = pink(7, 5.0, -18.6);
    let weights = periodogram_band_weights(&stimulus, b.mapping().edges());
    let stim_level = mean_level_dbfs(&stimulus).value().unwrap();
    let mut rows = Vec::new();
    let mut worst_diff = 0.0f64;
    let mut worst_level = 0.0f64;
    let mut signs_ok = true;
    for (key, m, theta, gains) in comparison_cases() {
        let prof = profile(
            &gains
                .iter()
                .enumerate()
                .map(|(i, g)| (i + 1, vec![(100.0, *g)]))
                .collect::<Vec<_>>()
                .iter()
                .map(|(b, v)| (*b, v.as_slice()))
                .collect::<Vec<_>>(),
        );
        let model = DirectivityModel::new(m).unwrap();
        let rec = synth_recording(&stimulus, 100.0, 10.0, model, theta, Some(&prof), Some(&b)).unwrap();
        let series = nearfield_core::MeasurementSeries::from_signals(key.clone(), vec![(100.0, rec)]).unwrap();
        let row = compare_to_stimulus(&stimulus, &series, &b, 100.0, comparison_label("One", &key)).unwrap();

        let total: f64 = weights.iter().zip(&gains).map(|(w, g)| w * 10f64.powf(g / 10.0)).sum();
        let shift = db10(total);
        for (i, d) in row.diffs_db.iter().enumerate() {
            let truth = shift - gains[i];
            worst_diff = worst_diff.max((d.unwrap() - truth).abs());
        }
        let (hi, lo) = extremes(&gains);
        signs_ok &= row.diffs_db[hi].unwrap() < 0.0 && row.diffs_db[lo].unwrap() > 0.0;
        let level_truth = stim_level + db20(0.1 * directivity_gain(model, theta)) + shift;
        worst_level = worst_level.max((row.recording_level.value().unwrap() - level_truth).abs());
        worst_level = worst_level.max((row.stimulus_level.value().unwrap() - stim_level).abs());
        rows.push(row);
    }
    let table = ComparisonTable::new(10, rows).unwrap();
    let text = table.render_text();
    let lines: Vec<&str> = text.lines().collect();
    let layout_ok = lines.len() == 8
        && lines[0].split_whitespace().skip(1).take(10).eq((1..=10).map(|b| b.to_string()).collect::<Vec<_>>().iter().map(String::as_str))
        && lines[1..].iter().all(|l| {
            let cells: Vec<&str> = l.split_whitespace().collect();
            let n = cells.len();
            n >= 12
                && cells[n - 11..n - 1].iter().all(|c| *c == "0" || c.starts_with(['+', '-']))
                && cells[n - 1].matches('/').count() == 1
        });
    ensure(
        table.rows.len() == 7 && worst_diff <= 0.3 && worst_level <= 0.05 && signs_ok && layout_ok,
        format!(
            "{} rows, max band error {worst_diff:.3} dB, max level error {worst_level:.3} dB, \
             signs {signs_ok}, layout {layout_ok}",
            table.rows.len()
        ),
    )
}

fn extremes(v: &[f64]) -> (usize, usize) {
    let hi = (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    let lo = (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    (hi, lo)
}

/// Synthesize, write WAVs and manifest, ingest, analyze, compare and export.
fn full_campaign(root: &Path) {
    let b = bank(Preset::Ids10, DEFAULT_FILTER_LENGTH);
    let stimulus = pink(8, 3.0, -18.6);
    let specs = [
        campaign_spec(SeriesKey::new("ECM8000", "omni", "pink"), 1.0, 0.0, None),
        campaign_spec(
            SeriesKey::new("AT2020", "cardioid", "pink"),
            0.5,
            0.0,
            Some(profile(&[(1, &[(5.0, 8.0), (50.0, 0.0)])])),
        ),
        campaign_spec(
            SeriesKey::new("U89i", "bidirectional", "pink"),
            0.0,
            0.3,
            Some(profile(&[(2, &[(5.0, 6.0), (40.0, -2.0), (100.0, 0.0)]), (6, &[(5.0, -4.0), (100.0, 0.0)])])),
        ),
    ];
    let data = root.join("data");
    let mut manifest = Manifest::default();
    let mut truths = BTreeMap::new();
    for spec in &specs {
        let campaign = synth_campaign(spec, &stimulus, Some(&b)).unwrap();
        let stem = spec.key.file_stem();
        let part = write_synthetic(&campaign, &stimulus, data.join(&stem)).unwrap();
        manifest.entries.extend(part.entries.into_iter().map(|mut e| {
            e.path = Path::new(&stem).join(e.path);
            e
        }));
        truths.insert(stem, campaign.ground_truth);
    }
    manifest.write(data.join("manifest.json")).unwrap();

    let report = ingest(data.join("manifest.json")).unwrap();
    let rows = report
        .series
        .iter()
        .map(|s| compare_to_stimulus(&stimulus, s, &b, 100.0, comparison_label("pink", s.key())).unwrap())
        .collect();
    let mut result = run_campaign(report, &b, &AnalysisConfig::default());
    assert!(result.errors.is_empty(), "{:?}", result.errors);
    result.comparisons = Some(ComparisonTable::new(b.num_bands(), rows).unwrap());
    export(&result, root.join("out")).unwrap();
    for (stem, truth) in truths {
        let back = std::fs::read_to_string(data.join(&stem).join("ground_truth.csv")).unwrap();
        assert_eq!(GroundTruth::from_csv(&back).unwrap(), truth);
    }
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                files.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    full_campaign(a.path());
    full_campaign(b.path());
    let ta = tree(a.path());
    let tb = tree(b.path());
    let differing: Vec<&String> = ta
        .keys()
        .chain(tb.keys())
        .filter(|k| ta.get(*k) != tb.get(*k))
        .collect();
    let bytes: usize = ta.values().map(Vec::len).sum();
    ensure(
        differing.is_empty() && ta.len() > 40,
        format!("{} files, {bytes} bytes, {} differing {differing:?}", ta.len(), differing.len()),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("filter bank complementarity", complementarity),
        ("decompose-then-sum reconstruction", reconstruction),
        ("zero-phase band filtering", zero_phase),
        ("energy partition vs periodogram oracle", energy_partition),
        ("1/x closed loop", inverse_distance_loop),
        ("per-band profile recovery", profile_recovery),
        ("validity-limit logic", validity_logic),
        ("pink noise generator", pink_noise),
        ("directivity anchors", directivity),
        ("comparison table", comparison_table),
        ("export determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {:>2}. {name}: {detail} ({secs:.1} s)", i + 1),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {:>2}. {name}: {detail} ({secs:.1} s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
