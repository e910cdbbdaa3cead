//! End-to-end experiment orchestration: data acquisition (synthetic or from
//! files), preprocessing, windowing, PSD features, tuning, training,
//! evaluation, and report/plot emission.
//!
//! The whole bundle is a pure function of `(config, seed, input files)`:
//! reruns with identical inputs produce byte-identical outputs.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SynthSection};
use crate::dsp::{design_chain, extract_window, preprocess_with};
use crate::error::{Error, Result};
use crate::io::{load_recording, save_recording, SessionManifest};
use crate::metrics::{evaluate, wolpaw_bitrate, ConfusionMatrix};
use crate::rng::{derive_seed, SeedStream};
use crate::signal::{schedule_session, ChannelLayout, ProtocolSpec, Recording, TaskClass};
use crate::spectral::{average_psd_by_class, extract_features, welch_psd, Dataset, PsdEstimate};
use crate::svm::{train_svm, tune_with_grid, LinearModel, TuningCandidate};

pub const RESULTS_SCHEMA_VERSION: u32 = 1;

/// One session's recording plus its trial table.
#[derive(Debug, Clone)]
pub struct SessionData {
    pub id: String,
    pub recording: Recording,
    pub manifest: SessionManifest,
}

/// Per-class averaged PSD curve for the report electrode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsdCurve {
    pub class: String,
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
}

/// Confusion matrix in serializable form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfusionTable {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionTable {
    fn from_matrix(m: &ConfusionMatrix) -> Self {
        ConfusionTable {
            classes: m.classes.iter().map(|c| c.to_string()).collect(),
            counts: m.counts.clone(),
        }
    }

    fn to_matrix(&self) -> Result<ConfusionMatrix> {
        let classes: Vec<TaskClass> = self
            .classes
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_>>()?;
        Ok(ConfusionMatrix {
            classes,
            counts: self.counts.clone(),
        })
    }
}

/// The machine-readable results file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub schema_version: u32,
    pub protocol: String,
    pub session_label: String,
    pub seed: u64,
    pub train_sessions: Vec<String>,
    pub test_sessions: Vec<String>,
    pub classes: Vec<String>,
    pub chosen_electrodes: Vec<String>,
    pub chosen_c: f64,
    pub validation_accuracy: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub train_count: usize,
    pub test_count: usize,
    pub train_confusion: ConfusionTable,
    pub test_confusion: ConfusionTable,
    pub trial_duration_s: f64,
    pub bits_per_min: f64,
    /// True when the accuracy sat below chance and the rate was clamped to 0.
    pub bitrate_clamped: bool,
    pub model_kkt_residual: f64,
    pub report_electrode: String,
    pub psd_curves: Vec<PsdCurve>,
    pub tuning_candidates: Vec<TuningCandidate>,
}

/// Everything `run` produces before files are written.
#[derive(Debug, Clone)]
pub struct ExperimentBundle {
    pub results: ExperimentResults,
    pub model: LinearModel,
}

/// Generates or loads the train/test sessions and enforces that the two
/// splits share no session id.
pub fn acquire_sessions(
    config: &ExperimentConfig,
) -> Result<(Vec<SessionData>, Vec<SessionData>)> {
    let (train, test): (Vec<SessionData>, Vec<SessionData>) = match (&config.synth, &config.data) {
        (Some(synth), None) => synth_sessions(config, synth)?,
        (None, Some(data)) => {
            let load = |entry: &crate::config::DataEntry| -> Result<SessionData> {
                let recording = load_recording(&entry.recording)?;
                let manifest = SessionManifest::load(&entry.manifest)?;
                if (recording.rate - manifest.rate).abs() > 1e-9 {
                    return Err(Error::validation(format!(
                        "session '{}': recording rate {} differs from manifest rate {}",
                        manifest.session_id, recording.rate, manifest.rate
                    )));
                }
                Ok(SessionData {
                    id: manifest.session_id.clone(),
                    recording,
                    manifest,
                })
            };
            (
                data.train.iter().map(load).collect::<Result<_>>()?,
                data.test.iter().map(load).collect::<Result<_>>()?,
            )
        }
        _ => return Err(Error::validation("config needs exactly one data source")),
    };

    let mut seen = std::collections::BTreeSet::new();
    for s in train.iter().chain(&test) {
        if !seen.insert(s.id.clone()) {
            return Err(Error::validation(format!(
                "session id '{}' appears more than once across train/test; the splits must be disjoint",
                s.id
            )));
        }
    }
    Ok((train, test))
}

fn synth_sessions(
    config: &ExperimentConfig,
    synth: &SynthSection,
) -> Result<(Vec<SessionData>, Vec<SessionData>)> {
    let protocol = ProtocolSpec::builtin(config.protocol.id.clone())?;
    let rate = config.protocol.rate_hz;
    let make = |global_idx: usize, id: String| -> Result<SessionData> {
        let plan_seed = derive_seed(config.seed, SeedStream::Schedule, global_idx as u64);
        let gen_seed = derive_seed(config.seed, SeedStream::Synth, global_idx as u64);
        let plan = schedule_session(&protocol, rate, plan_seed)?;
        let recording = crate::synth::generate_session(&plan, &synth.to_synth_config(rate, gen_seed))?;
        Ok(SessionData {
            id: id.clone(),
            recording,
            manifest: SessionManifest::from_plan(&plan, id),
        })
    };
    let train: Vec<SessionData> = (0..synth.train_sessions)
        .into_par_iter()
        .map(|i| make(i, format!("train-{:02}", i + 1)))
        .collect::<Result<_>>()?;
    let test: Vec<SessionData> = (0..synth.test_sessions)
        .into_par_iter()
        .map(|i| make(synth.train_sessions + i, format!("test-{:02}", i + 1)))
        .collect::<Result<_>>()?;
    Ok((train, test))
}

/// Preprocesses one session and extracts per-trial features and labeled
/// PSDs over the full electrode set.
pub fn session_features(
    session: &SessionData,
    config: &ExperimentConfig,
) -> Result<Vec<(TaskClass, PsdEstimate, crate::spectral::FeatureVector)>> {
    let spec = session.manifest.protocol_spec()?;
    let filtered = preprocess_with(&session.recording, &config.filters)
        .map_err(|e| e.in_stage("preprocess"))?;
    let layout = &filtered.layout;
    let names: Vec<String> = layout.signal_names().iter().map(|s| s.to_string()).collect();

    session
        .manifest
        .trials
        .iter()
        .map(|trial| {
            let window =
                extract_window(&filtered, trial, &spec).map_err(|e| e.in_stage("window"))?;
            let psd = welch_psd(
                window.view(),
                filtered.rate,
                config.welch.segment_len,
                config.welch.overlap,
            )
            .map_err(|e| e.in_stage("psd"))?;
            let fv = extract_features(&psd, config.features.band, &names, layout, trial.label)
                .map_err(|e| e.in_stage("features"))?;
            Ok((trial.label, psd, fv))
        })
        .collect()
}

struct PreparedData {
    train: Dataset,
    test: Dataset,
    labeled_psds: Vec<(TaskClass, PsdEstimate)>,
    layout: ChannelLayout,
    protocol: ProtocolSpec,
    train_ids: Vec<String>,
    test_ids: Vec<String>,
}

fn prepare(config: &ExperimentConfig) -> Result<PreparedData> {
    let (train_sessions, test_sessions) = acquire_sessions(config)?;
    let layout = train_sessions[0].recording.layout.clone();
    let protocol = train_sessions[0].manifest.protocol_spec()?;

    let extract = |sessions: &[SessionData]| -> Result<Vec<Vec<(TaskClass, PsdEstimate, crate::spectral::FeatureVector)>>> {
        sessions
            .par_iter()
            .map(|s| session_features(s, config))
            .collect()
    };
    let train_parts = extract(&train_sessions)?;
    let test_parts = extract(&test_sessions)?;

    let bin_width = config.protocol.rate_hz / config.welch.segment_len as f64;
    let dataset = |parts: &[Vec<(TaskClass, PsdEstimate, crate::spectral::FeatureVector)>]| {
        Dataset::new(
            parts
                .iter()
                .flatten()
                .map(|(_, _, fv)| fv.clone())
                .collect(),
            config.features.band,
            bin_width,
        )
    };
    let train = dataset(&train_parts)?;
    let test = dataset(&test_parts)?;

    let labeled_psds: Vec<(TaskClass, PsdEstimate)> = train_parts
        .iter()
        .chain(&test_parts)
        .flatten()
        .map(|(label, psd, _)| (*label, psd.clone()))
        .collect();

    Ok(PreparedData {
        train,
        test,
        labeled_psds,
        layout,
        protocol,
        train_ids: train_sessions.iter().map(|s| s.id.clone()).collect(),
        test_ids: test_sessions.iter().map(|s| s.id.clone()).collect(),
    })
}

/// Runs the full pipeline: preprocess, window, PSD, features, tune on a
/// split of the training set, retrain on the full training set, evaluate on
/// the held-out test set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentBundle> {
    config.validate()?;
    let data = prepare(config)?;

    let tuning = tune_with_grid(&data.train, &data.layout, &config.tuning.c_grid, config.seed)
        .map_err(|e| e.in_stage("tune"))?;

    let train_restricted = data.train.restrict_to_electrodes(&tuning.electrodes)?;
    let test_restricted = data.test.restrict_to_electrodes(&tuning.electrodes)?;
    let model = train_svm(
        &train_restricted,
        tuning.c,
        derive_seed(config.seed, SeedStream::Solver, u64::MAX),
    )
    .map_err(|e| e.in_stage("train"))?;

    let (train_accuracy, train_cm) =
        evaluate(&model, &train_restricted).map_err(|e| e.in_stage("evaluate"))?;
    let (test_accuracy, test_cm) =
        evaluate(&model, &test_restricted).map_err(|e| e.in_stage("evaluate"))?;

    let n_classes = model.classes.len();
    let bits_per_min =
        wolpaw_bitrate(n_classes, test_accuracy, data.protocol.trial_duration_s)?;
    let bitrate_clamped = test_accuracy <= 1.0 / n_classes as f64;

    // Fig-2-style curves: per-class averaged PSD at the report electrode,
    // over all trials of the experiment.
    let electrode_row = data.layout.signal_index(&config.report.electrode).ok_or_else(|| {
        Error::validation(format!(
            "report.electrode '{}' is not a signal channel",
            config.report.electrode
        ))
    })?;
    let mut psd_curves = Vec::new();
    for class in data.train.classes() {
        let (freqs, power) = average_psd_by_class(&data.labeled_psds, class, electrode_row)?;
        psd_curves.push(PsdCurve {
            class: class.to_string(),
            freqs,
            power,
        });
    }

    let source = if config.synth.is_some() { "synthetic" } else { "files" };
    let results = ExperimentResults {
        schema_version: RESULTS_SCHEMA_VERSION,
        protocol: data.protocol.id.to_string(),
        session_label: format!("{} ({source})", data.protocol.id),
        seed: config.seed,
        train_sessions: data.train_ids,
        test_sessions: data.test_ids,
        classes: model.classes.iter().map(|c| c.to_string()).collect(),
        chosen_electrodes: tuning.electrodes.clone(),
        chosen_c: tuning.c,
        validation_accuracy: tuning.validation_accuracy,
        train_accuracy,
        test_accuracy,
        train_count: data.train.n_examples(),
        test_count: data.test.n_examples(),
        train_confusion: ConfusionTable::from_matrix(&train_cm),
        test_confusion: ConfusionTable::from_matrix(&test_cm),
        trial_duration_s: data.protocol.trial_duration_s,
        bits_per_min,
        bitrate_clamped,
        model_kkt_residual: model.kkt_residual,
        report_electrode: config.report.electrode.clone(),
        psd_curves,
        tuning_candidates: tuning.candidates,
    };
    Ok(ExperimentBundle { results, model })
}

/// Renders the human-readable report: accuracy block, tuning summary,
/// bit-rate, and confusion matrices.
pub fn render_report(results: &ExperimentResults) -> Result<String> {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "vibci experiment report");
    let _ = writeln!(out, "=======================");
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<24} {:>10} {:>10} {:>8} {:>8}",
        "Session", "Train acc.", "Test acc.", "Train #", "Test #"
    );
    let _ = writeln!(
        out,
        "{:<24} {:>9.2}% {:>9.2}% {:>8} {:>8}",
        results.session_label,
        results.train_accuracy * 100.0,
        results.test_accuracy * 100.0,
        results.train_count,
        results.test_count
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "Seed: {}", results.seed);
    let _ = writeln!(out, "Train sessions: {}", results.train_sessions.join(", "));
    let _ = writeln!(out, "Test sessions:  {}", results.test_sessions.join(", "));
    let _ = writeln!(out);
    let _ = writeln!(out, "Chosen electrodes: {}", results.chosen_electrodes.join(", "));
    let _ = writeln!(out, "Chosen C: {}", results.chosen_c);
    let _ = writeln!(
        out,
        "Validation accuracy during tuning: {:.2}% over {} candidates",
        results.validation_accuracy * 100.0,
        results.tuning_candidates.len()
    );
    let _ = writeln!(out, "Solver KKT residual: {:.3e}", results.model_kkt_residual);
    let _ = writeln!(out);
    let clamp_note = if results.bitrate_clamped {
        " (clamped: accuracy at or below chance)"
    } else {
        ""
    };
    let _ = writeln!(
        out,
        "Information transfer rate: {:.2} bits/min over {} classes, {} s trials{clamp_note}",
        results.bits_per_min,
        results.classes.len(),
        results.trial_duration_s
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "Confusion matrix (train):");
    let _ = writeln!(out, "{}", results.train_confusion.to_matrix()?.render());
    let _ = writeln!(out, "Confusion matrix (test):");
    let _ = writeln!(out, "{}", results.test_confusion.to_matrix()?.render());
    Ok(out)
}

/// Simple static SVG with one polyline per class.
pub fn psd_curves_svg(curves: &[PsdCurve], electrode: &str, band: (f64, f64)) -> String {
    const W: f64 = 720.0;
    const H: f64 = 440.0;
    const ML: f64 = 60.0;
    const MR: f64 = 20.0;
    const MT: f64 = 40.0;
    const MB: f64 = 50.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

    let (lo, hi) = band;
    let y_max = curves
        .iter()
        .flat_map(|c| {
            c.freqs
                .iter()
                .zip(&c.power)
                .filter(|(f, _)| **f >= lo && **f <= hi)
                .map(|(_, p)| *p)
        })
        .fold(0.0f64, f64::max)
        .max(1e-12);

    let x_of = |f: f64| ML + (f - lo) / (hi - lo) * (W - ML - MR);
    let y_of = |p: f64| H - MB - (p / y_max) * (H - MT - MB);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">Averaged PSD at {electrode}</text>\n",
        W / 2.0
    ));
    svg.push_str(&format!(
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n",
        W - ML - MR,
        H - MT - MB
    ));
    // x ticks every 5 Hz
    let mut f = (lo / 5.0).ceil() * 5.0;
    while f <= hi + 1e-9 {
        let x = x_of(f);
        svg.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{}\" x2=\"{x:.1}\" y2=\"{}\" stroke=\"#999\"/>\n",
            H - MB,
            H - MB + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{}\" text-anchor=\"middle\">{f}</text>\n",
            H - MB + 20.0
        ));
        f += 5.0;
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">frequency (Hz)</text>\n",
        (ML + W - MR) / 2.0,
        H - 10.0
    ));
    svg.push_str(&format!(
        "<text x=\"15\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 15 {})\">power (uV^2/Hz)</text>\n",
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    ));

    for (i, curve) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = curve
            .freqs
            .iter()
            .zip(&curve.power)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(f, p)| format!("{:.2},{:.2}", x_of(*f), y_of(*p)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            points.join(" ")
        ));
        let ly = MT + 16.0 + 16.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            W - MR - 110.0,
            W - MR - 90.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            W - MR - 85.0,
            ly + 4.0,
            curve.class
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes the complete bundle; returns the written paths.
pub fn write_bundle(bundle: &ExperimentBundle, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let results_path = out_dir.join("results.json");
    std::fs::write(&results_path, results_to_json(&bundle.results)?)?;
    written.push(results_path);

    let report_path = out_dir.join("report.txt");
    std::fs::write(&report_path, render_report(&bundle.results)?)?;
    written.push(report_path);

    let model_path = out_dir.join("model.txt");
    bundle.model.save(&model_path)?;
    written.push(model_path);

    written.extend(write_psd_outputs(
        &bundle.results.psd_curves,
        &bundle.results.report_electrode,
        band_of(&bundle.results),
        out_dir,
    )?);
    Ok(written)
}

fn band_of(results: &ExperimentResults) -> (f64, f64) {
    // Curves carry the full PSD grid; plot the band the features used when
    // recoverable, otherwise the whole grid.
    let hi = results
        .psd_curves
        .first()
        .and_then(|c| c.freqs.last().copied())
        .unwrap_or(40.0);
    (0.0, hi.min(40.0))
}

/// Writes two-column curve files plus the overview SVG.
pub fn write_psd_outputs(
    curves: &[PsdCurve],
    electrode: &str,
    band: (f64, f64),
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for curve in curves {
        let path = out_dir.join(format!("psd_{electrode}_{}.csv", curve.class));
        let mut text = String::from("# frequency_hz,power_uv2_per_hz\n");
        for (f, p) in curve.freqs.iter().zip(&curve.power) {
            text.push_str(&format!("{f},{p}\n"));
        }
        std::fs::write(&path, text)?;
        written.push(path);
    }
    let svg_path = out_dir.join(format!("psd_{electrode}.svg"));
    std::fs::write(&svg_path, psd_curves_svg(curves, electrode, band))?;
    written.push(svg_path);
    Ok(written)
}

pub fn results_to_json(results: &ExperimentResults) -> Result<String> {
    serde_json::to_string_pretty(results)
        .map_err(|e| Error::validation(format!("results serialization: {e}")))
}

/// Loads a results file, rejecting unknown schema versions.
pub fn load_results(path: &Path) -> Result<ExperimentResults> {
    let text = std::fs::read_to_string(path)?;
    let results: ExperimentResults = serde_json::from_str(&text)
        .map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    if results.schema_version != RESULTS_SCHEMA_VERSION {
        return Err(Error::validation(format!(
            "results schema_version {} is not supported (expected {RESULTS_SCHEMA_VERSION})",
            results.schema_version
        )));
    }
    Ok(results)
}

/// Generates one synthetic session and writes `recording.csv` plus
/// `manifest.txt` into `out_dir`.
pub fn synth_session_to_dir(
    protocol: &ProtocolSpec,
    rate: f64,
    seed: u64,
    synth: &SynthSection,
    session_id: &str,
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let plan = schedule_session(protocol, rate, seed)?;
    let recording = crate::synth::generate_session(
        &plan,
        &synth.to_synth_config(rate, derive_seed(seed, SeedStream::Synth, 0)),
    )?;
    std::fs::create_dir_all(out_dir)?;
    let rec_path = out_dir.join("recording.csv");
    let man_path = out_dir.join("manifest.txt");
    save_recording(&recording, &rec_path)?;
    SessionManifest::from_plan(&plan, session_id).save(&man_path)?;
    Ok((rec_path, man_path))
}

/// Writes each stage's designed coefficients (one file per stage) for audit.
pub fn dump_chain_coefficients(
    config: &crate::dsp::FilterChainConfig,
    rate: f64,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let chain = design_chain(config, rate)?;
    let mut written = Vec::new();
    for filter in &chain {
        let path = out_dir.join(format!("filter_{}.txt", filter.spec.kind.name()));
        let mut buf = Vec::new();
        filter.write_coefficients(&mut buf)?;
        std::fs::write(&path, buf)?;
        written.push(path);
    }
    Ok(written)
}
