//! Thin command-line front end; all behavior lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vibci::config::ExperimentConfig;
use vibci::dsp::preprocess_with;
use vibci::error::Error;
use vibci::experiment::{
    self, dump_chain_coefficients, load_results, render_report, run_experiment, session_features,
    write_bundle, write_psd_outputs, PsdCurve, SessionData,
};
use vibci::io::{load_recording, save_recording, SessionManifest};
use vibci::metrics::evaluate;
use vibci::signal::{ProtocolId, ProtocolSpec};
use vibci::spectral::average_psd_by_class;
use vibci::svm::LinearModel;

#[derive(Parser)]
#[command(
    name = "vibci",
    about = "Offline EEG analysis pipeline for SSVEP/visual-imagery BCI experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan and generate a synthetic session to disk
    Synth {
        #[arg(long, default_value = "P3a")]
        protocol: ProtocolId,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Optional experiment config supplying generator overrides
        #[arg(long)]
        config: Option<PathBuf>,
        /// Session id recorded in the manifest
        #[arg(long)]
        session_id: Option<String>,
    },
    /// Filter a recording through the preprocessing chain
    Preprocess {
        /// Input recording file
        #[arg(long)]
        recording: PathBuf,
        /// Output recording file
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also dump designed section coefficients into this directory
        #[arg(long)]
        dump_filters: Option<PathBuf>,
    },
    /// Emit per-class averaged PSD curves for one electrode
    Psd {
        #[arg(long)]
        recording: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "AF4")]
        electrode: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Tune and train a model on the config's training sessions
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a saved model on the config's test sessions
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the full experiment and write the report bundle
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-render report artifacts from a results file
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&PathBuf>) -> vibci::Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn apply_overrides(
    config: &mut ExperimentConfig,
    seed: Option<u64>,
    out: Option<&PathBuf>,
) {
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(out) = out {
        config.out_dir = out.clone();
    }
}

fn run(cli: Cli) -> vibci::Result<()> {
    match cli.command {
        Command::Synth {
            protocol,
            seed,
            out,
            config,
            session_id,
        } => {
            let config = load_config(config.as_ref())?;
            let synth = config
                .synth
                .clone()
                .unwrap_or_default();
            let spec = ProtocolSpec::builtin(protocol.clone())?;
            let id = session_id.unwrap_or_else(|| format!("{protocol}-s{seed}"));
            let (rec, man) = experiment::synth_session_to_dir(
                &spec,
                config.protocol.rate_hz,
                seed,
                &synth,
                &id,
                &out,
            )?;
            println!("wrote {}", rec.display());
            println!("wrote {}", man.display());
        }
        Command::Preprocess {
            recording,
            out,
            config,
            dump_filters,
        } => {
            let config = load_config(config.as_ref())?;
            let rec = load_recording(&recording)?;
            if let Some(dir) = dump_filters {
                for p in dump_chain_coefficients(&config.filters, rec.rate, &dir)? {
                    println!("wrote {}", p.display());
                }
            }
            let filtered = preprocess_with(&rec, &config.filters)?;
            if let Some(parent) = out.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            save_recording(&filtered, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Psd {
            recording,
            manifest,
            electrode,
            out,
            config,
        } => {
            let config = load_config(config.as_ref())?;
            let session = SessionData {
                id: "psd".to_string(),
                recording: load_recording(&recording)?,
                manifest: SessionManifest::load(&manifest)?,
            };
            let row = session
                .recording
                .layout
                .signal_index(&electrode)
                .ok_or_else(|| {
                    Error::validation(format!("electrode '{electrode}' is not a signal channel"))
                })?;
            let trials = session_features(&session, &config)?;
            let labeled: Vec<_> = trials.iter().map(|(l, p, _)| (*l, p.clone())).collect();
            let mut classes: Vec<_> = labeled.iter().map(|(l, _)| *l).collect();
            classes.sort();
            classes.dedup();
            let mut curves = Vec::new();
            for class in classes {
                let (freqs, power) = average_psd_by_class(&labeled, class, row)?;
                curves.push(PsdCurve {
                    class: class.to_string(),
                    freqs,
                    power,
                });
            }
            for p in write_psd_outputs(&curves, &electrode, (0.0, 40.0), &out)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Train { config, seed, out } => {
            let mut config = ExperimentConfig::load(&config)?;
            apply_overrides(&mut config, seed, out.as_ref());
            let bundle = run_experiment(&config)?;
            std::fs::create_dir_all(&config.out_dir)?;
            let model_path = config.out_dir.join("model.txt");
            bundle.model.save(&model_path)?;
            let audit_path = config.out_dir.join("tuning_audit.json");
            std::fs::write(
                &audit_path,
                serde_json::to_string_pretty(&bundle.results.tuning_candidates)
                    .map_err(|e| Error::validation(e.to_string()))?,
            )?;
            println!("wrote {}", model_path.display());
            println!("wrote {}", audit_path.display());
            println!(
                "chosen electrodes: {} | C = {} | train acc {:.2}%",
                bundle.results.chosen_electrodes.join(", "),
                bundle.results.chosen_c,
                bundle.results.train_accuracy * 100.0
            );
        }
        Command::Evaluate {
            config,
            model,
            seed,
        } => {
            let mut config = ExperimentConfig::load(&config)?;
            apply_overrides(&mut config, seed, None);
            let model = LinearModel::load(&model)?;
            let (_, test_sessions) = experiment::acquire_sessions(&config)?;
            let mut features = Vec::new();
            for session in &test_sessions {
                for (_, _, fv) in session_features(session, &config)? {
                    features.push(fv);
                }
            }
            let bin_width = config.protocol.rate_hz / config.welch.segment_len as f64;
            let test = vibci::spectral::Dataset::new(features, config.features.band, bin_width)?
                .restrict_to_electrodes(&model.electrodes_used)?;
            let (accuracy, matrix) = evaluate(&model, &test)?;
            println!("test accuracy: {:.2}% over {} trials", accuracy * 100.0, test.n_examples());
            println!("{}", matrix.render());
        }
        Command::Run { config, seed, out } => {
            let mut config = ExperimentConfig::load(&config)?;
            apply_overrides(&mut config, seed, out.as_ref());
            let bundle = run_experiment(&config)?;
            for p in write_bundle(&bundle, &config.out_dir)? {
                println!("wrote {}", p.display());
            }
            println!(
                "train acc {:.2}% | test acc {:.2}% | {:.2} bits/min",
                bundle.results.train_accuracy * 100.0,
                bundle.results.test_accuracy * 100.0,
                bundle.results.bits_per_min
            );
        }
        Command::Report { results, out } => {
            let results = load_results(&results)?;
            std::fs::create_dir_all(&out)?;
            let report_path = out.join("report.txt");
            std::fs::write(&report_path, render_report(&results)?)?;
            println!("wrote {}", report_path.display());
            let band = (0.0, 40.0);
            for p in write_psd_outputs(
                &results.psd_curves,
                &results.report_electrode,
                band,
                &out,
            )? {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
