//! The complete pipeline on synthetic data: generate sessions, preprocess,
//! window, extract PSD features, tune hyperparameters, retrain, evaluate,
//! and write the report bundle.
//!
//! ```bash
//! cargo run --release --example full_experiment
//! ```

use vibci::config::ExperimentConfig;
use vibci::experiment::{render_report, run_experiment, write_bundle};

fn main() -> vibci::Result<()> {
    // Default config: protocol P3a, 3 synthetic training sessions and 2 test
    // sessions here to keep the example quick (the CLI default is 13/6).
    let mut config = ExperimentConfig::default();
    config.seed = 7;
    let synth = config.synth.as_mut().unwrap();
    synth.train_sessions = 3;
    synth.test_sessions = 2;

    println!("running: protocol {}, seed {}", config.protocol.id, config.seed);
    let bundle = run_experiment(&config)?;

    let out_dir = std::env::temp_dir().join("vibci-experiment-example");
    let written = write_bundle(&bundle, &out_dir)?;
    for path in &written {
        println!("wrote {}", path.display());
    }

    println!("\n{}", render_report(&bundle.results)?);
    Ok(())
}
