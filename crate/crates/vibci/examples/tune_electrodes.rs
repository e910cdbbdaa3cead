//! Hyperparameter tuning: greedy forward electrode selection crossed with a
//! regularization grid, scored on a stratified split of the training set.
//!
//! The synthetic data here carries class information only on O1 and O2, so
//! a successful search must pick occipital electrodes.
//!
//! ```bash
//! cargo run --example tune_electrodes
//! ```

use vibci::config::{ExperimentConfig, SynthSection};
use vibci::experiment::{acquire_sessions, session_features};
use vibci::signal::ChannelLayout;
use vibci::spectral::Dataset;
use vibci::svm::{train_svm, tune_hyperparameters};
use vibci::synth::SpatialGain;

fn main() -> vibci::Result<()> {
    // Zero out every electrode except O1/O2.
    let mut synth = SynthSection {
        train_sessions: 4,
        test_sessions: 1,
        ..SynthSection::default()
    };
    for name in ChannelLayout::standard().signal_names() {
        let gain = if name == "O1" || name == "O2" { 1.0 } else { 0.0 };
        synth
            .spatial_gains
            .insert(name.to_string(), SpatialGain { ssvep: gain, vi: gain });
    }
    let config = ExperimentConfig {
        seed: 5,
        synth: Some(synth),
        ..ExperimentConfig::default()
    };

    let (train_sessions, _) = acquire_sessions(&config)?;
    let mut features = Vec::new();
    for session in &train_sessions {
        for (_, _, fv) in session_features(session, &config)? {
            features.push(fv);
        }
    }
    let train = Dataset::new(features, config.features.band, 0.5)?;
    println!(
        "training set: {} trials x {} features",
        train.n_examples(),
        train.n_features()
    );

    let layout = ChannelLayout::standard();
    let result = tune_hyperparameters(&train, &layout, config.seed)?;
    println!("chosen electrodes: {}", result.electrodes.join(", "));
    println!("chosen C: {}", result.c);
    println!("validation accuracy: {:.2}%", result.validation_accuracy * 100.0);
    println!("candidates evaluated: {}", result.candidates.len());

    println!("\ntop candidates:");
    let mut ranked = result.candidates.clone();
    ranked.sort_by(|a, b| b.accuracy.total_cmp(&a.accuracy));
    for c in ranked.iter().take(5) {
        println!("  {:<18} C = {:<8} -> {:.2}%", c.electrodes.join("+"), c.c, c.accuracy * 100.0);
    }

    // Retrain on the full training set with the chosen pair.
    let model = train_svm(&train.restrict_to_electrodes(&result.electrodes)?, result.c, config.seed)?;
    println!("\nfinal model: {} classes, {} features", model.classes.len(), model.scaler.mean.len());
    Ok(())
}
