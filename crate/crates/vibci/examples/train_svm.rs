//! Linear SVM training, prediction, and model serialization on a toy
//! separable problem.
//!
//! ```bash
//! cargo run --example train_svm
//! ```

use rand::Rng;
use vibci::signal::TaskClass;
use vibci::spectral::{Dataset, FeatureVector};
use vibci::svm::{train_svm, LinearModel};

fn main() -> vibci::Result<()> {
    // Three Gaussian blobs in two dimensions.
    let mut rng = vibci::rng::seeded_rng(17);
    let blobs = [
        ([5.0, 0.0], TaskClass::ssvep(5.0)),
        ([-5.0, 0.0], TaskClass::vi(5.0)),
        ([0.0, 5.0], TaskClass::rest()),
    ];
    let mut features = Vec::new();
    for (center, label) in blobs {
        for _ in 0..30 {
            features.push(FeatureVector {
                values: vec![
                    center[0] + rng.gen::<f64>() * 2.0 - 1.0,
                    center[1] + rng.gen::<f64>() * 2.0 - 1.0,
                ],
                label,
                electrodes_used: vec!["O1".to_string()],
            });
        }
    }
    let dataset = Dataset::new(features, (2.0, 36.0), 0.5)?;

    let model = train_svm(&dataset, 1.0, 0)?;
    println!("classes: {:?}", model.classes.iter().map(|c| c.to_string()).collect::<Vec<_>>());
    println!("solver KKT residual: {:.3e}", model.kkt_residual);

    let correct = dataset
        .features
        .iter()
        .filter(|f| model.predict(f).unwrap() == f.label)
        .count();
    println!("training accuracy: {}/{}", correct, dataset.n_examples());

    for probe in [[4.5, 0.3], [-4.0, -0.5], [0.2, 4.8]] {
        let scores = model.decision_scores(&probe)?;
        let label = model.predict_values(&probe)?;
        println!("probe {probe:?} -> {label}  (scores {scores:.3?})");
    }

    // The text serialization round-trips predictions bit-exactly.
    let text = model.to_text();
    let restored = LinearModel::from_text(&text)?;
    assert_eq!(restored.to_text(), text);
    println!("\nserialized model ({} bytes) round-trips exactly; first lines:", text.len());
    for line in text.lines().take(5) {
        println!("  {line}");
    }
    Ok(())
}
