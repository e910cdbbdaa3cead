//! Welch PSD estimation on trial windows and feature-vector construction.
//!
//! ```bash
//! cargo run --example psd_features
//! ```

use vibci::dsp::{extract_window, preprocess};
use vibci::signal::{schedule_session, ProtocolId, ProtocolSpec, TaskClass};
use vibci::spectral::{extract_features, welch_psd};
use vibci::synth::{generate_session, SynthConfig};

fn main() -> vibci::Result<()> {
    let spec = ProtocolSpec::builtin(ProtocolId::P3a)?;
    let plan = schedule_session(&spec, 256.0, 12)?;
    let recording = preprocess(&generate_session(&plan, &SynthConfig::default())?)?;
    let layout = recording.layout.clone();

    // One VI-5 trial: its analysis window is seconds 3..7, i.e. 1024 samples.
    let trial = plan
        .trials
        .iter()
        .find(|t| t.label == TaskClass::vi(5.0))
        .expect("P3a contains VI-5 trials");
    let window = extract_window(&recording, trial, &spec)?;
    println!(
        "trial {} ({}): window {} channels x {} samples",
        trial.index,
        trial.label,
        window.nrows(),
        window.ncols()
    );

    let psd = welch_psd(window.view(), recording.rate, 512, 0.5)?;
    println!("PSD grid: {} bins at {} Hz resolution", psd.freqs.len(), psd.bin_width());

    let o1 = layout.signal_index("O1").unwrap();
    let row = psd.power.row(o1);
    let peak = row
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap();
    println!("O1 peak bin: {} Hz ({:.4} uV^2/Hz)", psd.freqs[peak], row[peak]);

    let names: Vec<String> = layout.signal_names().iter().map(|s| s.to_string()).collect();
    let fv = extract_features(&psd, (2.0, 36.0), &names, &layout, trial.label)?;
    println!(
        "feature vector: {} electrodes x {} bins = {} values",
        fv.electrodes_used.len(),
        fv.values.len() / fv.electrodes_used.len(),
        fv.values.len()
    );

    // Single-electrode features are just that electrode's band bins.
    let fv_o1 = extract_features(&psd, (2.0, 36.0), &["O1".to_string()], &layout, trial.label)?;
    println!("O1-only feature vector: {} values", fv_o1.values.len());
    Ok(())
}
