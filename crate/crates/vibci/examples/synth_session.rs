//! Synthetic EEG generation: pink/white/line noise plus frequency-tagged
//! responses, written in the standard recording + manifest formats.
//!
//! ```bash
//! cargo run --example synth_session
//! ```

use vibci::io::{load_recording, save_recording, SessionManifest};
use vibci::signal::{schedule_session, ProtocolId, ProtocolSpec};
use vibci::synth::{generate_session, pink_noise, SynthConfig};

fn main() -> vibci::Result<()> {
    // Pink noise on its own: exact target sigma, 1/f spectrum.
    let noise = pink_noise(4096, 1.0, 2.0, 99)?;
    let mean = noise.iter().sum::<f64>() / noise.len() as f64;
    let std = (noise.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / noise.len() as f64).sqrt();
    println!("pink noise: n = {}, std = {std:.12} (target 2.0)", noise.len());

    // A full P3a session.
    let spec = ProtocolSpec::builtin(ProtocolId::P3a)?;
    let plan = schedule_session(&spec, 256.0, 7)?;
    let config = SynthConfig::default();
    let recording = generate_session(&plan, &config)?;
    println!(
        "session: {} trials, {} channels x {} samples ({:.0} s)",
        plan.trials.len(),
        recording.n_channels(),
        recording.n_samples(),
        recording.duration_s()
    );

    let dir = std::env::temp_dir().join("vibci-synth-example");
    std::fs::create_dir_all(&dir)?;
    let rec_path = dir.join("recording.csv");
    let man_path = dir.join("manifest.txt");
    save_recording(&recording, &rec_path)?;
    SessionManifest::from_plan(&plan, "example-01").save(&man_path)?;
    println!("wrote {}", rec_path.display());
    println!("wrote {}", man_path.display());

    // The round trip is lossless.
    let reloaded = load_recording(&rec_path)?;
    assert_eq!(reloaded.data, recording.data);
    println!("recording round-trips bit-exactly");
    Ok(())
}
