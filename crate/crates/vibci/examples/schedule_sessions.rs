//! Protocol definitions and seeded session scheduling.
//!
//! ```bash
//! cargo run --example schedule_sessions
//! ```

use vibci::signal::{class_set, schedule_session, ProtocolId, ProtocolSpec};

fn main() -> vibci::Result<()> {
    println!("Built-in protocols:");
    println!("{:<5} {:>8} {:>10} {:>8} {:>10} {:>10}", "id", "trial(s)", "per class", "classes", "window", "trials");
    for id in ProtocolId::BUILTIN {
        let spec = ProtocolSpec::builtin(id.clone())?;
        println!(
            "{:<5} {:>8} {:>10} {:>8} {:>10} {:>10}",
            spec.id.to_string(),
            spec.trial_duration_s,
            spec.trials_per_class,
            spec.classes.len(),
            format!("{}-{} s", spec.window.0, spec.window.1),
            spec.n_trials(),
        );
    }

    println!("\nClass sets:");
    for id in ProtocolId::BUILTIN {
        let classes: Vec<String> = class_set(&id)?.iter().map(|c| c.to_string()).collect();
        println!("  {id}: {}", classes.join(", "));
    }

    let spec = ProtocolSpec::builtin(ProtocolId::P3a)?;
    let plan = schedule_session(&spec, 256.0, 7)?;
    println!("\nP3a session at seed 7 ({} trials, {} samples total):", plan.trials.len(), plan.total_samples());
    for trial in plan.trials.iter().take(8) {
        println!(
            "  trial {:>2}: {:<6} samples [{:>6}, {:>6})",
            trial.index,
            trial.label.to_string(),
            trial.start_sample,
            trial.start_sample + trial.duration_samples
        );
    }
    println!("  ...");

    // Same seed, same order; different seed, different order.
    let again = schedule_session(&spec, 256.0, 7)?;
    assert_eq!(plan.trials, again.trials);
    println!("\nscheduling is deterministic per seed");
    Ok(())
}
