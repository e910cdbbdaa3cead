//! Information transfer rate (Wolpaw definition) across class counts,
//! accuracies, and trial durations.
//!
//! ```bash
//! cargo run --example bitrate_table
//! ```

use vibci::metrics::{wolpaw_bitrate, wolpaw_bits_per_trial};

fn main() -> vibci::Result<()> {
    println!("bits/trial by accuracy and class count:");
    print!("{:>6}", "P");
    for n in 2..=5 {
        print!("{:>10}", format!("N={n}"));
    }
    println!();
    let mut p: f64 = 0.2;
    while p <= 1.0 + 1e-9 {
        print!("{:>6.2}", p);
        for n in 2..=5usize {
            print!("{:>10.3}", wolpaw_bits_per_trial(n, p.min(1.0))?);
        }
        println!();
        p += 0.1;
    }

    println!("\nbits/min at selected operating points:");
    for (n, p, dur) in [
        (3, 1.0, 6.0),
        (3, 0.8111, 6.0),
        (5, 0.7278, 6.0),
        (3, 0.7139, 9.0),
        (3, 0.7139, 6.0),
        (2, 0.5, 6.0),
    ] {
        println!(
            "  N = {n}, P = {p:.4}, {dur} s trials -> {:>6.2} bits/min",
            wolpaw_bitrate(n, p, dur)?
        );
    }
    println!("\nbelow-chance accuracies clamp to zero rather than going negative:");
    println!("  N = 3, P = 0.20 -> {} bits/min", wolpaw_bitrate(3, 0.20, 6.0)?);
    Ok(())
}
