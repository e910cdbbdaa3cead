//! Butterworth design: the three-stage preprocessing chain and its
//! frequency response.
//!
//! ```bash
//! cargo run --example design_filters
//! ```

use vibci::dsp::{design_chain, FilterChainConfig};

fn db(x: f64) -> f64 {
    20.0 * x.log10()
}

fn main() -> vibci::Result<()> {
    let config = FilterChainConfig::default();
    let chain = design_chain(&config, 256.0)?;

    for filter in &chain {
        println!(
            "{} (order {}, {} sections, max pole radius {:.6}):",
            filter.spec.kind.name(),
            filter.order(),
            filter.sections.len(),
            filter.max_pole_radius()
        );
        for f in [0.5, 2.0, 5.0, 10.0, 36.0, 50.0, 60.0, 100.0] {
            println!("  |H({f:>5.1} Hz)| = {:>8.2} dB", db(filter.magnitude_at(f)));
        }
    }

    // The band edges of the order-8 bandpass sit at -3 dB by construction.
    let bandpass = &chain[2];
    for edge in [2.0, 36.0] {
        println!(
            "bandpass edge {edge} Hz: {:.4} dB (Butterworth definition: -3.0103 dB)",
            db(bandpass.magnitude_at(edge))
        );
    }

    // Coefficients for audit: one section per line, b0 b1 b2 a0 a1 a2.
    println!("\nbandpass second-order sections:");
    let mut buf = Vec::new();
    bandpass.write_coefficients(&mut buf)?;
    print!("{}", String::from_utf8_lossy(&buf));
    Ok(())
}
