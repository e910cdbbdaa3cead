//! Zero-phase (forward-backward) filtering and the three-stage
//! preprocessing chain.

use ndarray::Array2;

use crate::dsp::design::{design_butterworth, DesignedFilter, FilterKind, FilterSpec, Sos};
use crate::error::{Error, Result};
use crate::signal::Recording;

/// Runs one forward pass of the cascade in transposed direct form II.
fn sosfilt(sections: &[Sos], x: &[f64], initial: &[[f64; 2]], out: &mut Vec<f64>) {
    out.clear();
    out.extend_from_slice(x);
    let mut state: Vec<[f64; 2]> = initial.to_vec();
    for (s, z) in sections.iter().zip(state.iter_mut()) {
        let [b0, b1, b2] = s.b;
        let [_, a1, a2] = s.a;
        for v in out.iter_mut() {
            let x_n = *v;
            let y = b0 * x_n + z[0];
            z[0] = b1 * x_n - a1 * y + z[1];
            z[1] = b2 * x_n - a2 * y;
            *v = y;
        }
    }
}

/// Per-section steady-state response to a unit step, used to initialize the
/// filter state so that edge transients are suppressed. Section `k` sees the
/// cumulative DC gain of the sections before it.
fn step_initial_state(sections: &[Sos]) -> Vec<[f64; 2]> {
    let mut level = 1.0;
    let mut states = Vec::with_capacity(sections.len());
    for s in sections {
        let [b0, b1, b2] = s.b;
        let [_, a1, a2] = s.a;
        let h1 = (b0 + b1 + b2) / (1.0 + a1 + a2);
        states.push([(h1 - b0) * level, (b2 - a2 * h1) * level]);
        level *= h1;
    }
    states
}

/// Odd (point-symmetric) extension of `x` by `pad` samples at each end.
fn odd_extension(x: &[f64], pad: usize) -> Vec<f64> {
    debug_assert!(pad < x.len());
    let n = x.len();
    let mut ext = Vec::with_capacity(n + 2 * pad);
    let first = x[0];
    for i in (1..=pad).rev() {
        ext.push(2.0 * first - x[i]);
    }
    ext.extend_from_slice(x);
    let last = x[n - 1];
    for i in 1..=pad {
        ext.push(2.0 * last - x[n - 1 - i]);
    }
    ext
}

/// Forward-backward filtering of one channel with odd edge extension of
/// `3 * order` samples. The result has zero phase and the squared magnitude
/// response of the cascade.
pub fn filtfilt(filter: &DesignedFilter, x: &[f64]) -> Result<Vec<f64>> {
    let pad = 3 * filter.order();
    if x.len() <= 2 * pad {
        return Err(Error::validation(format!(
            "signal of {} samples is too short for zero-phase filtering (needs > {})",
            x.len(),
            2 * pad
        )));
    }
    let zi = step_initial_state(&filter.sections);
    let ext = odd_extension(x, pad);

    let scale = |zi: &[[f64; 2]], v: f64| -> Vec<[f64; 2]> {
        zi.iter().map(|z| [z[0] * v, z[1] * v]).collect()
    };

    let mut forward = Vec::new();
    sosfilt(&filter.sections, &ext, &scale(&zi, ext[0]), &mut forward);
    forward.reverse();
    let mut backward = Vec::new();
    sosfilt(&filter.sections, &forward, &scale(&zi, forward[0]), &mut backward);
    backward.reverse();

    Ok(backward[pad..backward.len() - pad].to_vec())
}

/// Applies `filter` forward-backward to every channel of `recording`.
pub fn apply_zero_phase(filter: &DesignedFilter, recording: &Recording) -> Result<Recording> {
    let n_samples = recording.n_samples();
    if n_samples <= 6 * filter.order() {
        return Err(Error::validation(format!(
            "recording of {n_samples} samples is too short for order-{} zero-phase filtering (needs > {})",
            filter.order(),
            6 * filter.order()
        )));
    }
    let mut out = Array2::zeros(recording.data.raw_dim());
    for (row_in, mut row_out) in recording
        .data
        .rows()
        .into_iter()
        .zip(out.rows_mut().into_iter())
    {
        let x: Vec<f64> = row_in.to_vec();
        let y = filtfilt(filter, &x)?;
        for (dst, src) in row_out.iter_mut().zip(y) {
            *dst = src;
        }
    }
    Recording::new(recording.rate, out, recording.layout.clone(), recording.provenance.clone())
}

/// Parameters of the three-stage preprocessing chain.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct FilterChainConfig {
    pub lowpass_hz: f64,
    pub lowpass_order: usize,
    pub notch_band: (f64, f64),
    pub notch_order: usize,
    pub bandpass_band: (f64, f64),
    pub bandpass_order: usize,
}

impl Default for FilterChainConfig {
    fn default() -> Self {
        FilterChainConfig {
            lowpass_hz: 60.0,
            lowpass_order: 4,
            notch_band: (48.0, 52.0),
            notch_order: 4,
            bandpass_band: (2.0, 36.0),
            bandpass_order: 8,
        }
    }
}

/// Designs the chain `lowpass -> notch -> bandpass` at the given rate.
pub fn design_chain(config: &FilterChainConfig, rate: f64) -> Result<Vec<DesignedFilter>> {
    Ok(vec![
        design_butterworth(&FilterSpec::new(
            FilterKind::Lowpass { cutoff_hz: config.lowpass_hz },
            config.lowpass_order,
            rate,
        ))?,
        design_butterworth(&FilterSpec::new(
            FilterKind::Bandstop {
                low_hz: config.notch_band.0,
                high_hz: config.notch_band.1,
            },
            config.notch_order,
            rate,
        ))?,
        design_butterworth(&FilterSpec::new(
            FilterKind::Bandpass {
                low_hz: config.bandpass_band.0,
                high_hz: config.bandpass_band.1,
            },
            config.bandpass_order,
            rate,
        ))?,
    ])
}

/// Applies the preprocessing chain with custom parameters, each stage
/// zero-phase.
pub fn preprocess_with(recording: &Recording, config: &FilterChainConfig) -> Result<Recording> {
    let chain = design_chain(config, recording.rate)?;
    let mut current = recording.clone();
    for filter in &chain {
        current = apply_zero_phase(filter, &current)?;
    }
    Ok(current)
}

/// Applies the default chain: 60 Hz lowpass, 48-52 Hz notch, 2-36 Hz
/// order-8 bandpass.
pub fn preprocess(recording: &Recording) -> Result<Recording> {
    preprocess_with(recording, &FilterChainConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::ChannelLayout;
    use ndarray::Array2;
    use std::f64::consts::PI;

    fn sine(freq: f64, rate: f64, n: usize, amplitude: f64) -> Vec<f64> {
        (0..n)
            .map(|i| amplitude * (2.0 * PI * freq * i as f64 / rate).sin())
            .collect()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    fn bandpass_2_36() -> DesignedFilter {
        design_butterworth(&FilterSpec::new(
            FilterKind::Bandpass { low_hz: 2.0, high_hz: 36.0 },
            8,
            256.0,
        ))
        .unwrap()
    }

    #[test]
    fn passband_sine_amplitude_matches_squared_response() {
        let filter = bandpass_2_36();
        let x = sine(10.0, 256.0, 4096, 1.0);
        let y = filtfilt(&filter, &x).unwrap();
        // Interior region, away from residual edge effects.
        let core = &y[1024..3072];
        let expected = filter.magnitude_at(10.0).powi(2);
        let got = rms(core) * 2f64.sqrt();
        assert!(
            (got - expected).abs() / expected < 0.02,
            "amplitude {got} vs expected {expected}"
        );
    }

    #[test]
    fn zero_phase_has_peak_correlation_at_lag_zero() {
        let filter = bandpass_2_36();
        let x = sine(10.0, 256.0, 4096, 1.0);
        let y = filtfilt(&filter, &x).unwrap();
        let core = 1024..3072;
        let mut best_lag = isize::MIN;
        let mut best = f64::MIN;
        for lag in -20isize..=20 {
            let mut acc = 0.0;
            for i in core.clone() {
                let j = i as isize + lag;
                acc += x[i] * y[j as usize];
            }
            if acc > best {
                best = acc;
                best_lag = lag;
            }
        }
        assert_eq!(best_lag, 0);
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let filter = bandpass_2_36();
        let x = vec![0.0; 2048];
        let y = filtfilt(&filter, &x).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn filtering_is_linear() {
        let filter = bandpass_2_36();
        let x = sine(8.0, 256.0, 2048, 1.0);
        let y = sine(17.0, 256.0, 2048, 0.7);
        let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 2.0 * a + 3.0 * b).collect();
        let fx = filtfilt(&filter, &x).unwrap();
        let fy = filtfilt(&filter, &y).unwrap();
        let fc = filtfilt(&filter, &combo).unwrap();
        let scale = rms(&fc).max(1e-12);
        for i in 0..fc.len() {
            let expected = 2.0 * fx[i] + 3.0 * fy[i];
            assert!(
                (fc[i] - expected).abs() / scale < 1e-9,
                "index {i}: {} vs {expected}",
                fc[i]
            );
        }
    }

    #[test]
    fn shape_rate_layout_preserved() {
        let layout = ChannelLayout::standard();
        let data = Array2::from_shape_fn((15, 2048), |(c, i)| {
            ((i as f64 * 0.1) + c as f64).sin()
        });
        let rec = Recording::new(256.0, data, layout, "test").unwrap();
        let filter = bandpass_2_36();
        let out = apply_zero_phase(&filter, &rec).unwrap();
        assert_eq!(out.n_channels(), rec.n_channels());
        assert_eq!(out.n_samples(), rec.n_samples());
        assert_eq!(out.rate, rec.rate);
        assert_eq!(out.layout, rec.layout);
    }

    #[test]
    fn too_short_recording_is_rejected() {
        let filter = bandpass_2_36();
        // order 16 -> needs > 96 samples
        let x = vec![1.0; 96];
        assert!(filtfilt(&filter, &x).is_err());
        let x = vec![1.0; 97];
        assert!(filtfilt(&filter, &x).is_ok());
    }

    #[test]
    fn chain_removes_line_noise() {
        let layout = ChannelLayout::standard();
        let n = 4096;
        let mut data = Array2::zeros((15, n));
        let line = sine(50.0, 256.0, n, 1.0);
        for mut row in data.rows_mut() {
            for (dst, src) in row.iter_mut().zip(&line) {
                *dst = *src;
            }
        }
        let rec = Recording::new(256.0, data, layout, "line").unwrap();
        let out = preprocess(&rec).unwrap();
        // Attenuation is a steady-state quantity: measure away from the
        // seam transients of the edge extension (1 s margin each side).
        let in_rms = rms(&line[256..n - 256]);
        let out_rms = rms(&out.data.row(0).to_vec()[256..n - 256]);
        assert!(
            out_rms <= 0.01 * in_rms,
            "50 Hz residual RMS {out_rms} vs input {in_rms}"
        );
    }

    #[test]
    fn chain_removes_dc_offset() {
        let layout = ChannelLayout::standard();
        let data = Array2::from_elem((15, 4096), 100.0);
        let rec = Recording::new(256.0, data, layout, "dc").unwrap();
        let out = preprocess(&rec).unwrap();
        let mean = out.data.row(0).mean().unwrap();
        assert!(mean.abs() < 0.5, "residual mean {mean}");
    }
}
