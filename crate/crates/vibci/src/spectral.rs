//! Welch power spectral density estimation and PSD-band feature vectors.

use ndarray::{Array2, ArrayView2};
use rustfft::{num_complex::Complex64, FftPlanner};

use crate::error::{Error, Result};
use crate::signal::{ChannelLayout, TaskClass};

/// Default Welch parameters: 2 s segments at 256 Hz (0.5 Hz resolution),
/// Hann taper, 50% overlap.
pub const DEFAULT_SEGMENT_LEN: usize = 512;
pub const DEFAULT_OVERLAP: f64 = 0.5;

/// One-sided PSD estimate per channel, in signal-units squared per Hz.
#[derive(Debug, Clone)]
pub struct PsdEstimate {
    /// Ascending, uniformly spaced frequency grid starting at 0 Hz.
    pub freqs: Vec<f64>,
    /// `[channels x n_bins]`.
    pub power: Array2<f64>,
}

impl PsdEstimate {
    pub fn n_channels(&self) -> usize {
        self.power.nrows()
    }

    pub fn bin_width(&self) -> f64 {
        self.freqs.get(1).copied().unwrap_or(0.0)
    }

    /// Index of the bin nearest `freq_hz`.
    pub fn bin_of(&self, freq_hz: f64) -> usize {
        (freq_hz / self.bin_width()).round() as usize
    }

    /// Integrated power of one channel (trapezoid-free bin sum times bin width).
    pub fn integrated_power(&self, channel: usize) -> f64 {
        self.power.row(channel).sum() * self.bin_width()
    }
}

/// Periodic Hann taper of length `n`.
fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos()))
        .collect()
}

/// Welch PSD of a `[channels x n_samples]` segment: averaged modified
/// periodograms with a periodic Hann taper, per-segment mean removal, and
/// one-sided density scaling (the integral over frequency approximates the
/// signal variance). Frequency resolution is `rate / seg_len`.
pub fn welch_psd(
    segment: ArrayView2<'_, f64>,
    rate: f64,
    seg_len: usize,
    overlap: f64,
) -> Result<PsdEstimate> {
    let n = segment.ncols();
    if seg_len < 8 {
        return Err(Error::validation(format!("seg_len {seg_len} is below the minimum of 8")));
    }
    if seg_len > n {
        return Err(Error::validation(format!(
            "seg_len {seg_len} exceeds the segment length {n}"
        )));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::validation(format!("overlap {overlap} must be in [0, 1)")));
    }
    if !(rate > 0.0) {
        return Err(Error::validation(format!("rate must be positive, got {rate}")));
    }

    let hop = ((seg_len as f64) * (1.0 - overlap)).round().max(1.0) as usize;
    let n_segments = (n - seg_len) / hop + 1;
    let window = hann(seg_len);
    let win_power: f64 = window.iter().map(|w| w * w).sum();
    let n_bins = seg_len / 2 + 1;

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(seg_len);
    let mut buf = vec![Complex64::new(0.0, 0.0); seg_len];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    let mut power = Array2::zeros((segment.nrows(), n_bins));
    for (ch, row) in segment.rows().into_iter().enumerate() {
        let mut acc = vec![0.0f64; n_bins];
        for s in 0..n_segments {
            let start = s * hop;
            let chunk = row.slice(ndarray::s![start..start + seg_len]);
            let mean = chunk.sum() / seg_len as f64;
            for (i, (&x, w)) in chunk.iter().zip(&window).enumerate() {
                buf[i] = Complex64::new((x - mean) * w, 0.0);
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (k, a) in acc.iter_mut().enumerate() {
                *a += buf[k].norm_sqr();
            }
        }
        let scale = 1.0 / (rate * win_power * n_segments as f64);
        for (k, a) in acc.iter().enumerate() {
            // One-sided: double everything except DC and Nyquist.
            let one_sided = if k == 0 || (seg_len % 2 == 0 && k == n_bins - 1) {
                1.0
            } else {
                2.0
            };
            power[[ch, k]] = a * scale * one_sided;
        }
    }

    let df = rate / seg_len as f64;
    let freqs = (0..n_bins).map(|k| k as f64 * df).collect();
    Ok(PsdEstimate { freqs, power })
}

/// Per-trial feature vector: concatenated PSD bins, electrode-major.
#[derive(Debug, Clone)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: TaskClass,
    /// Selected electrodes, in layout order.
    pub electrodes_used: Vec<String>,
}

/// Concatenates, for each selected electrode in layout order, the PSD bins
/// with `lo <= f <= hi`. At 0.5 Hz resolution over [2, 36] Hz this is 69
/// bins per electrode.
pub fn extract_features(
    psd: &PsdEstimate,
    band: (f64, f64),
    electrodes: &[String],
    layout: &ChannelLayout,
    label: TaskClass,
) -> Result<FeatureVector> {
    if electrodes.is_empty() {
        return Err(Error::validation("empty electrode subset"));
    }
    let (lo, hi) = band;
    let last_freq = *psd.freqs.last().unwrap_or(&0.0);
    if !(0.0 <= lo && lo <= hi && hi <= last_freq) {
        return Err(Error::validation(format!(
            "band ({lo}, {hi}) outside the PSD grid [0, {last_freq}]"
        )));
    }
    let eps = 1e-9;
    let bins: Vec<usize> = psd
        .freqs
        .iter()
        .enumerate()
        .filter(|(_, f)| **f >= lo - eps && **f <= hi + eps)
        .map(|(k, _)| k)
        .collect();
    if bins.is_empty() {
        return Err(Error::validation(format!("band ({lo}, {hi}) contains no PSD bins")));
    }

    // Resolve to rows, ordered by layout position.
    let mut selected: Vec<(usize, String)> = Vec::with_capacity(electrodes.len());
    for name in electrodes {
        let idx = layout.signal_index(name).ok_or_else(|| {
            Error::validation(format!("electrode '{name}' is not a signal channel of the layout"))
        })?;
        if idx >= psd.n_channels() {
            return Err(Error::validation(format!(
                "electrode '{name}' (row {idx}) outside the {}-channel PSD",
                psd.n_channels()
            )));
        }
        if selected.iter().any(|(i, _)| *i == idx) {
            return Err(Error::validation(format!("duplicate electrode '{name}'")));
        }
        selected.push((idx, name.clone()));
    }
    selected.sort_by_key(|(i, _)| *i);

    let mut values = Vec::with_capacity(selected.len() * bins.len());
    for (idx, _) in &selected {
        for &k in &bins {
            values.push(psd.power[[*idx, k]]);
        }
    }
    Ok(FeatureVector {
        values,
        label,
        electrodes_used: selected.into_iter().map(|(_, n)| n).collect(),
    })
}

/// A labeled feature set with uniform electrode ordering.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: Vec<FeatureVector>,
    pub band: (f64, f64),
    pub bin_width: f64,
    /// Canonical label -> index map over the labels present.
    pub class_index: std::collections::BTreeMap<TaskClass, usize>,
}

impl Dataset {
    pub fn new(features: Vec<FeatureVector>, band: (f64, f64), bin_width: f64) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::validation("empty dataset"));
        }
        let first = &features[0];
        for fv in &features {
            if fv.values.len() != first.values.len() {
                return Err(Error::validation("feature vectors have differing lengths"));
            }
            if fv.electrodes_used != first.electrodes_used {
                return Err(Error::validation("feature vectors have differing electrode sets"));
            }
            if fv.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::validation("non-finite feature value"));
            }
        }
        let mut labels: Vec<TaskClass> = features.iter().map(|f| f.label).collect();
        labels.sort();
        labels.dedup();
        let class_index = labels.into_iter().zip(0..).collect();
        Ok(Dataset {
            features,
            band,
            bin_width,
            class_index,
        })
    }

    pub fn n_examples(&self) -> usize {
        self.features.len()
    }

    pub fn n_features(&self) -> usize {
        self.features[0].values.len()
    }

    pub fn electrodes(&self) -> &[String] {
        &self.features[0].electrodes_used
    }

    pub fn bins_per_electrode(&self) -> usize {
        self.n_features() / self.electrodes().len()
    }

    pub fn classes(&self) -> Vec<TaskClass> {
        self.class_index.keys().copied().collect()
    }

    /// Restricts every feature vector to a subset of electrodes (which must
    /// appear in this dataset), preserving layout order.
    pub fn restrict_to_electrodes(&self, subset: &[String]) -> Result<Dataset> {
        if subset.is_empty() {
            return Err(Error::validation("empty electrode subset"));
        }
        let bins = self.bins_per_electrode();
        let current = self.electrodes();
        let mut positions: Vec<usize> = Vec::with_capacity(subset.len());
        for name in subset {
            let pos = current.iter().position(|e| e == name).ok_or_else(|| {
                Error::validation(format!("electrode '{name}' not present in dataset"))
            })?;
            positions.push(pos);
        }
        positions.sort_unstable();
        positions.dedup();

        let names: Vec<String> = positions.iter().map(|&p| current[p].clone()).collect();
        let features = self
            .features
            .iter()
            .map(|fv| {
                let mut values = Vec::with_capacity(positions.len() * bins);
                for &p in &positions {
                    values.extend_from_slice(&fv.values[p * bins..(p + 1) * bins]);
                }
                FeatureVector {
                    values,
                    label: fv.label,
                    electrodes_used: names.clone(),
                }
            })
            .collect();
        Dataset::new(features, self.band, self.bin_width)
    }
}

/// Arithmetic mean PSD across all trials of `class` for one channel row.
/// Returns `(freqs, mean_power)`.
pub fn average_psd_by_class(
    trials: &[(TaskClass, PsdEstimate)],
    class: TaskClass,
    channel: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut freqs: Option<Vec<f64>> = None;
    let mut sum: Vec<f64> = Vec::new();
    let mut count = 0usize;
    for (label, psd) in trials {
        if *label != class {
            continue;
        }
        if channel >= psd.n_channels() {
            return Err(Error::validation(format!(
                "channel {channel} outside the {}-channel PSD",
                psd.n_channels()
            )));
        }
        match &freqs {
            None => {
                freqs = Some(psd.freqs.clone());
                sum = psd.power.row(channel).to_vec();
            }
            Some(f) => {
                if *f != psd.freqs {
                    return Err(Error::validation("PSD frequency grids differ across trials"));
                }
                for (acc, v) in sum.iter_mut().zip(psd.power.row(channel)) {
                    *acc += v;
                }
            }
        }
        count += 1;
    }
    let freqs = freqs.ok_or_else(|| {
        Error::validation(format!("no trials of class {class} to average"))
    })?;
    let mean = sum.into_iter().map(|v| v / count as f64).collect();
    Ok((freqs, mean))
}
