//! Synthetic EEG generation: pink/white/line noise plus frequency-tagged
//! sinusoidal responses with per-electrode spatial gains. Serves as the
//! controllable verification source for the whole pipeline; generated
//! sessions are indistinguishable in format from ingested recordings.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256StarStar;
use rustfft::{num_complex::Complex64, FftPlanner};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded_rng, stream_rng, SeedStream};
use crate::signal::{ChannelLayout, Recording, SessionPlan, TaskKind};

/// Background noise parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Pink spectrum exponent: power density proportional to `1/f^beta`.
    pub pink_exponent: f64,
    /// Pink component standard deviation, microvolts.
    pub pink_sigma_uv: f64,
    /// White floor standard deviation, microvolts.
    pub white_sigma_uv: f64,
    pub line_freq_hz: f64,
    pub line_amplitude_uv: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            pink_exponent: 1.0,
            pink_sigma_uv: 1.0,
            white_sigma_uv: 0.2,
            line_freq_hz: 50.0,
            line_amplitude_uv: 2.0,
        }
    }
}

/// Frequency-tagged response parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ResponseConfig {
    /// Fundamental amplitude at unit spatial gain, microvolts.
    pub fundamental_uv: f64,
    /// Harmonic amplitudes relative to the fundamental; entry `j` drives
    /// frequency `(j + 2) * f`.
    pub harmonics: Vec<f64>,
}

impl Default for ResponseConfig {
    fn default() -> Self {
        ResponseConfig {
            fundamental_uv: 2.0,
            harmonics: vec![0.5],
        }
    }
}

/// Per-electrode response multipliers per task kind.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SpatialGain {
    pub ssvep: f64,
    pub vi: f64,
}

impl Default for SpatialGain {
    fn default() -> Self {
        SpatialGain { ssvep: 1.0, vi: 1.0 }
    }
}

/// Full generator configuration.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub rate: f64,
    pub noise: NoiseConfig,
    pub response: ResponseConfig,
    /// Gains keyed by electrode name; must cover every signal electrode of
    /// the layout being generated.
    pub spatial_gains: BTreeMap<String, SpatialGain>,
    /// Scale applied to VI responses relative to SSVEP, in (0, 1].
    pub vi_attenuation: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            rate: 256.0,
            noise: NoiseConfig::default(),
            response: ResponseConfig::default(),
            spatial_gains: default_spatial_gains(),
            vi_attenuation: 0.3,
            seed: 0,
        }
    }
}

/// Default scalp topography: strongest over occipital sites, fading toward
/// parietal, frontal, and temporal electrodes.
pub fn default_spatial_gains() -> BTreeMap<String, SpatialGain> {
    let mut gains = BTreeMap::new();
    let mut set = |names: &[&str], g: f64| {
        for n in names {
            gains.insert(n.to_string(), SpatialGain { ssvep: g, vi: g });
        }
    };
    set(&["O1", "O2", "Oz"], 1.0);
    set(&["Pz", "P3", "P4", "P7", "P8"], 0.6);
    set(&["AF4", "F4", "F8", "Fz"], 0.5);
    set(&["Cz", "T7", "T8"], 0.3);
    gains
}

impl SynthConfig {
    pub fn validate(&self, layout: &ChannelLayout) -> Result<()> {
        if !(self.rate > 0.0) || !self.rate.is_finite() {
            return Err(Error::validation(format!("rate must be positive, got {}", self.rate)));
        }
        if !(0.5..=2.0).contains(&self.noise.pink_exponent) {
            return Err(Error::validation(format!(
                "pink exponent {} outside [0.5, 2]",
                self.noise.pink_exponent
            )));
        }
        for (name, v) in [
            ("pink_sigma_uv", self.noise.pink_sigma_uv),
            ("white_sigma_uv", self.noise.white_sigma_uv),
            ("line_amplitude_uv", self.noise.line_amplitude_uv),
            ("fundamental_uv", self.response.fundamental_uv),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::validation(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.response.harmonics.iter().any(|h| !(*h >= 0.0) || !h.is_finite()) {
            return Err(Error::validation("harmonic amplitudes must be >= 0"));
        }
        if !(self.vi_attenuation > 0.0 && self.vi_attenuation <= 1.0) {
            return Err(Error::validation(format!(
                "vi_attenuation {} outside (0, 1]",
                self.vi_attenuation
            )));
        }
        for name in layout.signal_names() {
            if !self.spatial_gains.contains_key(name) {
                return Err(Error::validation(format!(
                    "spatial_gains missing electrode '{name}'"
                )));
            }
        }
        Ok(())
    }
}

/// Pink noise by spectral shaping: a white complex spectrum scaled by
/// `k^(-beta/2)`, inverse-transformed, then rescaled to the exact target
/// standard deviation.
pub fn pink_noise(n: usize, beta: f64, sigma: f64, seed: u64) -> Result<Vec<f64>> {
    let mut rng = seeded_rng(seed);
    pink_noise_from_rng(n, beta, sigma, &mut rng)
}

fn pink_noise_from_rng(
    n: usize,
    beta: f64,
    sigma: f64,
    rng: &mut Xoshiro256StarStar,
) -> Result<Vec<f64>> {
    if n < 64 {
        return Err(Error::validation(format!("pink noise needs n >= 64, got {n}")));
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::validation(format!("pink exponent must be >= 0, got {beta}")));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::validation(format!("sigma must be >= 0, got {sigma}")));
    }

    let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
    let half = n / 2;
    for k in 1..half {
        let amp = (k as f64).powf(-beta / 2.0);
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        spectrum[k] = Complex64::new(re * amp, im * amp);
        spectrum[n - k] = spectrum[k].conj();
    }
    if n % 2 == 0 {
        let re: f64 = rng.sample(StandardNormal);
        spectrum[half] = Complex64::new(re * (half as f64).powf(-beta / 2.0), 0.0);
    }

    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n);
    ifft.process(&mut spectrum);
    let mut x: Vec<f64> = spectrum.iter().map(|c| c.re).collect();

    let mean = x.iter().sum::<f64>() / n as f64;
    let std = (x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt();
    if std > 0.0 {
        let scale = sigma / std;
        for v in &mut x {
            *v = (*v - mean) * scale;
        }
    } else {
        x.iter_mut().for_each(|v| *v = 0.0);
    }
    Ok(x)
}

/// Generates a full synthetic session for `plan`: per trial, pink + white +
/// line noise on every electrode, plus frequency-tagged sinusoids (with
/// harmonics and per-trial random phases) on non-rest trials, scaled by the
/// electrode's spatial gain and, for VI, the attenuation factor. Trials are
/// generated from per-trial derived seeds, so the output is a pure function
/// of `(plan, config)`.
pub fn generate_session(plan: &SessionPlan, config: &SynthConfig) -> Result<Recording> {
    let layout = ChannelLayout::standard();
    config.validate(&layout)?;
    if (config.rate - plan.rate).abs() > 1e-9 {
        return Err(Error::validation(format!(
            "config rate {} does not match plan rate {}",
            config.rate, plan.rate
        )));
    }

    let n_channels = layout.signal_count();
    let n_total = plan.total_samples();
    let mut data = Array2::zeros((n_channels, n_total));

    let mut session_rng = stream_rng(config.seed, SeedStream::Synth, 0);
    let line_phase: f64 = session_rng.gen::<f64>() * 2.0 * PI;

    let gains: Vec<SpatialGain> = layout
        .signal_names()
        .iter()
        .map(|n| config.spatial_gains[*n])
        .collect();

    for trial in &plan.trials {
        let trial_seed = derive_seed(config.seed, SeedStream::Trial, trial.index as u64);
        let n = trial.duration_samples;

        // Phases shared across electrodes: one per tone (fundamental first).
        let mut trial_rng = seeded_rng(trial_seed);
        let n_tones = 1 + config.response.harmonics.len();
        let phases: Vec<f64> = (0..n_tones).map(|_| trial_rng.gen::<f64>() * 2.0 * PI).collect();

        for ch in 0..n_channels {
            let mut ch_rng = seeded_rng(derive_seed(trial_seed, SeedStream::Synth, ch as u64));
            let pink = pink_noise_from_rng(
                n,
                config.noise.pink_exponent,
                config.noise.pink_sigma_uv,
                &mut ch_rng,
            )?;

            let kind_gain = |kind: TaskKind| -> f64 {
                match kind {
                    TaskKind::Ssvep => gains[ch].ssvep,
                    TaskKind::Vi => gains[ch].vi * config.vi_attenuation,
                    TaskKind::Rest => 0.0,
                }
            };
            let response_gain = kind_gain(trial.label.kind);
            let freq = trial.label.frequency().unwrap_or(0.0);

            for i in 0..n {
                let abs_idx = trial.start_sample + i;
                let t_abs = abs_idx as f64 / plan.rate;
                let t_local = i as f64 / plan.rate;

                let white: f64 = ch_rng.sample::<f64, _>(StandardNormal) * config.noise.white_sigma_uv;
                let line = config.noise.line_amplitude_uv
                    * (2.0 * PI * config.noise.line_freq_hz * t_abs + line_phase).sin();

                let mut v = pink[i] + white + line;
                if response_gain > 0.0 && freq > 0.0 {
                    let base = config.response.fundamental_uv * response_gain;
                    v += base * (2.0 * PI * freq * t_local + phases[0]).sin();
                    for (j, rel) in config.response.harmonics.iter().enumerate() {
                        let k = (j + 2) as f64;
                        v += base * rel * (2.0 * PI * k * freq * t_local + phases[j + 1]).sin();
                    }
                }
                data[[ch, abs_idx]] = v;
            }
        }
    }

    Recording::new(
        plan.rate,
        data,
        layout,
        format!("synthetic protocol={} seed={}", plan.protocol.id, config.seed),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{schedule_session, ProtocolId, ProtocolSpec};

    #[test]
    fn pink_noise_hits_exact_sigma() {
        let x = pink_noise(8192, 1.0, 2.0, 4).unwrap();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let std = (x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / x.len() as f64).sqrt();
        assert!((std - 2.0).abs() < 1e-9, "std {std}");
    }

    #[test]
    fn pink_noise_slope_is_minus_beta() {
        // Average log-log PSD over 50 seeds; least-squares slope in [1, 30] Hz
        // at an implied 256 Hz rate.
        let n = 8192;
        let rate = 256.0;
        let mut mean_psd = vec![0.0; n / 2 + 1];
        let seeds = 50;
        for seed in 0..seeds {
            let x = pink_noise(n, 1.0, 1.0, seed).unwrap();
            let m = ndarray::Array2::from_shape_vec((1, n), x).unwrap();
            let psd = crate::spectral::welch_psd(m.view(), rate, 2048, 0.5).unwrap();
            for (acc, v) in mean_psd.iter_mut().zip(psd.power.row(0)) {
                *acc += v / seeds as f64;
            }
        }
        let df = rate / 2048.0;
        let pts: Vec<(f64, f64)> = mean_psd
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 * df, *p))
            .filter(|(f, _)| *f >= 1.0 && *f <= 30.0)
            .map(|(f, p)| (f.ln(), p.ln()))
            .collect();
        let n_pts = pts.len() as f64;
        let sx: f64 = pts.iter().map(|(x, _)| x).sum();
        let sy: f64 = pts.iter().map(|(_, y)| y).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
        let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
        let slope = (n_pts * sxy - sx * sy) / (n_pts * sxx - sx * sx);
        assert!(
            (slope - (-1.0)).abs() < 0.15,
            "log-log slope {slope}, expected -1.0 +/- 0.15"
        );
    }

    #[test]
    fn flat_spectrum_at_beta_zero() {
        // Octave-band mean powers should stay within 25% of the global mean.
        let n = 8192;
        let rate = 256.0;
        let mut mean_psd = vec![0.0; 1025];
        let seeds = 50;
        for seed in 0..seeds {
            let x = pink_noise(n, 0.0, 1.0, 100 + seed).unwrap();
            let m = ndarray::Array2::from_shape_vec((1, n), x).unwrap();
            let psd = crate::spectral::welch_psd(m.view(), rate, 2048, 0.5).unwrap();
            for (acc, v) in mean_psd.iter_mut().zip(psd.power.row(0)) {
                *acc += v / seeds as f64;
            }
        }
        let df = rate / 2048.0;
        let band_mean = |lo: f64, hi: f64| -> f64 {
            let vals: Vec<f64> = mean_psd
                .iter()
                .enumerate()
                .map(|(k, p)| (k as f64 * df, *p))
                .filter(|(f, _)| *f >= lo && *f < hi)
                .map(|(_, p)| p)
                .collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        let octaves = [(2.0, 4.0), (4.0, 8.0), (8.0, 16.0), (16.0, 32.0), (32.0, 64.0)];
        let global: f64 = octaves.iter().map(|(lo, hi)| band_mean(*lo, *hi)).sum::<f64>() / 5.0;
        for (lo, hi) in octaves {
            let m = band_mean(lo, hi);
            assert!(
                (m - global).abs() / global < 0.25,
                "octave [{lo}, {hi}): {m} vs global {global}"
            );
        }
    }

    #[test]
    fn pink_noise_rejects_short_lengths() {
        assert!(pink_noise(63, 1.0, 1.0, 0).is_err());
        assert!(pink_noise(64, 1.0, 1.0, 0).is_ok());
    }

    fn p3a_plan(seed: u64) -> SessionPlan {
        let spec = ProtocolSpec::builtin(ProtocolId::P3a).unwrap();
        schedule_session(&spec, 256.0, seed).unwrap()
    }

    #[test]
    fn generation_is_deterministic() {
        let plan = p3a_plan(1);
        let config = SynthConfig::default();
        let a = generate_session(&plan, &config).unwrap();
        let b = generate_session(&plan, &config).unwrap();
        assert_eq!(a.data, b.data);

        let other = SynthConfig { seed: 1, ..SynthConfig::default() };
        let c = generate_session(&plan, &other).unwrap();
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn session_has_expected_shape() {
        let plan = p3a_plan(2);
        let rec = generate_session(&plan, &SynthConfig::default()).unwrap();
        assert_eq!(rec.n_channels(), 15);
        assert_eq!(rec.n_samples(), 60 * 2304);
        assert_eq!(rec.rate, 256.0);
    }

    #[test]
    fn mismatched_rates_are_rejected() {
        let plan = p3a_plan(3);
        let config = SynthConfig { rate: 512.0, ..SynthConfig::default() };
        assert!(generate_session(&plan, &config).is_err());
    }

    #[test]
    fn ssvep_trial_peaks_at_stimulus_frequency_on_o1() {
        use crate::dsp::{extract_window, preprocess};
        use crate::spectral::welch_psd;
        use crate::signal::TaskClass;

        let spec = ProtocolSpec::builtin(ProtocolId::P1a).unwrap();
        let plan = schedule_session(&spec, 256.0, 9).unwrap();
        let config = SynthConfig {
            noise: NoiseConfig { white_sigma_uv: 0.5, ..NoiseConfig::default() },
            ..SynthConfig::default()
        };
        let rec = generate_session(&plan, &config).unwrap();
        let filtered = preprocess(&rec).unwrap();

        let o1 = rec.layout.signal_index("O1").unwrap();
        let trial = plan
            .trials
            .iter()
            .find(|t| t.label == TaskClass::ssvep(5.0))
            .unwrap();
        let window = extract_window(&filtered, trial, &spec).unwrap();
        let psd = welch_psd(window.view(), 256.0, 512, 0.5).unwrap();

        // Arg-max within [3, 9] Hz must be the 5 Hz bin.
        let row = psd.power.row(o1);
        let peak = (6..=18).max_by(|a, b| row[*a].total_cmp(&row[*b])).unwrap();
        assert_eq!(psd.freqs[peak], 5.0);

        // Visible first harmonic: 10 Hz at least 6 dB above its neighbors.
        let h = psd.bin_of(10.0);
        let neighbors = 0.5 * (row[h - 2] + row[h + 2]);
        let ratio_db = 10.0 * (row[h] / neighbors).log10();
        assert!(ratio_db >= 6.0, "harmonic prominence {ratio_db} dB");
    }

    #[test]
    fn zero_gain_electrode_carries_no_response() {
        let plan = p3a_plan(5);
        let mut config = SynthConfig::default();
        config.response.fundamental_uv = 50.0;
        for (_, g) in config.spatial_gains.iter_mut() {
            *g = SpatialGain { ssvep: 0.0, vi: 0.0 };
        }
        let silent = generate_session(&plan, &config).unwrap();

        let zeroed = SynthConfig {
            response: ResponseConfig { fundamental_uv: 0.0, harmonics: vec![] },
            spatial_gains: config.spatial_gains.clone(),
            ..SynthConfig::default()
        };
        let reference = generate_session(&plan, &zeroed).unwrap();
        // With all gains zero the response term vanishes: both recordings
        // are pure noise from the same seeds.
        assert_eq!(silent.data, reference.data);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let layout = ChannelLayout::standard();
        let mut c = SynthConfig::default();
        c.vi_attenuation = 0.0;
        assert!(c.validate(&layout).is_err());
        let mut c = SynthConfig::default();
        c.noise.pink_exponent = 3.0;
        assert!(c.validate(&layout).is_err());
        let mut c = SynthConfig::default();
        c.spatial_gains.remove("O1");
        assert!(c.validate(&layout).is_err());
    }
}
