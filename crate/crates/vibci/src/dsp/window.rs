//! Trial window extraction.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::signal::{ProtocolSpec, Recording, TrialDescriptor};

/// Extracts the protocol's analysis window from one trial: samples
/// `[start_sample + start_s * rate, start_sample + end_s * rate)` for every
/// channel. At 256 Hz and a 4 s window this is 1024 samples.
pub fn extract_window(
    recording: &Recording,
    trial: &TrialDescriptor,
    protocol: &ProtocolSpec,
) -> Result<Array2<f64>> {
    let rate = recording.rate;
    let (start_s, end_s) = protocol.window;
    let offset_start = (start_s * rate).round() as usize;
    let offset_end = (end_s * rate).round() as usize;

    if offset_end > trial.duration_samples {
        return Err(Error::validation(format!(
            "window end {end_s} s ({} samples) exceeds trial duration of {} samples",
            offset_end, trial.duration_samples
        )));
    }
    let abs_start = trial.start_sample + offset_start;
    let abs_end = trial.start_sample + offset_end;
    if abs_end > recording.n_samples() {
        return Err(Error::validation(format!(
            "window [{abs_start}, {abs_end}) exceeds recording length {}",
            recording.n_samples()
        )));
    }
    Ok(recording
        .data
        .slice(ndarray::s![.., abs_start..abs_end])
        .to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{ChannelLayout, ProtocolId, TaskClass};
    use ndarray::Array2;

    fn recording(n_samples: usize) -> Recording {
        let layout = ChannelLayout::standard();
        let data = Array2::from_shape_fn((15, n_samples), |(c, i)| (c * n_samples + i) as f64);
        Recording::new(256.0, data, layout, "t").unwrap()
    }

    fn trial(start: usize, duration: usize, protocol: ProtocolId) -> TrialDescriptor {
        TrialDescriptor {
            index: 0,
            label: TaskClass::rest(),
            start_sample: start,
            duration_samples: duration,
            protocol,
        }
    }

    #[test]
    fn p1a_window_is_samples_512_to_1536() {
        let rec = recording(1536);
        let spec = ProtocolSpec::builtin(ProtocolId::P1a).unwrap();
        let t = trial(0, 1536, ProtocolId::P1a);
        let w = extract_window(&rec, &t, &spec).unwrap();
        assert_eq!(w.dim(), (15, 1024));
        assert_eq!(w[[0, 0]], 512.0);
        assert_eq!(w[[0, 1023]], 1535.0);
    }

    #[test]
    fn p3a_window_is_samples_768_to_1792() {
        let rec = recording(2304);
        let spec = ProtocolSpec::builtin(ProtocolId::P3a).unwrap();
        let t = trial(0, 2304, ProtocolId::P3a);
        let w = extract_window(&rec, &t, &spec).unwrap();
        assert_eq!(w.dim(), (15, 1024));
        assert_eq!(w[[0, 0]], 768.0);
        assert_eq!(w[[0, 1023]], 1791.0);
    }

    #[test]
    fn short_trial_is_rejected() {
        let rec = recording(2000);
        let spec = ProtocolSpec::builtin(ProtocolId::P1a).unwrap();
        // 5 s trial cannot hold a window ending at 6 s.
        let t = trial(0, 5 * 256, ProtocolId::P1a);
        assert!(extract_window(&rec, &t, &spec).is_err());
    }

    #[test]
    fn window_beyond_recording_is_rejected() {
        let rec = recording(1000);
        let spec = ProtocolSpec::builtin(ProtocolId::P1a).unwrap();
        let t = trial(0, 1536, ProtocolId::P1a);
        assert!(extract_window(&rec, &t, &spec).is_err());
    }
}
