//! Recording and session-manifest text formats.
//!
//! Both formats are line-oriented: a commented header of `# key = value`
//! pairs followed by comma-separated data rows. Floats are written with
//! Rust's shortest round-trip formatting, so save/load is lossless and
//! saving a loaded file reproduces it byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::signal::{
    ChannelLayout, ProtocolId, ProtocolSpec, Recording, SessionPlan, TaskClass, TrialDescriptor,
};

const RECORDING_HEADER: &str = "# vibci-recording v1";
const MANIFEST_HEADER: &str = "# vibci-manifest v1";

/// Serializes a recording: header (format version, rate, units, ground,
/// reference, channel names in layout order, provenance) then one
/// comma-separated row of microvolt samples per time step.
pub fn recording_to_string(recording: &Recording) -> String {
    let mut out = String::new();
    out.push_str(RECORDING_HEADER);
    out.push('\n');
    let _ = writeln!(out, "# rate_hz = {}", recording.rate);
    out.push_str("# units = uV\n");
    let _ = writeln!(out, "# ground = {}", recording.layout.ground_name());
    let _ = writeln!(out, "# reference = {}", recording.layout.reference_name());
    let _ = writeln!(out, "# channels = {}", recording.layout.signal_names().join(","));
    let _ = writeln!(
        out,
        "# provenance = {}",
        recording.provenance.replace('\n', " ")
    );
    for t in 0..recording.n_samples() {
        let row: Vec<String> = (0..recording.n_channels())
            .map(|c| recording.data[[c, t]].to_string())
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn save_recording(recording: &Recording, path: &Path) -> Result<()> {
    std::fs::write(path, recording_to_string(recording))?;
    Ok(())
}

/// Parses the recording format; errors carry the offending line number.
pub fn load_recording(path: &Path) -> Result<Recording> {
    let text = std::fs::read_to_string(path)?;
    parse_recording(&text, path)
}

fn parse_recording(text: &str, path: &Path) -> Result<Recording> {
    let mut lines = text.lines().enumerate().peekable();
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    if first.trim() != RECORDING_HEADER {
        return Err(Error::parse(
            path,
            1,
            format!("expected '{RECORDING_HEADER}', got '{}'", first.trim()),
        ));
    }

    let mut rate: Option<f64> = None;
    let mut channels: Option<Vec<String>> = None;
    let mut provenance = String::new();
    while let Some((_, line)) = lines.peek() {
        if !line.starts_with('#') {
            break;
        }
        let (ln, line) = lines.next().unwrap();
        let body = line.trim_start_matches('#').trim();
        let Some((key, value)) = body.split_once('=') else {
            return Err(Error::parse(path, ln + 1, format!("malformed header line '{line}'")));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "rate_hz" => {
                rate = Some(value.parse().map_err(|_| {
                    Error::parse(path, ln + 1, format!("bad rate '{value}'"))
                })?);
            }
            "channels" => {
                channels = Some(value.split(',').map(|s| s.trim().to_string()).collect());
            }
            "provenance" => provenance = value.to_string(),
            "units" => {
                if value != "uV" {
                    return Err(Error::parse(path, ln + 1, format!("unsupported units '{value}'")));
                }
            }
            "ground" | "reference" => {}
            other => {
                return Err(Error::parse(path, ln + 1, format!("unknown header key '{other}'")));
            }
        }
    }
    let rate = rate.ok_or_else(|| Error::parse(path, 1, "missing 'rate_hz' header"))?;
    let names = channels.ok_or_else(|| Error::parse(path, 1, "missing 'channels' header"))?;
    let layout = ChannelLayout::from_signal_names(&names)
        .map_err(|e| Error::parse(path, 1, e.to_string()))?;
    let n_channels = names.len();

    let mut samples: Vec<f64> = Vec::new();
    let mut n_rows = 0usize;
    for (ln, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut count = 0usize;
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::parse(path, ln + 1, format!("bad sample value '{field}'"))
            })?;
            if !v.is_finite() {
                return Err(Error::parse(path, ln + 1, format!("non-finite sample '{field}'")));
            }
            samples.push(v);
            count += 1;
        }
        if count != n_channels {
            return Err(Error::parse(
                path,
                ln + 1,
                format!("row has {count} columns but the header names {n_channels} channels"),
            ));
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Error::parse(path, 1, "no sample rows"));
    }

    // Rows are time steps; transpose into [channels x samples].
    let mut data = Array2::zeros((n_channels, n_rows));
    for (t, row) in samples.chunks(n_channels).enumerate() {
        for (c, v) in row.iter().enumerate() {
            data[[c, t]] = *v;
        }
    }
    Recording::new(rate, data, layout, provenance)
}

/// A scheduled session as stored on disk: identity, protocol, seeding, and
/// the per-trial table.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionManifest {
    pub session_id: String,
    pub protocol_id: ProtocolId,
    pub seed: u64,
    pub rate: f64,
    pub trial_duration_s: f64,
    pub window: (f64, f64),
    pub trials: Vec<TrialDescriptor>,
}

impl SessionManifest {
    pub fn from_plan(plan: &SessionPlan, session_id: impl Into<String>) -> Self {
        SessionManifest {
            session_id: session_id.into(),
            protocol_id: plan.protocol.id.clone(),
            seed: plan.seed,
            rate: plan.rate,
            trial_duration_s: plan.protocol.trial_duration_s,
            window: plan.protocol.window,
            trials: plan.trials.clone(),
        }
    }

    /// Rebuilds the protocol description: built-in ids use their canonical
    /// parameters; custom ids are reconstructed from the stored fields and
    /// the trial label multiset.
    pub fn protocol_spec(&self) -> Result<ProtocolSpec> {
        if self.protocol_id.is_builtin() {
            return ProtocolSpec::builtin(self.protocol_id.clone());
        }
        let mut classes: Vec<TaskClass> = self.trials.iter().map(|t| t.label).collect();
        classes.sort();
        classes.dedup();
        let per_class = self
            .trials
            .iter()
            .filter(|t| t.label == classes[0])
            .count();
        ProtocolSpec::custom(
            self.protocol_id.to_string(),
            self.trial_duration_s,
            per_class,
            classes,
            self.window,
        )
    }

    pub fn to_string_repr(&self) -> String {
        let mut out = String::new();
        out.push_str(MANIFEST_HEADER);
        out.push('\n');
        let _ = writeln!(out, "# session = {}", self.session_id);
        let _ = writeln!(out, "# protocol = {}", self.protocol_id);
        let _ = writeln!(out, "# seed = {}", self.seed);
        let _ = writeln!(out, "# rate_hz = {}", self.rate);
        let _ = writeln!(out, "# trial_duration_s = {}", self.trial_duration_s);
        let _ = writeln!(out, "# window = {},{}", self.window.0, self.window.1);
        out.push_str("index,label,start_sample,duration_samples\n");
        for t in &self.trials {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                t.index, t.label, t.start_sample, t.duration_samples
            );
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_string_repr())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<SessionManifest> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    fn parse(text: &str, path: &Path) -> Result<SessionManifest> {
        let mut lines = text.lines().enumerate().peekable();
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
        if first.trim() != MANIFEST_HEADER {
            return Err(Error::parse(
                path,
                1,
                format!("expected '{MANIFEST_HEADER}', got '{}'", first.trim()),
            ));
        }

        let mut session_id = None;
        let mut protocol_id = None;
        let mut seed = None;
        let mut rate = None;
        let mut trial_duration_s = None;
        let mut window = None;
        while let Some((_, line)) = lines.peek() {
            if !line.starts_with('#') {
                break;
            }
            let (ln, line) = lines.next().unwrap();
            let body = line.trim_start_matches('#').trim();
            let Some((key, value)) = body.split_once('=') else {
                return Err(Error::parse(path, ln + 1, format!("malformed header line '{line}'")));
            };
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::parse(path, ln + 1, format!("bad {what} '{value}'"));
            match key {
                "session" => session_id = Some(value.to_string()),
                "protocol" => protocol_id = Some(value.parse::<ProtocolId>()?),
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
                "rate_hz" => rate = Some(value.parse::<f64>().map_err(|_| bad("rate"))?),
                "trial_duration_s" => {
                    trial_duration_s = Some(value.parse::<f64>().map_err(|_| bad("duration"))?)
                }
                "window" => {
                    let (a, b) = value
                        .split_once(',')
                        .ok_or_else(|| bad("window"))?;
                    window = Some((
                        a.trim().parse::<f64>().map_err(|_| bad("window"))?,
                        b.trim().parse::<f64>().map_err(|_| bad("window"))?,
                    ));
                }
                other => {
                    return Err(Error::parse(path, ln + 1, format!("unknown header key '{other}'")));
                }
            }
        }
        let session_id = session_id.ok_or_else(|| Error::parse(path, 1, "missing 'session'"))?;
        let protocol_id = protocol_id.ok_or_else(|| Error::parse(path, 1, "missing 'protocol'"))?;
        let seed = seed.ok_or_else(|| Error::parse(path, 1, "missing 'seed'"))?;
        let rate = rate.ok_or_else(|| Error::parse(path, 1, "missing 'rate_hz'"))?;
        let trial_duration_s =
            trial_duration_s.ok_or_else(|| Error::parse(path, 1, "missing 'trial_duration_s'"))?;
        let window = window.ok_or_else(|| Error::parse(path, 1, "missing 'window'"))?;

        // Column header row.
        match lines.next() {
            Some((_, header)) if header.trim() == "index,label,start_sample,duration_samples" => {}
            Some((ln, other)) => {
                return Err(Error::parse(path, ln + 1, format!("bad column header '{other}'")));
            }
            None => return Err(Error::parse(path, 1, "missing trial table")),
        }

        let mut trials = Vec::new();
        for (ln, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::parse(
                    path,
                    ln + 1,
                    format!("expected 4 columns, got {}", fields.len()),
                ));
            }
            let bad = |what: &str, v: &str| Error::parse(path, ln + 1, format!("bad {what} '{v}'"));
            trials.push(TrialDescriptor {
                index: fields[0].parse().map_err(|_| bad("index", fields[0]))?,
                label: fields[1].parse()?,
                start_sample: fields[2].parse().map_err(|_| bad("start_sample", fields[2]))?,
                duration_samples: fields[3].parse().map_err(|_| bad("duration", fields[3]))?,
                protocol: protocol_id.clone(),
            });
        }
        if trials.is_empty() {
            return Err(Error::parse(path, 1, "manifest has no trials"));
        }

        Ok(SessionManifest {
            session_id,
            protocol_id,
            seed,
            rate,
            trial_duration_s,
            window,
            trials,
        })
    }
}
