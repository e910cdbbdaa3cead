//! Core domain types: channel layouts, recordings, task classes, protocol
//! definitions, and the seeded session scheduler.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::rng::{fisher_yates, stream_rng, SeedStream};

/// Role of an electrode within a montage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelRole {
    Signal,
    Ground,
    Reference,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub name: String,
    pub role: ChannelRole,
}

/// Ordered electrode montage. Exactly one ground and one reference; every
/// other channel carries signal. Rows of a [`Recording`] correspond to the
/// signal channels in layout order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelLayout {
    channels: Vec<Channel>,
}

/// The 15 default signal sites, in layout order.
pub const DEFAULT_SIGNAL_CHANNELS: [&str; 15] = [
    "AF4", "F4", "F8", "O1", "O2", "Pz", "P3", "P4", "Fz", "Cz", "Oz", "T7", "T8", "P7", "P8",
];

/// 10-20 labels accepted by the recording parser.
pub const KNOWN_1020_LABELS: [&str; 34] = [
    "Fp1", "Fp2", "Fpz", "AF3", "AF4", "AFz", "F7", "F3", "Fz", "F4", "F8", "FC5", "FC1", "FCz",
    "FC2", "FC6", "T7", "C3", "Cz", "C4", "T8", "CP5", "CP1", "CP2", "CP6", "P7", "P3", "Pz",
    "P4", "P8", "O1", "Oz", "O2", "POz",
];

impl ChannelLayout {
    /// Builds a layout from `(name, role)` pairs and checks its invariants.
    pub fn new(channels: Vec<Channel>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for ch in &channels {
            if !seen.insert(ch.name.as_str()) {
                return Err(Error::validation(format!(
                    "duplicate channel name '{}'",
                    ch.name
                )));
            }
        }
        let grounds = channels
            .iter()
            .filter(|c| c.role == ChannelRole::Ground)
            .count();
        let refs = channels
            .iter()
            .filter(|c| c.role == ChannelRole::Reference)
            .count();
        if grounds != 1 || refs != 1 {
            return Err(Error::validation(format!(
                "layout must contain exactly one ground and one reference (got {grounds} ground, {refs} reference)"
            )));
        }
        if channels.iter().all(|c| c.role != ChannelRole::Signal) {
            return Err(Error::validation("layout has no signal channels"));
        }
        Ok(ChannelLayout { channels })
    }

    /// The default 16-electrode montage: 15 signal sites plus AFz ground and
    /// FCz reference.
    pub fn standard() -> Self {
        let mut channels: Vec<Channel> = DEFAULT_SIGNAL_CHANNELS
            .iter()
            .map(|n| Channel {
                name: (*n).to_string(),
                role: ChannelRole::Signal,
            })
            .collect();
        channels.push(Channel {
            name: "AFz".to_string(),
            role: ChannelRole::Ground,
        });
        channels.push(Channel {
            name: "FCz".to_string(),
            role: ChannelRole::Reference,
        });
        ChannelLayout::new(channels).expect("standard layout is valid")
    }

    /// Builds a layout from signal channel names with the default ground and
    /// reference attached. Names must be known 10-20 labels.
    pub fn from_signal_names(names: &[String]) -> Result<Self> {
        let mut channels = Vec::with_capacity(names.len() + 2);
        for name in names {
            if !KNOWN_1020_LABELS.contains(&name.as_str()) {
                return Err(Error::validation(format!(
                    "unknown channel name '{name}' (not a recognized 10-20 label)"
                )));
            }
            channels.push(Channel {
                name: name.clone(),
                role: ChannelRole::Signal,
            });
        }
        channels.push(Channel {
            name: "AFz".to_string(),
            role: ChannelRole::Ground,
        });
        channels.push(Channel {
            name: "FCz".to_string(),
            role: ChannelRole::Reference,
        });
        ChannelLayout::new(channels)
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Signal channel names in layout order.
    pub fn signal_names(&self) -> Vec<&str> {
        self.channels
            .iter()
            .filter(|c| c.role == ChannelRole::Signal)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn signal_count(&self) -> usize {
        self.channels
            .iter()
            .filter(|c| c.role == ChannelRole::Signal)
            .count()
    }

    /// Row index of a signal channel in the recording matrix.
    pub fn signal_index(&self, name: &str) -> Option<usize> {
        self.channels
            .iter()
            .filter(|c| c.role == ChannelRole::Signal)
            .position(|c| c.name == name)
    }

    pub fn ground_name(&self) -> &str {
        &self
            .channels
            .iter()
            .find(|c| c.role == ChannelRole::Ground)
            .expect("layout invariant: one ground")
            .name
    }

    pub fn reference_name(&self) -> &str {
        &self
            .channels
            .iter()
            .find(|c| c.role == ChannelRole::Reference)
            .expect("layout invariant: one reference")
            .name
    }
}

/// Multichannel sampled EEG signal in microvolts.
#[derive(Debug, Clone)]
pub struct Recording {
    pub rate: f64,
    /// `[n_signal_channels x n_samples]`, microvolts.
    pub data: Array2<f64>,
    pub layout: ChannelLayout,
    /// Free-text source tag ("synthetic seed=7", file path, ...).
    pub provenance: String,
}

impl Recording {
    pub fn new(
        rate: f64,
        data: Array2<f64>,
        layout: ChannelLayout,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::validation(format!("rate must be positive, got {rate}")));
        }
        if data.ncols() == 0 {
            return Err(Error::validation("recording has no samples"));
        }
        if data.nrows() != layout.signal_count() {
            return Err(Error::validation(format!(
                "data has {} rows but layout has {} signal channels",
                data.nrows(),
                layout.signal_count()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("recording contains non-finite samples"));
        }
        Ok(Recording {
            rate,
            data,
            layout,
            provenance: provenance.into(),
        })
    }

    pub fn n_channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.data.ncols()
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples() as f64 / self.rate
    }
}

/// Kind of task performed in a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaskKind {
    Ssvep,
    Vi,
    Rest,
}

/// A trial label: task kind plus target frequency (absent for rest).
#[derive(Debug, Clone, Copy)]
pub struct TaskClass {
    pub kind: TaskKind,
    frequency: Option<f64>,
}

impl TaskClass {
    pub fn ssvep(frequency: f64) -> Self {
        assert!(frequency.is_finite() && frequency > 0.0);
        TaskClass {
            kind: TaskKind::Ssvep,
            frequency: Some(frequency),
        }
    }

    pub fn vi(frequency: f64) -> Self {
        assert!(frequency.is_finite() && frequency > 0.0);
        TaskClass {
            kind: TaskKind::Vi,
            frequency: Some(frequency),
        }
    }

    pub fn rest() -> Self {
        TaskClass {
            kind: TaskKind::Rest,
            frequency: None,
        }
    }

    /// Target frequency in Hz; `None` for rest.
    pub fn frequency(&self) -> Option<f64> {
        self.frequency
    }

    pub fn is_rest(&self) -> bool {
        self.kind == TaskKind::Rest
    }
}

impl PartialEq for TaskClass {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for TaskClass {}

/// Canonical ordering: SSVEP before VI before REST, lower frequency first.
impl Ord for TaskClass {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.kind.cmp(&other.kind).then_with(|| {
            let a = self.frequency.unwrap_or(0.0);
            let b = other.frequency.unwrap_or(0.0);
            a.total_cmp(&b)
        })
    }
}

impl PartialOrd for TaskClass {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl std::hash::Hash for TaskClass {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.kind.hash(state);
        self.frequency.map(f64::to_bits).hash(state);
    }
}

impl fmt::Display for TaskClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.frequency) {
            (TaskKind::Rest, _) => write!(f, "REST"),
            (TaskKind::Ssvep, Some(hz)) => write!(f, "SSVEP-{hz}"),
            (TaskKind::Vi, Some(hz)) => write!(f, "VI-{hz}"),
            _ => unreachable!("non-rest class always has a frequency"),
        }
    }
}

impl FromStr for TaskClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "REST" {
            return Ok(TaskClass::rest());
        }
        let (kind, rest) = if let Some(rest) = s.strip_prefix("SSVEP-") {
            (TaskKind::Ssvep, rest)
        } else if let Some(rest) = s.strip_prefix("VI-") {
            (TaskKind::Vi, rest)
        } else {
            return Err(Error::validation(format!("unknown task class '{s}'")));
        };
        let hz: f64 = rest
            .parse()
            .map_err(|_| Error::validation(format!("bad frequency in task class '{s}'")))?;
        if !hz.is_finite() || hz <= 0.0 {
            return Err(Error::validation(format!("bad frequency in task class '{s}'")));
        }
        Ok(match kind {
            TaskKind::Ssvep => TaskClass::ssvep(hz),
            TaskKind::Vi => TaskClass::vi(hz),
            TaskKind::Rest => unreachable!(),
        })
    }
}

impl serde::Serialize for TaskClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for TaskClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Identifier of a recording protocol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProtocolId {
    P1a,
    P1b,
    P1c,
    P1d,
    P2a,
    P3a,
    Custom(String),
}

impl ProtocolId {
    pub const BUILTIN: [ProtocolId; 6] = [
        ProtocolId::P1a,
        ProtocolId::P1b,
        ProtocolId::P1c,
        ProtocolId::P1d,
        ProtocolId::P2a,
        ProtocolId::P3a,
    ];

    pub fn is_builtin(&self) -> bool {
        !matches!(self, ProtocolId::Custom(_))
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolId::P1a => write!(f, "P1a"),
            ProtocolId::P1b => write!(f, "P1b"),
            ProtocolId::P1c => write!(f, "P1c"),
            ProtocolId::P1d => write!(f, "P1d"),
            ProtocolId::P2a => write!(f, "P2a"),
            ProtocolId::P3a => write!(f, "P3a"),
            ProtocolId::Custom(name) => write!(f, "{name}"),
        }
    }
}

impl FromStr for ProtocolId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "P1a" => ProtocolId::P1a,
            "P1b" => ProtocolId::P1b,
            "P1c" => ProtocolId::P1c,
            "P1d" => ProtocolId::P1d,
            "P2a" => ProtocolId::P2a,
            "P3a" => ProtocolId::P3a,
            "" => return Err(Error::validation("empty protocol id")),
            other => ProtocolId::Custom(other.to_string()),
        })
    }
}

impl serde::Serialize for ProtocolId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for ProtocolId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Class set of a built-in protocol, in canonical order.
pub fn class_set(id: &ProtocolId) -> Result<Vec<TaskClass>> {
    match id {
        ProtocolId::P1a | ProtocolId::P1c => Ok(vec![
            TaskClass::ssvep(5.0),
            TaskClass::vi(5.0),
            TaskClass::rest(),
        ]),
        ProtocolId::P1b | ProtocolId::P1d => Ok(vec![
            TaskClass::ssvep(7.0),
            TaskClass::vi(7.0),
            TaskClass::rest(),
        ]),
        ProtocolId::P2a => Ok(vec![
            TaskClass::ssvep(5.0),
            TaskClass::ssvep(7.0),
            TaskClass::vi(5.0),
            TaskClass::vi(7.0),
            TaskClass::rest(),
        ]),
        ProtocolId::P3a => Ok(vec![
            TaskClass::vi(5.0),
            TaskClass::vi(7.0),
            TaskClass::rest(),
        ]),
        ProtocolId::Custom(name) => Err(Error::validation(format!(
            "protocol '{name}' is not built-in; supply its classes explicitly"
        ))),
    }
}

/// Full description of one recording protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSpec {
    pub id: ProtocolId,
    pub trial_duration_s: f64,
    pub trials_per_class: usize,
    pub classes: Vec<TaskClass>,
    /// Analysis window `(start_s, end_s)` within each trial.
    pub window: (f64, f64),
    /// Auditory co-stimulus during VI trials.
    pub auditory_costimulus: bool,
}

impl ProtocolSpec {
    /// One of the six built-in protocols.
    pub fn builtin(id: ProtocolId) -> Result<Self> {
        let classes = class_set(&id)?;
        let (duration, per_class, window, auditory) = match id {
            ProtocolId::P1a | ProtocolId::P1b => (6.0, 15, (2.0, 6.0), true),
            ProtocolId::P1c | ProtocolId::P1d => (6.0, 15, (2.0, 6.0), false),
            ProtocolId::P2a => (6.0, 18, (2.0, 6.0), false),
            ProtocolId::P3a => (9.0, 20, (3.0, 7.0), false),
            ProtocolId::Custom(_) => unreachable!("class_set rejects custom ids"),
        };
        Ok(ProtocolSpec {
            id,
            trial_duration_s: duration,
            trials_per_class: per_class,
            classes,
            window,
            auditory_costimulus: auditory,
        })
    }

    pub fn custom(
        name: impl Into<String>,
        trial_duration_s: f64,
        trials_per_class: usize,
        classes: Vec<TaskClass>,
        window: (f64, f64),
    ) -> Result<Self> {
        let spec = ProtocolSpec {
            id: ProtocolId::Custom(name.into()),
            trial_duration_s,
            trials_per_class,
            classes,
            window,
            auditory_costimulus: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::validation("protocol has no classes"));
        }
        if self.trials_per_class == 0 {
            return Err(Error::validation("protocol has zero trials per class"));
        }
        if !(self.trial_duration_s > 0.0) {
            return Err(Error::validation("trial duration must be positive"));
        }
        let (start, end) = self.window;
        if !(0.0 <= start && start < end && end <= self.trial_duration_s) {
            return Err(Error::validation(format!(
                "window ({start}, {end}) must satisfy 0 <= start < end <= {}",
                self.trial_duration_s
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for class in &self.classes {
            if !seen.insert(*class) {
                return Err(Error::validation(format!("duplicate class {class}")));
            }
        }
        Ok(())
    }

    pub fn n_trials(&self) -> usize {
        self.trials_per_class * self.classes.len()
    }
}

/// One labeled trial interval within a session.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDescriptor {
    pub index: usize,
    pub label: TaskClass,
    pub start_sample: usize,
    pub duration_samples: usize,
    pub protocol: ProtocolId,
}

/// A scheduled session: randomized trial order plus the seed that produced it.
#[derive(Debug, Clone)]
pub struct SessionPlan {
    pub protocol: ProtocolSpec,
    pub rate: f64,
    pub seed: u64,
    pub trials: Vec<TrialDescriptor>,
}

impl SessionPlan {
    pub fn total_samples(&self) -> usize {
        self.trials
            .last()
            .map(|t| t.start_sample + t.duration_samples)
            .unwrap_or(0)
    }
}

/// Schedules a session: a uniformly random permutation of the label multiset
/// (each class exactly `trials_per_class` times), deterministic per seed.
/// Consecutive trials abut with no gap.
pub fn schedule_session(protocol: &ProtocolSpec, rate: f64, seed: u64) -> Result<SessionPlan> {
    protocol.validate()?;
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::validation(format!("rate must be positive, got {rate}")));
    }
    let duration_samples = (protocol.trial_duration_s * rate).round() as usize;
    if duration_samples == 0 {
        return Err(Error::validation("trial duration rounds to zero samples"));
    }

    let mut labels: Vec<TaskClass> = protocol
        .classes
        .iter()
        .flat_map(|c| std::iter::repeat(*c).take(protocol.trials_per_class))
        .collect();
    let mut rng = stream_rng(seed, SeedStream::Schedule, 0);
    fisher_yates(&mut labels, &mut rng);

    let trials = labels
        .into_iter()
        .enumerate()
        .map(|(index, label)| TrialDescriptor {
            index,
            label,
            start_sample: index * duration_samples,
            duration_samples,
            protocol: protocol.id.clone(),
        })
        .collect();

    Ok(SessionPlan {
        protocol: protocol.clone(),
        rate,
        seed,
        trials,
    })
}
