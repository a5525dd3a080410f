//! Shared domain types and timeline conventions.
//!
//! Every stream lives on the same time base: seconds from session start.
//! All types are validated on construction and immutable afterwards.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Seconds;

/// A sampled stream has a gap wherever consecutive samples are further apart
/// than this many nominal periods.
pub const GAP_FACTOR: f64 = 5.0;

/// Default workload classification rate.
pub const WORKLOAD_RATE_HZ: f64 = 10.0;

/// Point errors are stored with this extent.
pub const MIN_ERROR_SPAN_S: f64 = 0.1;

pub const PHASE_LABELS: [&str; 2] = ["PF", "FL"];

pub const IMU_CHANNELS: [&str; 9] = ["ax", "ay", "az", "gx", "gy", "gz", "mx", "my", "mz"];
pub const GAZE_CHANNELS: [&str; 6] = ["ox", "oy", "oz", "dx", "dy", "dz"];

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }
    };
}

string_id!(
    /// Unique within a dataset.
    SessionId
);
string_id!(SubjectId);
string_id!(
    /// Groups sessions performing the same task scenario.
    TrialId
);

/// Classified mental state. Ordinal: `Underload < Optimal < Overload`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MentalState {
    Underload,
    Optimal,
    Overload,
}

impl MentalState {
    pub const ALL: [MentalState; 3] = [
        MentalState::Underload,
        MentalState::Optimal,
        MentalState::Overload,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MentalState::Underload => "underload",
            MentalState::Optimal => "optimal",
            MentalState::Overload => "overload",
        }
    }

    /// Ordinal encoding centred on `Optimal`.
    pub fn ordinal(self) -> f64 {
        match self {
            MentalState::Underload => -1.0,
            MentalState::Optimal => 0.0,
            MentalState::Overload => 1.0,
        }
    }
}

impl FromStr for MentalState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "underload" => Ok(MentalState::Underload),
            "optimal" => Ok(MentalState::Optimal),
            "overload" => Ok(MentalState::Overload),
            other => Err(format!("unknown mental state `{other}`")),
        }
    }
}

impl fmt::Display for MentalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Workload facet classified independently at each timestep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkloadCategory {
    Perception,
    Attention,
    Memory,
}

impl WorkloadCategory {
    pub const ALL: [WorkloadCategory; 3] = [
        WorkloadCategory::Perception,
        WorkloadCategory::Attention,
        WorkloadCategory::Memory,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WorkloadCategory::Perception => "perception",
            WorkloadCategory::Attention => "attention",
            WorkloadCategory::Memory => "memory",
        }
    }

    /// Stream key used in quality reports, e.g. `workload.attention`.
    pub fn stream_key(self) -> &'static str {
        match self {
            WorkloadCategory::Perception => "workload.perception",
            WorkloadCategory::Attention => "workload.attention",
            WorkloadCategory::Memory => "workload.memory",
        }
    }
}

impl FromStr for WorkloadCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "perception" => Ok(WorkloadCategory::Perception),
            "attention" => Ok(WorkloadCategory::Attention),
            "memory" => Ok(WorkloadCategory::Memory),
            other => Err(format!("unknown workload category `{other}`")),
        }
    }
}

impl fmt::Display for WorkloadCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Machine-readable reason a stream or session bundle was rejected.
#[derive(Clone, Debug, PartialEq, Error, Serialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum ValidationError {
    #[error("session duration must be positive, got {duration_s}")]
    NonPositiveDuration { duration_s: f64 },
    #[error("non-finite value in {field}")]
    NonFinite { field: String },
    #[error("interval [{start_s}, {end_s}] must have start >= 0 and end > start")]
    BadInterval { start_s: f64, end_s: f64 },
    #[error("{kind} track is not sorted by start at index {index}")]
    UnsortedTrack { kind: TrackKind, index: usize },
    #[error("{kind} track intervals overlap at index {index}")]
    OverlappingIntervals { kind: TrackKind, index: usize },
    #[error("label `{label}` is not allowed on the {kind} track")]
    UnknownLabel { kind: TrackKind, label: String },
    #[error("{stream} timestamps not strictly increasing at index {index}")]
    NonIncreasingTime { stream: String, index: usize },
    #[error("confidence {confidence} outside [0, 1] at index {index}")]
    ConfidenceOutOfRange { index: usize, confidence: f64 },
    #[error("{stream} expects channels {expected:?}, got {actual:?}")]
    ChannelLayout {
        stream: String,
        expected: Vec<String>,
        actual: Vec<String>,
    },
    #[error("{stream} sample {index} has arity {actual}, expected {expected}")]
    ArityMismatch {
        stream: String,
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error("nominal rate must be positive, got {rate_hz}")]
    BadRate { rate_hz: f64 },
    #[error("{stream} extends to {t_s} s beyond the session duration {duration_s} s")]
    BeyondDuration {
        stream: String,
        t_s: f64,
        duration_s: f64,
    },
    #[error("session carries none of procedures, workload, imu, gaze")]
    NoStreams,
}

impl ValidationError {
    pub fn code(&self) -> &'static str {
        match self {
            ValidationError::NonPositiveDuration { .. } => "non_positive_duration",
            ValidationError::NonFinite { .. } => "non_finite",
            ValidationError::BadInterval { .. } => "bad_interval",
            ValidationError::UnsortedTrack { .. } => "unsorted_track",
            ValidationError::OverlappingIntervals { .. } => "overlapping_intervals",
            ValidationError::UnknownLabel { .. } => "unknown_label",
            ValidationError::NonIncreasingTime { .. } => "non_increasing_time",
            ValidationError::ConfidenceOutOfRange { .. } => "confidence_out_of_range",
            ValidationError::ChannelLayout { .. } => "channel_layout",
            ValidationError::ArityMismatch { .. } => "arity_mismatch",
            ValidationError::BadRate { .. } => "bad_rate",
            ValidationError::BeyondDuration { .. } => "beyond_duration",
            ValidationError::NoStreams => "no_streams",
        }
    }
}

/// Labeled half-open span `[start_s, end_s]` in session seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start_s: Seconds,
    pub end_s: Seconds,
    pub label: String,
}

impl Interval {
    pub fn new(start_s: Seconds, end_s: Seconds, label: impl Into<String>) -> Result<Self, ValidationError> {
        if !start_s.is_finite() || !end_s.is_finite() {
            return Err(ValidationError::NonFinite {
                field: "interval bound".into(),
            });
        }
        if start_s < 0.0 || end_s <= start_s {
            return Err(ValidationError::BadInterval { start_s, end_s });
        }
        Ok(Interval {
            start_s,
            end_s,
            label: label.into(),
        })
    }

    pub fn duration(&self) -> Seconds {
        self.end_s - self.start_s
    }

    /// Length of the intersection with `[t0, t1]`.
    pub fn overlap(&self, t0: Seconds, t1: Seconds) -> Seconds {
        (self.end_s.min(t1) - self.start_s.max(t0)).max(0.0)
    }
}

/// Intersection of `iv` with the window `[t0, t1]`, keeping the label.
/// Touching endpoints produce `None`.
pub fn clip_interval(iv: &Interval, t0: Seconds, t1: Seconds) -> Option<Interval> {
    let start_s = iv.start_s.max(t0);
    let end_s = iv.end_s.min(t1);
    (end_s > start_s).then(|| Interval {
        start_s,
        end_s,
        label: iv.label.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackKind {
    Procedure,
    Error,
    Phase,
}

impl fmt::Display for TrackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrackKind::Procedure => "procedure",
            TrackKind::Error => "error",
            TrackKind::Phase => "phase",
        })
    }
}

/// Sorted, non-overlapping intervals of one kind. Touching endpoints are allowed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalTrack {
    kind: TrackKind,
    intervals: Vec<Interval>,
}

impl IntervalTrack {
    pub fn new(kind: TrackKind, intervals: Vec<Interval>) -> Result<Self, ValidationError> {
        for (index, iv) in intervals.iter().enumerate() {
            Interval::new(iv.start_s, iv.end_s, "")?;
            if kind == TrackKind::Phase && !PHASE_LABELS.contains(&iv.label.as_str()) {
                return Err(ValidationError::UnknownLabel {
                    kind,
                    label: iv.label.clone(),
                });
            }
            if index > 0 {
                let prev = &intervals[index - 1];
                if iv.start_s < prev.start_s {
                    return Err(ValidationError::UnsortedTrack { kind, index });
                }
                if iv.start_s < prev.end_s {
                    return Err(ValidationError::OverlappingIntervals { kind, index });
                }
            }
        }
        Ok(IntervalTrack { kind, intervals })
    }

    pub fn empty(kind: TrackKind) -> Self {
        IntervalTrack {
            kind,
            intervals: Vec::new(),
        }
    }

    pub fn kind(&self) -> TrackKind {
        self.kind
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Distinct labels in sorted order.
    pub fn labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.intervals.iter().map(|iv| iv.label.clone()).collect();
        labels.sort();
        labels.dedup();
        labels
    }

    pub fn covered_duration(&self) -> Seconds {
        self.intervals.iter().map(Interval::duration).sum()
    }

    /// Seconds of this track inside `[t0, t1]`.
    pub fn overlap(&self, t0: Seconds, t1: Seconds) -> Seconds {
        self.intervals.iter().map(|iv| iv.overlap(t0, t1)).sum()
    }

    pub fn clip(&self, t0: Seconds, t1: Seconds) -> IntervalTrack {
        IntervalTrack {
            kind: self.kind,
            intervals: self
                .intervals
                .iter()
                .filter_map(|iv| clip_interval(iv, t0, t1))
                .collect(),
        }
    }

    pub fn end(&self) -> Seconds {
        self.intervals.last().map_or(0.0, |iv| iv.end_s)
    }
}

/// Sum of interval lengths carrying `label`; zero when the label is absent.
pub fn total_label_duration(track: &IntervalTrack, label: &str) -> Seconds {
    track
        .intervals
        .iter()
        .filter(|iv| iv.label == label)
        .map(Interval::duration)
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSample {
    pub t_s: Seconds,
    pub state: MentalState,
    pub confidence: f64,
}

/// Maximal span of constant state within a sampled (non-gap) region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRun {
    pub start_s: Seconds,
    pub end_s: Seconds,
    pub state: MentalState,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorkloadSeries {
    category: WorkloadCategory,
    samples: Vec<WorkloadSample>,
    nominal_rate_hz: f64,
}

impl WorkloadSeries {
    pub fn new(
        category: WorkloadCategory,
        samples: Vec<WorkloadSample>,
        nominal_rate_hz: f64,
    ) -> Result<Self, ValidationError> {
        if !(nominal_rate_hz.is_finite() && nominal_rate_hz > 0.0) {
            return Err(ValidationError::BadRate {
                rate_hz: nominal_rate_hz,
            });
        }
        for (index, s) in samples.iter().enumerate() {
            if !s.t_s.is_finite() || !s.confidence.is_finite() {
                return Err(ValidationError::NonFinite {
                    field: category.stream_key().into(),
                });
            }
            if !(0.0..=1.0).contains(&s.confidence) {
                return Err(ValidationError::ConfidenceOutOfRange {
                    index,
                    confidence: s.confidence,
                });
            }
            if index > 0 && s.t_s <= samples[index - 1].t_s {
                return Err(ValidationError::NonIncreasingTime {
                    stream: category.stream_key().into(),
                    index,
                });
            }
        }
        Ok(WorkloadSeries {
            category,
            samples,
            nominal_rate_hz,
        })
    }

    pub fn category(&self) -> WorkloadCategory {
        self.category
    }

    pub fn samples(&self) -> &[WorkloadSample] {
        &self.samples
    }

    pub fn nominal_rate_hz(&self) -> f64 {
        self.nominal_rate_hz
    }

    pub fn period(&self) -> Seconds {
        1.0 / self.nominal_rate_hz
    }

    pub fn times(&self) -> Vec<Seconds> {
        self.samples.iter().map(|s| s.t_s).collect()
    }

    /// How long sample `i` holds its state: up to the next sample, or one
    /// nominal period when it is the last sample or the next one lies past a gap.
    pub fn dwell(&self, i: usize) -> Seconds {
        let period = self.period();
        match self.samples.get(i + 1) {
            Some(next) => {
                let dt = next.t_s - self.samples[i].t_s;
                if dt > GAP_FACTOR * period {
                    period
                } else {
                    dt
                }
            }
            None => period,
        }
    }

    /// Run-length encoding into maximal constant-state runs, clamped to
    /// `[0, duration_s]`. Gaps are left as holes between runs.
    pub fn runs(&self, duration_s: Seconds) -> Vec<StateRun> {
        let mut runs: Vec<StateRun> = Vec::new();
        let mut open: Option<StateRun> = None;
        for (i, s) in self.samples.iter().enumerate() {
            let end = (s.t_s + self.dwell(i)).min(duration_s);
            match open.as_mut() {
                Some(run) if run.state == s.state && (run.end_s - s.t_s).abs() < 1e-9 => {
                    run.end_s = end;
                }
                _ => {
                    if let Some(run) = open.take() {
                        runs.push(run);
                    }
                    open = Some(StateRun {
                        start_s: s.t_s,
                        end_s: end,
                        state: s.state,
                    });
                }
            }
        }
        runs.extend(open);
        runs.retain(|r| r.end_s > r.start_s);
        runs
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorKind {
    Imu,
    Gaze,
}

impl SensorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SensorKind::Imu => "imu",
            SensorKind::Gaze => "gaze",
        }
    }

    pub fn channel_names(self) -> &'static [&'static str] {
        match self {
            SensorKind::Imu => &IMU_CHANNELS,
            SensorKind::Gaze => &GAZE_CHANNELS,
        }
    }
}

impl FromStr for SensorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "imu" => Ok(SensorKind::Imu),
            "gaze" => Ok(SensorKind::Gaze),
            other => Err(format!("unknown sensor stream `{other}`")),
        }
    }
}

/// Timestamped fixed-arity sensor samples, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensorSeries {
    kind: SensorKind,
    channel_names: Vec<String>,
    times: Vec<Seconds>,
    values: Vec<f64>,
}

impl SensorSeries {
    /// `rows[i]` holds the values of sample `i`, in `kind`'s channel order.
    pub fn new(kind: SensorKind, times: Vec<Seconds>, rows: Vec<Vec<f64>>) -> Result<Self, ValidationError> {
        let arity = kind.channel_names().len();
        let stream = kind.as_str().to_string();
        if times.len() != rows.len() {
            return Err(ValidationError::ArityMismatch {
                stream,
                index: times.len().min(rows.len()),
                expected: times.len(),
                actual: rows.len(),
            });
        }
        let mut values = Vec::with_capacity(rows.len() * arity);
        for (index, row) in rows.into_iter().enumerate() {
            if row.len() != arity {
                return Err(ValidationError::ArityMismatch {
                    stream,
                    index,
                    expected: arity,
                    actual: row.len(),
                });
            }
            values.extend(row);
        }
        Self::from_flat(kind, times, values)
    }

    pub fn from_flat(kind: SensorKind, times: Vec<Seconds>, values: Vec<f64>) -> Result<Self, ValidationError> {
        let arity = kind.channel_names().len();
        let stream = kind.as_str().to_string();
        if values.len() != times.len() * arity {
            return Err(ValidationError::ArityMismatch {
                stream,
                index: 0,
                expected: times.len() * arity,
                actual: values.len(),
            });
        }
        if times.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(ValidationError::NonFinite { field: stream });
        }
        if let Some(index) = (1..times.len()).find(|&i| times[i] <= times[i - 1]) {
            return Err(ValidationError::NonIncreasingTime { stream, index });
        }
        Ok(SensorSeries {
            kind,
            channel_names: kind.channel_names().iter().map(|s| s.to_string()).collect(),
            times,
            values,
        })
    }

    pub fn kind(&self) -> SensorKind {
        self.kind
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn arity(&self) -> usize {
        self.channel_names.len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[Seconds] {
        &self.times
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let a = self.arity();
        &self.values[i * a..(i + 1) * a]
    }

    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.channel_names.iter().position(|c| c == name)
    }

    pub fn channel(&self, idx: usize) -> impl Iterator<Item = f64> + '_ {
        let a = self.arity();
        self.values.iter().skip(idx).step_by(a).copied()
    }

    /// Median inter-sample spacing as a rate; `None` with fewer than two samples.
    pub fn estimated_rate_hz(&self) -> Option<f64> {
        let mut dts: Vec<f64> = self.times.windows(2).map(|w| w[1] - w[0]).collect();
        if dts.is_empty() {
            return None;
        }
        dts.sort_by(f64::total_cmp);
        let median = dts[dts.len() / 2];
        (median > 0.0).then(|| 1.0 / median)
    }
}

/// Egocentric video; video time = session time − `offset_s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VideoRef {
    pub file_path: String,
    pub offset_s: f64,
}

/// One recorded task run by one subject under one trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Session {
    id: SessionId,
    subject: SubjectId,
    trial: TrialId,
    duration_s: Seconds,
    procedures: Option<IntervalTrack>,
    errors: Option<IntervalTrack>,
    phases: Option<IntervalTrack>,
    workload: BTreeMap<WorkloadCategory, WorkloadSeries>,
    imu: Option<SensorSeries>,
    gaze: Option<SensorSeries>,
    video: Option<VideoRef>,
}

/// Collects optional streams before validation.
#[derive(Clone, Debug)]
pub struct SessionBuilder {
    inner: Session,
}

impl SessionBuilder {
    pub fn procedures(mut self, track: IntervalTrack) -> Self {
        self.inner.procedures = Some(track);
        self
    }

    pub fn errors(mut self, track: IntervalTrack) -> Self {
        self.inner.errors = Some(track);
        self
    }

    pub fn phases(mut self, track: IntervalTrack) -> Self {
        self.inner.phases = Some(track);
        self
    }

    pub fn workload(mut self, series: WorkloadSeries) -> Self {
        self.inner.workload.insert(series.category(), series);
        self
    }

    pub fn imu(mut self, series: SensorSeries) -> Self {
        self.inner.imu = Some(series);
        self
    }

    pub fn gaze(mut self, series: SensorSeries) -> Self {
        self.inner.gaze = Some(series);
        self
    }

    pub fn video(mut self, video: VideoRef) -> Self {
        self.inner.video = Some(video);
        self
    }

    pub fn build(self) -> Result<Session, ValidationError> {
        let s = self.inner;
        let d = s.duration_s;
        if !d.is_finite() || d <= 0.0 {
            return Err(ValidationError::NonPositiveDuration { duration_s: d });
        }
        let tracks = [
            ("procedures", &s.procedures, TrackKind::Procedure),
            ("errors", &s.errors, TrackKind::Error),
            ("phases", &s.phases, TrackKind::Phase),
        ];
        for (stream, track, kind) in tracks {
            if let Some(track) = track {
                if track.kind != kind {
                    return Err(ValidationError::UnknownLabel {
                        kind: track.kind,
                        label: stream.into(),
                    });
                }
                if track.end() > d {
                    return Err(ValidationError::BeyondDuration {
                        stream: stream.into(),
                        t_s: track.end(),
                        duration_s: d,
                    });
                }
            }
        }
        for series in s.workload.values() {
            if let Some(last) = series.samples.last() {
                if last.t_s > d {
                    return Err(ValidationError::BeyondDuration {
                        stream: series.category.stream_key().into(),
                        t_s: last.t_s,
                        duration_s: d,
                    });
                }
            }
        }
        for series in [&s.imu, &s.gaze].into_iter().flatten() {
            if let Some(&last) = series.times.last() {
                if last > d {
                    return Err(ValidationError::BeyondDuration {
                        stream: series.kind.as_str().into(),
                        t_s: last,
                        duration_s: d,
                    });
                }
            }
        }
        if s.procedures.is_none() && s.workload.is_empty() && s.imu.is_none() && s.gaze.is_none() {
            return Err(ValidationError::NoStreams);
        }
        if let Some(v) = &s.video {
            if !v.offset_s.is_finite() {
                return Err(ValidationError::NonFinite {
                    field: "video.offset_s".into(),
                });
            }
        }
        Ok(s)
    }
}

impl Session {
    pub fn builder(
        id: impl Into<SessionId>,
        subject: impl Into<SubjectId>,
        trial: impl Into<TrialId>,
        duration_s: Seconds,
    ) -> SessionBuilder {
        SessionBuilder {
            inner: Session {
                id: id.into(),
                subject: subject.into(),
                trial: trial.into(),
                duration_s,
                procedures: None,
                errors: None,
                phases: None,
                workload: BTreeMap::new(),
                imu: None,
                gaze: None,
                video: None,
            },
        }
    }

    pub fn id(&self) -> &SessionId {
        &self.id
    }

    pub fn subject(&self) -> &SubjectId {
        &self.subject
    }

    pub fn trial(&self) -> &TrialId {
        &self.trial
    }

    pub fn duration_s(&self) -> Seconds {
        self.duration_s
    }

    pub fn procedures(&self) -> Option<&IntervalTrack> {
        self.procedures.as_ref()
    }

    pub fn errors(&self) -> Option<&IntervalTrack> {
        self.errors.as_ref()
    }

    pub fn phases(&self) -> Option<&IntervalTrack> {
        self.phases.as_ref()
    }

    pub fn workload(&self, category: WorkloadCategory) -> Option<&WorkloadSeries> {
        self.workload.get(&category)
    }

    pub fn workload_all(&self) -> &BTreeMap<WorkloadCategory, WorkloadSeries> {
        &self.workload
    }

    pub fn sensor(&self, kind: SensorKind) -> Option<&SensorSeries> {
        match kind {
            SensorKind::Imu => self.imu.as_ref(),
            SensorKind::Gaze => self.gaze.as_ref(),
        }
    }

    pub fn imu(&self) -> Option<&SensorSeries> {
        self.imu.as_ref()
    }

    pub fn gaze(&self) -> Option<&SensorSeries> {
        self.gaze.as_ref()
    }

    pub fn video(&self) -> Option<&VideoRef> {
        self.video.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64, l: &str) -> Interval {
        Interval::new(a, b, l).unwrap()
    }

    #[test]
    fn clip_examples() {
        assert_eq!(clip_interval(&iv(15.0, 30.0, "c"), 10.0, 20.0), Some(iv(15.0, 20.0, "c")));
        assert_eq!(clip_interval(&iv(0.0, 5.0, "a"), 5.0, 9.0), None);
        assert_eq!(clip_interval(&iv(2.0, 8.0, "e"), 0.0, 100.0), Some(iv(2.0, 8.0, "e")));
    }

    #[test]
    fn label_duration_examples() {
        let track = IntervalTrack::new(
            TrackKind::Procedure,
            vec![iv(0.0, 10.0, "c"), iv(10.0, 20.0, "a"), iv(20.0, 30.0, "c")],
        )
        .unwrap();
        assert_eq!(total_label_duration(&track, "c"), 20.0);
        assert_eq!(total_label_duration(&IntervalTrack::empty(TrackKind::Procedure), "c"), 0.0);
        let f = IntervalTrack::new(TrackKind::Procedure, vec![iv(0.0, 4.0, "f")]).unwrap();
        assert_eq!(total_label_duration(&f, "q"), 0.0);
    }

    #[test]
    fn interval_rejects_degenerate() {
        assert_eq!(Interval::new(3.0, 3.0, "x").unwrap_err().code(), "bad_interval");
        assert_eq!(Interval::new(-1.0, 3.0, "x").unwrap_err().code(), "bad_interval");
    }

    #[test]
    fn track_rejects_overlap_and_disorder() {
        let err = IntervalTrack::new(TrackKind::Procedure, vec![iv(0.0, 10.0, "a"), iv(5.0, 12.0, "b")]).unwrap_err();
        assert_eq!(err.code(), "overlapping_intervals");
        let err = IntervalTrack::new(TrackKind::Procedure, vec![iv(5.0, 10.0, "a"), iv(0.0, 2.0, "b")]).unwrap_err();
        assert_eq!(err.code(), "unsorted_track");
        let err = IntervalTrack::new(TrackKind::Phase, vec![iv(0.0, 10.0, "XX")]).unwrap_err();
        assert_eq!(err.code(), "unknown_label");
    }

    #[test]
    fn workload_runs_extend_last_sample() {
        use MentalState::*;
        let samples = [Optimal, Optimal, Optimal, Underload, Underload]
            .iter()
            .enumerate()
            .map(|(i, &state)| WorkloadSample {
                t_s: i as f64 / 10.0,
                state,
                confidence: 0.9,
            })
            .collect();
        let series = WorkloadSeries::new(WorkloadCategory::Attention, samples, 10.0).unwrap();
        let runs = series.runs(100.0);
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].state, Optimal);
        assert!((runs[0].end_s - 0.3).abs() < 1e-12);
        assert!((runs[1].start_s - 0.3).abs() < 1e-12);
        assert!((runs[1].end_s - 0.5).abs() < 1e-12);
    }

    #[test]
    fn session_requires_a_stream() {
        let err = Session::builder("s", "p", "t", 10.0).build().unwrap_err();
        assert_eq!(err, ValidationError::NoStreams);
    }

    #[test]
    fn session_rejects_interval_past_duration() {
        let track = IntervalTrack::new(TrackKind::Procedure, vec![iv(0.0, 11.0, "a")]).unwrap();
        let err = Session::builder("s", "p", "t", 10.0).procedures(track).build().unwrap_err();
        assert_eq!(err.code(), "beyond_duration");
    }

    #[test]
    fn sensor_arity_checked() {
        let err = SensorSeries::new(SensorKind::Gaze, vec![0.0], vec![vec![1.0; 5]]).unwrap_err();
        assert_eq!(err.code(), "arity_mismatch");
    }
}
