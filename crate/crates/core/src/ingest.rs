//! Session bundle parsing, validation and data-quality reporting.
//!
//! Layout of a dataset root:
//!
//! ```text
//! manifest.json              {"dataset_name", "procedure_labels", "sessions": [{"id", "dir"}]}
//! <dir>/session.json         {"subject", "trial", "duration_s", "video": {"file", "offset_s"} | null}
//! <dir>/procedures.csv       start_s,end_s,label
//! <dir>/errors.csv           start_s,end_s
//! <dir>/phases.csv           start_s,end_s,phase
//! <dir>/workload.csv         t_s,category,state,confidence
//! <dir>/imu.csv              t_s,ax,ay,az,gx,gy,gz,mx,my,mz
//! <dir>/gaze.csv             t_s,ox,oy,oz,dx,dy,dz
//! ```
//!
//! Stream files are optional. A stream file with any malformed row is
//! dropped (marked absent) with line-numbered diagnostics; a bundle that
//! fails session-level validation is skipped and reported, never fatal.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{
    Interval, IntervalTrack, MentalState, SensorKind, SensorSeries, Session, SessionId, TrackKind, VideoRef,
    WorkloadCategory, WorkloadSample, WorkloadSeries, GAP_FACTOR, MIN_ERROR_SPAN_S, WORKLOAD_RATE_HZ,
};
use crate::{Error, Result, Seconds};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SESSION_FILE: &str = "session.json";

/// Stream keys reported in [`QualityReport::stream_presence`], in display order.
pub const STREAM_KEYS: [&str; 9] = [
    "procedures",
    "errors",
    "phases",
    "workload.attention",
    "workload.perception",
    "workload.memory",
    "imu",
    "gaze",
    "video",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub dir: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub dataset_name: String,
    pub procedure_labels: Vec<String>,
    pub sessions: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn read(root: &Path) -> Result<Self> {
        let path = root.join(MANIFEST_FILE);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: DatasetManifest = serde_json::from_slice(&bytes).map_err(|e| Error::Manifest {
            path: path.clone(),
            message: e.to_string(),
        })?;
        manifest.validate().map_err(|message| Error::Manifest { path, message })?;
        Ok(manifest)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.procedure_labels.is_empty() {
            return Err("procedure_labels must not be empty".into());
        }
        let mut seen = HashSet::new();
        for entry in &self.sessions {
            if !seen.insert(entry.id.as_str()) {
                return Err(format!("duplicate session id `{}`", entry.id));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VideoFile {
    pub file: String,
    pub offset_s: f64,
}

/// Contents of `session.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub subject: String,
    pub trial: String,
    pub duration_s: f64,
    #[serde(default)]
    pub video: Option<VideoFile>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Presence {
    Present,
    Absent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub stream: String,
    pub start_s: Seconds,
    pub end_s: Seconds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum LoadStatus {
    Loaded,
    Rejected { code: String, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub session_id: SessionId,
    pub load: LoadStatus,
    pub stream_presence: BTreeMap<String, Presence>,
    pub gaps: Vec<Gap>,
    /// Fraction of the session covered by each sampled stream.
    pub coverage: BTreeMap<String, f64>,
    pub diagnostics: Vec<String>,
}

impl QualityReport {
    pub fn is_loaded(&self) -> bool {
        self.load == LoadStatus::Loaded
    }

    pub fn presence(&self, stream: &str) -> Presence {
        self.stream_presence.get(stream).copied().unwrap_or(Presence::Absent)
    }

    /// Loaded, no gaps and no diagnostics.
    pub fn is_clean(&self) -> bool {
        self.is_loaded() && self.gaps.is_empty() && self.diagnostics.is_empty()
    }

    pub fn gaps_for<'a>(&'a self, stream: &'a str) -> impl Iterator<Item = &'a Gap> + 'a {
        self.gaps.iter().filter(move |g| g.stream == stream)
    }
}

/// An immutable loaded dataset snapshot.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub root: PathBuf,
    pub procedure_labels: Vec<String>,
    pub sessions: Vec<Session>,
    pub reports: Vec<QualityReport>,
}

impl Dataset {
    pub fn session(&self, id: &str) -> Option<&Session> {
        self.sessions.iter().find(|s| s.id().as_str() == id)
    }

    pub fn report(&self, id: &str) -> Option<&QualityReport> {
        self.reports.iter().find(|r| r.session_id.as_str() == id)
    }
}

/// Gaps in a sampled stream.
///
/// A gap is any spacing longer than `GAP_FACTOR` nominal periods. Each sample
/// covers one period, so an interior gap runs from one period after the last
/// sample before it to the first sample after it. Leading and trailing gaps
/// use the same threshold against `0` and `duration_s`. An empty series is a
/// single gap over the whole session.
pub fn detect_gaps(times: &[Seconds], duration_s: Seconds, nominal_rate_hz: f64) -> Vec<(Seconds, Seconds)> {
    let (Some(&first), Some(&last)) = (times.first(), times.last()) else {
        return if duration_s > 0.0 { vec![(0.0, duration_s)] } else { Vec::new() };
    };
    let period = 1.0 / nominal_rate_hz;
    let threshold = GAP_FACTOR * period;
    let mut gaps = Vec::new();
    if first > threshold {
        gaps.push((0.0, first));
    }
    for w in times.windows(2) {
        if w[1] - w[0] > threshold {
            gaps.push((w[0] + period, w[1]));
        }
    }
    if duration_s - last > threshold {
        gaps.push((last + period, duration_s));
    }
    gaps
}

/// Loads every manifest entry. Only a missing or unparsable manifest is fatal.
pub fn load_dataset(root: impl AsRef<Path>) -> Result<Dataset> {
    let root = root.as_ref();
    let manifest = DatasetManifest::read(root)?;
    let loaded: Vec<(Option<Session>, QualityReport)> = manifest
        .sessions
        .par_iter()
        .map(|entry| load_bundle(root, entry, &manifest.procedure_labels))
        .collect();
    let mut sessions = Vec::new();
    let mut reports = Vec::new();
    for (session, report) in loaded {
        sessions.extend(session);
        reports.push(report);
    }
    Ok(Dataset {
        name: manifest.dataset_name,
        root: root.to_path_buf(),
        procedure_labels: manifest.procedure_labels,
        sessions,
        reports,
    })
}

#[derive(Default)]
struct Parsed {
    procedures: Option<IntervalTrack>,
    errors: Option<IntervalTrack>,
    phases: Option<IntervalTrack>,
    workload: Vec<WorkloadSeries>,
    imu: Option<SensorSeries>,
    gaze: Option<SensorSeries>,
    video: Option<VideoRef>,
    video_present: bool,
}

fn load_bundle(root: &Path, entry: &ManifestEntry, vocabulary: &[String]) -> (Option<Session>, QualityReport) {
    let dir = root.join(&entry.dir);
    let mut diagnostics = Vec::new();
    let mut report = QualityReport {
        session_id: SessionId(entry.id.clone()),
        load: LoadStatus::Loaded,
        stream_presence: STREAM_KEYS.iter().map(|k| (k.to_string(), Presence::Absent)).collect(),
        gaps: Vec::new(),
        coverage: BTreeMap::new(),
        diagnostics: Vec::new(),
    };

    let meta = match read_session_meta(&dir) {
        Ok(meta) => meta,
        Err(message) => {
            report.load = LoadStatus::Rejected {
                code: "bad_session_meta".into(),
                message,
            };
            return (None, report);
        }
    };

    let mut parsed = Parsed::default();
    let d = meta.duration_s;
    parsed.procedures = read_stream(&dir, "procedures.csv", &mut diagnostics, |rdr| {
        parse_procedures(rdr, vocabulary)
    });
    parsed.errors = read_stream(&dir, "errors.csv", &mut diagnostics, |rdr| parse_errors(rdr, d));
    parsed.phases = read_stream(&dir, "phases.csv", &mut diagnostics, parse_phases);
    parsed.workload = read_stream(&dir, "workload.csv", &mut diagnostics, parse_workload).unwrap_or_default();
    parsed.imu = read_stream(&dir, "imu.csv", &mut diagnostics, |rdr| parse_sensor(rdr, SensorKind::Imu));
    parsed.gaze = read_stream(&dir, "gaze.csv", &mut diagnostics, |rdr| parse_sensor(rdr, SensorKind::Gaze));
    if let Some(video) = &meta.video {
        let path = dir.join(&video.file);
        parsed.video_present = path.is_file();
        if !parsed.video_present {
            diagnostics.push(format!("video: referenced file {} not found", path.display()));
        }
        parsed.video = Some(VideoRef {
            file_path: path.to_string_lossy().into_owned(),
            offset_s: video.offset_s,
        });
    }

    let presence = |present: bool| if present { Presence::Present } else { Presence::Absent };
    let set = |report: &mut QualityReport, key: &str, present: bool| {
        report.stream_presence.insert(key.to_string(), presence(present));
    };
    set(&mut report, "procedures", parsed.procedures.is_some());
    set(&mut report, "errors", parsed.errors.is_some());
    set(&mut report, "phases", parsed.phases.is_some());
    for category in WorkloadCategory::ALL {
        let present = parsed.workload.iter().any(|w| w.category() == category);
        set(&mut report, category.stream_key(), present);
    }
    set(&mut report, "imu", parsed.imu.is_some());
    set(&mut report, "gaze", parsed.gaze.is_some());
    set(&mut report, "video", parsed.video_present);

    if d.is_finite() && d > 0.0 {
        let mut sampled: Vec<(String, Vec<Seconds>, f64)> = parsed
            .workload
            .iter()
            .map(|w| (w.category().stream_key().to_string(), w.times(), w.nominal_rate_hz()))
            .collect();
        for series in [&parsed.imu, &parsed.gaze].into_iter().flatten() {
            let rate = series.estimated_rate_hz().unwrap_or(WORKLOAD_RATE_HZ);
            sampled.push((series.kind().as_str().to_string(), series.times().to_vec(), rate));
        }
        for category in WorkloadCategory::ALL {
            if !parsed.workload.iter().any(|w| w.category() == category) {
                report.coverage.insert(category.stream_key().to_string(), 0.0);
            }
        }
        for kind in [SensorKind::Imu, SensorKind::Gaze] {
            if !sampled.iter().any(|(k, _, _)| k == kind.as_str()) {
                report.coverage.insert(kind.as_str().to_string(), 0.0);
            }
        }
        for (stream, times, rate) in sampled {
            let gaps = detect_gaps(&times, d, rate);
            let missing: f64 = gaps.iter().map(|(a, b)| b - a).sum();
            report.coverage.insert(stream.clone(), (1.0 - missing / d).clamp(0.0, 1.0));
            report.gaps.extend(gaps.into_iter().map(|(start_s, end_s)| Gap {
                stream: stream.clone(),
                start_s,
                end_s,
            }));
        }
    }

    let mut builder = Session::builder(entry.id.as_str(), meta.subject.as_str(), meta.trial.as_str(), d);
    if let Some(t) = parsed.procedures {
        builder = builder.procedures(t);
    }
    if let Some(t) = parsed.errors {
        builder = builder.errors(t);
    }
    if let Some(t) = parsed.phases {
        builder = builder.phases(t);
    }
    for w in parsed.workload {
        builder = builder.workload(w);
    }
    if let Some(s) = parsed.imu {
        builder = builder.imu(s);
    }
    if let Some(s) = parsed.gaze {
        builder = builder.gaze(s);
    }
    if let Some(v) = parsed.video {
        builder = builder.video(v);
    }

    report.diagnostics = diagnostics;
    match builder.build() {
        Ok(session) => (Some(session), report),
        Err(err) => {
            report.load = LoadStatus::Rejected {
                code: err.code().to_string(),
                message: err.to_string(),
            };
            (None, report)
        }
    }
}

fn read_session_meta(dir: &Path) -> std::result::Result<SessionMeta, String> {
    let path = dir.join(SESSION_FILE);
    let bytes = fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_slice(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

type Rows = csv::Reader<fs::File>;

/// Opens `file` if present and runs `parse`; on failure records the
/// diagnostics and yields `None`.
fn read_stream<T>(
    dir: &Path,
    file: &str,
    diagnostics: &mut Vec<String>,
    parse: impl FnOnce(&mut Rows) -> std::result::Result<T, Vec<String>>,
) -> Option<T> {
    let path = dir.join(file);
    if !path.is_file() {
        return None;
    }
    let mut rdr = match csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(&path)
    {
        Ok(rdr) => rdr,
        Err(e) => {
            diagnostics.push(format!("{file}: {e}"));
            return None;
        }
    };
    match parse(&mut rdr) {
        Ok(v) => Some(v),
        Err(errs) => {
            diagnostics.extend(errs.into_iter().map(|e| format!("{file}: {e}")));
            None
        }
    }
}

fn check_header(rdr: &mut Rows, expected: &[&str]) -> std::result::Result<(), Vec<String>> {
    let header = rdr.headers().map_err(|e| vec![format!("unreadable header: {e}")])?;
    let actual: Vec<&str> = header.iter().map(|h| h.trim_start_matches('\u{feff}')).collect();
    if actual != expected {
        return Err(vec![format!(
            "line 1: expected header `{}`, found `{}`",
            expected.join(","),
            actual.join(",")
        )]);
    }
    Ok(())
}

/// Iterates data rows, handing each row's fields and 1-based line number to
/// `row`. Collects every row error instead of stopping at the first.
fn for_rows(
    rdr: &mut Rows,
    arity: usize,
    mut row: impl FnMut(&csv::StringRecord, u64) -> std::result::Result<(), String>,
) -> std::result::Result<(), Vec<String>> {
    let mut errs = Vec::new();
    for result in rdr.records() {
        match result {
            Ok(rec) => {
                let line = rec.position().map_or(0, |p| p.line());
                if rec.len() == 1 && rec[0].is_empty() {
                    continue;
                }
                if rec.len() != arity {
                    errs.push(format!("line {line}: expected {arity} fields, found {}", rec.len()));
                    continue;
                }
                if let Err(e) = row(&rec, line) {
                    errs.push(format!("line {line}: {e}"));
                }
            }
            Err(e) => errs.push(e.to_string()),
        }
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

fn number(field: &str, name: &str) -> std::result::Result<f64, String> {
    let v: f64 = field
        .parse()
        .map_err(|_| format!("{name}: `{field}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{name}: `{field}` is not finite"))
    }
}

fn parse_procedures(rdr: &mut Rows, vocabulary: &[String]) -> std::result::Result<IntervalTrack, Vec<String>> {
    check_header(rdr, &["start_s", "end_s", "label"])?;
    let mut intervals = Vec::new();
    for_rows(rdr, 3, |rec, _| {
        let label = &rec[2];
        if !vocabulary.iter().any(|v| v == label) {
            return Err(format!("procedure label `{label}` not in the dataset vocabulary"));
        }
        let iv = Interval::new(number(&rec[0], "start_s")?, number(&rec[1], "end_s")?, label)
            .map_err(|e| e.to_string())?;
        intervals.push(iv);
        Ok(())
    })?;
    IntervalTrack::new(TrackKind::Procedure, intervals).map_err(|e| vec![e.to_string()])
}

pub const ERROR_LABEL: &str = "error";

/// Error spans: point errors are widened to [`MIN_ERROR_SPAN_S`] and
/// overlapping spans are merged, since errors have union semantics.
fn parse_errors(rdr: &mut Rows, duration_s: f64) -> std::result::Result<IntervalTrack, Vec<String>> {
    check_header(rdr, &["start_s", "end_s"])?;
    let mut spans: Vec<(f64, f64)> = Vec::new();
    for_rows(rdr, 2, |rec, _| {
        let start = number(&rec[0], "start_s")?;
        let end = number(&rec[1], "end_s")?;
        if start < 0.0 || end < start {
            return Err(format!("bad error span [{start}, {end}]"));
        }
        spans.push(widen_point_error(start, end, duration_s));
        Ok(())
    })?;
    Ok(merge_error_spans(spans))
}

pub(crate) fn widen_point_error(start: f64, end: f64, duration_s: f64) -> (f64, f64) {
    if end > start {
        return (start, end);
    }
    if duration_s.is_finite() && start + MIN_ERROR_SPAN_S > duration_s {
        ((duration_s - MIN_ERROR_SPAN_S).max(0.0), duration_s)
    } else {
        (start, start + MIN_ERROR_SPAN_S)
    }
}

pub(crate) fn merge_error_spans(mut spans: Vec<(f64, f64)>) -> IntervalTrack {
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, b) in spans {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    let intervals = merged
        .into_iter()
        .map(|(start_s, end_s)| Interval {
            start_s,
            end_s,
            label: ERROR_LABEL.to_string(),
        })
        .collect();
    IntervalTrack::new(TrackKind::Error, intervals).expect("merged spans are sorted and disjoint")
}

fn parse_phases(rdr: &mut Rows) -> std::result::Result<IntervalTrack, Vec<String>> {
    check_header(rdr, &["start_s", "end_s", "phase"])?;
    let mut intervals = Vec::new();
    for_rows(rdr, 3, |rec, _| {
        let iv = Interval::new(number(&rec[0], "start_s")?, number(&rec[1], "end_s")?, &rec[2])
            .map_err(|e| e.to_string())?;
        intervals.push(iv);
        Ok(())
    })?;
    IntervalTrack::new(TrackKind::Phase, intervals).map_err(|e| vec![e.to_string()])
}

fn parse_workload(rdr: &mut Rows) -> std::result::Result<Vec<WorkloadSeries>, Vec<String>> {
    check_header(rdr, &["t_s", "category", "state", "confidence"])?;
    let mut by_category: BTreeMap<WorkloadCategory, Vec<WorkloadSample>> = BTreeMap::new();
    for_rows(rdr, 4, |rec, _| {
        let t_s = number(&rec[0], "t_s")?;
        let category: WorkloadCategory = rec[1].parse()?;
        let state: MentalState = rec[2].parse()?;
        let confidence = number(&rec[3], "confidence")?;
        by_category.entry(category).or_default().push(WorkloadSample {
            t_s,
            state,
            confidence,
        });
        Ok(())
    })?;
    let mut out = Vec::new();
    let mut errs = Vec::new();
    for (category, samples) in by_category {
        match WorkloadSeries::new(category, samples, WORKLOAD_RATE_HZ) {
            Ok(series) => out.push(series),
            Err(e) => errs.push(format!("{}: {e}", category.stream_key())),
        }
    }
    if errs.is_empty() {
        Ok(out)
    } else {
        Err(errs)
    }
}

fn parse_sensor(rdr: &mut Rows, kind: SensorKind) -> std::result::Result<SensorSeries, Vec<String>> {
    let channels = kind.channel_names();
    let mut header = vec!["t_s"];
    header.extend_from_slice(channels);
    check_header(rdr, &header)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for_rows(rdr, header.len(), |rec, _| {
        let t = number(&rec[0], "t_s")?;
        let row = (1..rec.len())
            .map(|i| number(&rec[i], header[i]))
            .collect::<std::result::Result<Vec<f64>, String>>()?;
        times.push(t);
        values.extend(row);
        Ok(())
    })?;
    SensorSeries::from_flat(kind, times, values).map_err(|e| vec![e.to_string()])
}
