//! Timeline assembly, brushing and sensor slices for the timeline and detail views.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::embed::{derived_channel, GAZE_DERIVED, IMU_DERIVED};
use crate::ingest::{Dataset, Presence, STREAM_KEYS};
use crate::model::{Interval, IntervalTrack, SensorKind, Session, SessionId, StateRun, SubjectId, TrialId, WorkloadCategory};
use crate::{Error, Result, Seconds};

/// Confidence polylines are decimated to at most this many points.
pub const MAX_CONFIDENCE_POINTS: usize = 2000;
/// Default point budget for a sensor slice.
pub const DEFAULT_MAX_POINTS: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidencePoint {
    pub t_s: Seconds,
    pub confidence: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackPresence {
    pub procedures: bool,
    pub errors: bool,
    pub phases: bool,
    pub workload: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimelineBundle {
    pub session_id: SessionId,
    pub duration_s: Seconds,
    pub window: [Seconds; 2],
    pub category: WorkloadCategory,
    pub present: TrackPresence,
    pub procedures: Vec<Interval>,
    pub errors: Vec<Interval>,
    pub phases: Vec<Interval>,
    /// Constant-state runs; sampling gaps stay as holes.
    pub workload: Vec<StateRun>,
    pub confidence: Vec<ConfidencePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrushResult {
    pub timeline: TimelineBundle,
    /// Distinct procedure labels intersecting the window, sorted.
    pub labels_touched: Vec<String>,
    /// Window in video time, clamped at zero; `None` without video.
    pub video_window: Option<[Seconds; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesSlice {
    pub stream: SensorKind,
    pub channel: String,
    pub window: [Seconds; 2],
    /// Samples inside the window before decimation.
    pub source_points: usize,
    /// `[t_s, value]` pairs in time order.
    pub points: Vec<[f64; 2]>,
}

fn clipped(track: Option<&IntervalTrack>, t0: Seconds, t1: Seconds) -> Vec<Interval> {
    track.map(|t| t.clip(t0, t1).intervals().to_vec()).unwrap_or_default()
}

/// Keeps every `ceil(n / max)`-th point.
fn uniform_decimate<T: Copy>(points: &[T], max: usize) -> Vec<T> {
    if points.len() <= max {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(max);
    points.iter().step_by(stride).copied().collect()
}

fn timeline_window(session: &Session, category: WorkloadCategory, t0: Seconds, t1: Seconds) -> TimelineBundle {
    let series = session.workload(category);
    let workload = series
        .map(|s| {
            s.runs(session.duration_s())
                .into_iter()
                .filter_map(|r| {
                    let start_s = r.start_s.max(t0);
                    let end_s = r.end_s.min(t1);
                    (end_s > start_s).then_some(StateRun {
                        start_s,
                        end_s,
                        state: r.state,
                    })
                })
                .collect()
        })
        .unwrap_or_default();
    let confidence: Vec<ConfidencePoint> = series
        .map(|s| {
            s.samples()
                .iter()
                .filter(|x| x.t_s >= t0 && x.t_s <= t1)
                .map(|x| ConfidencePoint {
                    t_s: x.t_s,
                    confidence: x.confidence,
                })
                .collect()
        })
        .unwrap_or_default();
    TimelineBundle {
        session_id: session.id().clone(),
        duration_s: session.duration_s(),
        window: [t0, t1],
        category,
        present: TrackPresence {
            procedures: session.procedures().is_some(),
            errors: session.errors().is_some(),
            phases: session.phases().is_some(),
            workload: series.is_some(),
        },
        procedures: clipped(session.procedures(), t0, t1),
        errors: clipped(session.errors(), t0, t1),
        phases: clipped(session.phases(), t0, t1),
        workload,
        confidence: uniform_decimate(&confidence, MAX_CONFIDENCE_POINTS),
    }
}

/// Whole-session timeline for one workload category. A missing category
/// leaves the workload track empty; the other tracks are still returned.
pub fn build_timeline(session: &Session, category: WorkloadCategory) -> TimelineBundle {
    timeline_window(session, category, 0.0, session.duration_s())
}

/// Clips every track to `[t0, t1]` and reports the procedure labels touched
/// and the matching video window.
pub fn brush(session: &Session, t0: Seconds, t1: Seconds, category: WorkloadCategory) -> Result<BrushResult> {
    let d = session.duration_s();
    if !(t0.is_finite() && t1.is_finite() && 0.0 <= t0 && t0 < t1 && t1 <= d) {
        return Err(Error::InvalidWindow { t0, t1, duration_s: d });
    }
    let timeline = timeline_window(session, category, t0, t1);
    let labels_touched: BTreeSet<String> = timeline.procedures.iter().map(|iv| iv.label.clone()).collect();
    let video_window = session
        .video()
        .map(|v| [(t0 - v.offset_s).max(0.0), (t1 - v.offset_s).max(0.0)]);
    Ok(BrushResult {
        timeline,
        labels_touched: labels_touched.into_iter().collect(),
        video_window,
    })
}

/// Raw channels followed by derived ones.
pub fn valid_channels(kind: SensorKind) -> Vec<String> {
    let derived: &[&str] = match kind {
        SensorKind::Imu => &IMU_DERIVED,
        SensorKind::Gaze => &GAZE_DERIVED,
    };
    kind.channel_names().iter().chain(derived).map(|s| s.to_string()).collect()
}

/// Min–max decimation: the points are split into `max_points / 2` equal-count
/// buckets and each bucket contributes its minimum and maximum in time order.
/// Window extrema always survive.
pub fn minmax_decimate(points: &[[f64; 2]], max_points: usize) -> Vec<[f64; 2]> {
    let max_points = max_points.max(2);
    if points.len() <= max_points {
        return points.to_vec();
    }
    let buckets = max_points / 2;
    let n = points.len();
    let mut out = Vec::with_capacity(buckets * 2);
    for b in 0..buckets {
        let lo = b * n / buckets;
        let hi = (b + 1) * n / buckets;
        if lo >= hi {
            continue;
        }
        let mut imin = lo;
        let mut imax = lo;
        for i in lo..hi {
            if points[i][1] < points[imin][1] {
                imin = i;
            }
            if points[i][1] > points[imax][1] {
                imax = i;
            }
        }
        let (first, second) = if imin <= imax { (imin, imax) } else { (imax, imin) };
        out.push(points[first]);
        if second != first {
            out.push(points[second]);
        }
    }
    out
}

/// Samples of one channel inside `[t0, t1]`, min–max decimated to `max_points`.
pub fn slice_series(
    session: &Session,
    stream: SensorKind,
    channel: &str,
    t0: Seconds,
    t1: Seconds,
    max_points: usize,
) -> Result<SeriesSlice> {
    let series = session
        .sensor(stream)
        .ok_or_else(|| Error::StreamAbsent(stream.as_str().into()))?;
    if !(t0.is_finite() && t1.is_finite() && t0 <= t1) {
        return Err(Error::InvalidWindow {
            t0,
            t1,
            duration_s: session.duration_s(),
        });
    }
    let values: Vec<f64> = match series.channel_index(channel) {
        Some(idx) => series.channel(idx).collect(),
        None => derived_channel(series, channel).ok_or_else(|| Error::UnknownChannel {
            channel: channel.to_string(),
            valid: valid_channels(stream),
        })?,
    };
    let points: Vec<[f64; 2]> = series
        .times()
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= t0 && t <= t1)
        .map(|(&t, v)| [t, v])
        .collect();
    Ok(SeriesSlice {
        stream,
        channel: channel.to_string(),
        window: [t0, t1],
        source_points: points.len(),
        points: minmax_decimate(&points, max_points),
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionFilter {
    pub subjects: Option<Vec<String>>,
    pub trials: Option<Vec<String>>,
    /// Keep only the `k` trials with the most sessions in the dataset.
    pub top_k_trials: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub id: SessionId,
    pub subject: SubjectId,
    pub trial: TrialId,
    pub duration_s: Seconds,
    pub streams: BTreeMap<String, bool>,
}

/// The `k` most frequent trials by session count; ties go to the
/// lexicographically smaller trial id.
pub fn top_trials(sessions: &[Session], k: usize) -> BTreeSet<TrialId> {
    let mut counts: BTreeMap<&TrialId, usize> = BTreeMap::new();
    for s in sessions {
        *counts.entry(s.trial()).or_default() += 1;
    }
    let mut ranked: Vec<(&TrialId, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.into_iter().take(k).map(|(t, _)| t.clone()).collect()
}

/// Session metadata sorted by (trial, subject, id).
pub fn list_sessions(dataset: &Dataset, filter: &SessionFilter) -> Vec<SessionMeta> {
    let top = filter.top_k_trials.map(|k| top_trials(&dataset.sessions, k));
    let mut out: Vec<SessionMeta> = dataset
        .sessions
        .iter()
        .filter(|s| {
            filter
                .subjects
                .as_ref()
                .is_none_or(|v| v.iter().any(|x| x == s.subject().as_str()))
                && filter
                    .trials
                    .as_ref()
                    .is_none_or(|v| v.iter().any(|x| x == s.trial().as_str()))
                && top.as_ref().is_none_or(|t| t.contains(s.trial()))
        })
        .map(|s| {
            let report = dataset.report(s.id().as_str());
            let streams = STREAM_KEYS
                .iter()
                .map(|&k| {
                    let present = report.is_some_and(|r| r.presence(k) == Presence::Present);
                    (k.to_string(), present)
                })
                .collect();
            SessionMeta {
                id: s.id().clone(),
                subject: s.subject().clone(),
                trial: s.trial().clone(),
                duration_s: s.duration_s(),
                streams,
            }
        })
        .collect();
    out.sort_by(|a, b| (&a.trial, &a.subject, &a.id).cmp(&(&b.trial, &b.subject, &b.id)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MentalState, SensorSeries, TrackKind, VideoRef, WorkloadSample, WorkloadSeries};

    fn session_with_video(offset: f64) -> Session {
        let procs = IntervalTrack::new(
            TrackKind::Procedure,
            vec![Interval::new(0.0, 15.0, "a").unwrap(), Interval::new(15.0, 30.0, "c").unwrap()],
        )
        .unwrap();
        Session::builder("s", "p", "t", 60.0)
            .procedures(procs)
            .video(VideoRef {
                file_path: "v.mp4".into(),
                offset_s: offset,
            })
            .build()
            .unwrap()
    }

    #[test]
    fn brush_examples() {
        let s = session_with_video(2.0);
        let b = brush(&s, 10.0, 20.0, WorkloadCategory::Attention).unwrap();
        assert_eq!(b.labels_touched, vec!["a".to_string(), "c".to_string()]);
        assert_eq!(b.timeline.procedures[1], Interval::new(15.0, 20.0, "c").unwrap());
        let b = brush(&s, 0.0, 5.0, WorkloadCategory::Attention).unwrap();
        assert_eq!(b.video_window, Some([0.0, 3.0]));
        assert!(brush(&s, 5.0, 5.0, WorkloadCategory::Attention).is_err());
        assert!(brush(&s, 5.0, 61.0, WorkloadCategory::Attention).is_err());
    }

    #[test]
    fn missing_category_leaves_other_tracks() {
        let s = session_with_video(0.0);
        let t = build_timeline(&s, WorkloadCategory::Memory);
        assert!(t.workload.is_empty() && !t.present.workload);
        assert_eq!(t.procedures.len(), 2);
    }

    #[test]
    fn gap_becomes_hole() {
        let samples: Vec<WorkloadSample> = (0..100)
            .filter(|i| !(30..50).contains(i))
            .map(|i| WorkloadSample {
                t_s: i as f64 / 10.0,
                state: MentalState::Optimal,
                confidence: 0.5,
            })
            .collect();
        let s = Session::builder("s", "p", "t", 10.0)
            .workload(WorkloadSeries::new(WorkloadCategory::Attention, samples, 10.0).unwrap())
            .build()
            .unwrap();
        let t = build_timeline(&s, WorkloadCategory::Attention);
        assert_eq!(t.workload.len(), 2);
        assert!((t.workload[0].end_s - 3.0).abs() < 1e-9);
        assert!((t.workload[1].start_s - 5.0).abs() < 1e-9);
    }

    #[test]
    fn slice_small_and_constant() {
        let times: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let rows = (0..100).map(|_| vec![1.0, 2.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).collect();
        let s = Session::builder("s", "p", "t", 10.0)
            .imu(SensorSeries::new(SensorKind::Imu, times, rows).unwrap())
            .build()
            .unwrap();
        let sl = slice_series(&s, SensorKind::Imu, "ax", 2.0, 2.95, 100).unwrap();
        assert_eq!(sl.points.len(), 10);
        let sl = slice_series(&s, SensorKind::Imu, "az", 0.0, 10.0, 10).unwrap();
        assert!(sl.points.len() <= 10);
        assert!(sl.points.iter().all(|p| p[1] == 3.0));
        let err = slice_series(&s, SensorKind::Imu, "bogus", 0.0, 1.0, 10).unwrap_err();
        match err {
            Error::UnknownChannel { valid, .. } => assert!(valid.contains(&"accel_mag".to_string())),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn decimation_respects_budget() {
        let pts: Vec<[f64; 2]> = (0..10_001).map(|i| [i as f64, ((i * 7919) % 1000) as f64]).collect();
        for budget in [2, 3, 10, 999, 4000] {
            let out = minmax_decimate(&pts, budget);
            assert!(out.len() <= budget.max(2));
            assert!(out.windows(2).all(|w| w[0][0] < w[1][0]));
        }
    }
}
