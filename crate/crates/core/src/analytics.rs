//! Statistics behind the workload aggregation and summary matrix views.
//!
//! Correlations use one sample per procedure *occurrence* (one interval of
//! the procedure track), pooled across the selected sessions. For each
//! occurrence, `s` is the seconds spent in a mental state inside it and `e`
//! is the seconds of error overlap inside it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{total_label_duration, MentalState, Session, SessionId, WorkloadCategory};
use crate::stats::{partial_correlation, pearson};
use crate::{Error, Result, Seconds};

/// Fraction of covered time per state; `None` for a category no session carries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateProportions(pub BTreeMap<WorkloadCategory, Option<BTreeMap<MentalState, f64>>>);

impl StateProportions {
    pub fn get(&self, category: WorkloadCategory) -> Option<&BTreeMap<MentalState, f64>> {
        self.0.get(&category).and_then(Option::as_ref)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    /// `None` when undefined (too few samples or zero variance).
    pub r: Option<f64>,
    pub n_samples: usize,
}

/// Per category, per state Pearson coefficient between state and error seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ErrorContribution(pub BTreeMap<WorkloadCategory, BTreeMap<MentalState, Correlation>>);

impl ErrorContribution {
    pub fn get(&self, category: WorkloadCategory, state: MentalState) -> Option<Correlation> {
        self.0.get(&category).and_then(|m| m.get(&state)).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcedureStats {
    pub label: String,
    /// Fraction of the session spent in this procedure.
    pub prevalence: f64,
    /// Fraction of this procedure's time overlapped by errors; `None` when the
    /// procedure does not occur or the session has no error track.
    pub error_fraction: Option<f64>,
    /// Partial correlation per state; `None` when the category is absent.
    pub partial_r: Option<BTreeMap<MentalState, Option<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcedureSummary {
    pub session_id: SessionId,
    pub category: WorkloadCategory,
    pub procedures: Vec<ProcedureStats>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupBy {
    Subject,
    Trial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupAggregate {
    pub key: String,
    pub group_by: GroupBy,
    pub session_ids: Vec<SessionId>,
    pub proportions: StateProportions,
    pub error_contribution: ErrorContribution,
    pub avg_duration_s: Seconds,
}

/// State and error seconds of one procedure occurrence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccurrenceSample {
    pub session_id: SessionId,
    pub label: String,
    pub start_s: Seconds,
    pub end_s: Seconds,
    pub state_s: BTreeMap<MentalState, Seconds>,
    pub error_s: Seconds,
}

/// Seconds per state of `category` inside `[t0, t1]`.
pub fn state_seconds(session: &Session, category: WorkloadCategory, t0: Seconds, t1: Seconds) -> Option<BTreeMap<MentalState, Seconds>> {
    let series = session.workload(category)?;
    let mut out: BTreeMap<MentalState, Seconds> = MentalState::ALL.iter().map(|&s| (s, 0.0)).collect();
    for run in series.runs(session.duration_s()) {
        let overlap = (run.end_s.min(t1) - run.start_s.max(t0)).max(0.0);
        *out.get_mut(&run.state).expect("all states seeded") += overlap;
    }
    Some(out)
}

/// Every procedure occurrence of sessions carrying procedures, errors and
/// `category`, in input order.
pub fn occurrence_samples(sessions: &[&Session], category: WorkloadCategory) -> Vec<OccurrenceSample> {
    let mut out = Vec::new();
    for session in sessions {
        let (Some(procedures), Some(errors), Some(series)) =
            (session.procedures(), session.errors(), session.workload(category))
        else {
            continue;
        };
        let runs = series.runs(session.duration_s());
        for iv in procedures.intervals() {
            let mut state_s: BTreeMap<MentalState, Seconds> = MentalState::ALL.iter().map(|&s| (s, 0.0)).collect();
            for run in runs.iter().filter(|r| r.end_s > iv.start_s && r.start_s < iv.end_s) {
                *state_s.get_mut(&run.state).expect("all states seeded") += iv.overlap(run.start_s, run.end_s);
            }
            out.push(OccurrenceSample {
                session_id: session.id().clone(),
                label: iv.label.clone(),
                start_s: iv.start_s,
                end_s: iv.end_s,
                state_s,
                error_s: errors.overlap(iv.start_s, iv.end_s),
            });
        }
    }
    out
}

fn state_vector(samples: &[OccurrenceSample], state: MentalState) -> Vec<f64> {
    samples.iter().map(|o| o.state_s[&state]).collect()
}

fn error_vector(samples: &[OccurrenceSample]) -> Vec<f64> {
    samples.iter().map(|o| o.error_s).collect()
}

/// Proportion of covered workload time spent in each state, per category.
pub fn state_proportions(sessions: &[&Session]) -> StateProportions {
    let mut out = BTreeMap::new();
    for category in WorkloadCategory::ALL {
        let mut totals: BTreeMap<MentalState, Seconds> = MentalState::ALL.iter().map(|&s| (s, 0.0)).collect();
        let mut any = false;
        for session in sessions {
            if let Some(series) = session.workload(category) {
                any = true;
                for run in series.runs(session.duration_s()) {
                    *totals.get_mut(&run.state).expect("all states seeded") += run.end_s - run.start_s;
                }
            }
        }
        let covered: Seconds = totals.values().sum();
        let entry = (any && covered > 0.0).then(|| totals.into_iter().map(|(s, t)| (s, t / covered)).collect());
        out.insert(category, entry);
    }
    StateProportions(out)
}

/// Pearson correlation between state seconds and error seconds across all
/// pooled procedure occurrences, for each state of `category`.
pub fn error_contribution(sessions: &[&Session], category: WorkloadCategory) -> BTreeMap<MentalState, Correlation> {
    let samples = occurrence_samples(sessions, category);
    let e = error_vector(&samples);
    MentalState::ALL
        .iter()
        .map(|&state| {
            let s = state_vector(&samples, state);
            (
                state,
                Correlation {
                    r: pearson(&s, &e),
                    n_samples: samples.len(),
                },
            )
        })
        .collect()
}

fn error_contribution_all(sessions: &[&Session]) -> ErrorContribution {
    ErrorContribution(
        WorkloadCategory::ALL
            .iter()
            .map(|&c| (c, error_contribution(sessions, c)))
            .collect(),
    )
}

fn partial_r_from_samples(samples: &[OccurrenceSample], label: &str, state: MentalState) -> Option<f64> {
    let s = state_vector(samples, state);
    let e = error_vector(samples);
    let p: Vec<f64> = samples.iter().map(|o| if o.label == label { 1.0 } else { 0.0 }).collect();
    let r_se = pearson(&s, &e)?;
    let r_sp = pearson(&s, &p)?;
    let r_ep = pearson(&e, &p)?;
    partial_correlation(r_se, r_sp, r_ep)
}

/// Partial correlation of state and error seconds controlling for the
/// indicator "this occurrence is procedure `label`".
pub fn partial_r_per_procedure(sessions: &[&Session], label: &str, category: WorkloadCategory, state: MentalState) -> Option<f64> {
    partial_r_from_samples(&occurrence_samples(sessions, category), label, state)
}

/// Per-procedure prevalence, error fraction and partial correlations for one
/// session. Columns are `vocabulary` followed by any extra labels the session
/// uses, in sorted order.
pub fn procedure_summary(session: &Session, category: WorkloadCategory, vocabulary: &[String]) -> Result<ProcedureSummary> {
    let procedures = session
        .procedures()
        .ok_or_else(|| Error::StreamAbsent("procedures".into()))?;
    let mut labels: Vec<String> = vocabulary.to_vec();
    for label in procedures.labels() {
        if !labels.contains(&label) {
            labels.push(label);
        }
    }
    let samples = session
        .workload(category)
        .map(|_| occurrence_samples(&[session], category));
    let stats = labels
        .into_iter()
        .map(|label| {
            let total = total_label_duration(procedures, &label);
            let error_fraction = session.errors().filter(|_| total > 0.0).map(|errors| {
                let overlap: Seconds = procedures
                    .intervals()
                    .iter()
                    .filter(|iv| iv.label == label)
                    .map(|iv| errors.overlap(iv.start_s, iv.end_s))
                    .sum();
                (overlap / total).clamp(0.0, 1.0)
            });
            let partial_r = samples.as_ref().map(|samples| {
                MentalState::ALL
                    .iter()
                    .map(|&state| (state, partial_r_from_samples(samples, &label, state)))
                    .collect()
            });
            ProcedureStats {
                prevalence: total / session.duration_s(),
                error_fraction,
                partial_r,
                label,
            }
        })
        .collect();
    Ok(ProcedureSummary {
        session_id: session.id().clone(),
        category,
        procedures: stats,
    })
}

/// Partitions sessions by subject or trial, groups ordered by key.
pub fn aggregate_group(sessions: &[&Session], group_by: GroupBy) -> Vec<GroupAggregate> {
    let mut groups: BTreeMap<String, Vec<&Session>> = BTreeMap::new();
    for &session in sessions {
        let key = match group_by {
            GroupBy::Subject => session.subject().as_str(),
            GroupBy::Trial => session.trial().as_str(),
        };
        groups.entry(key.to_string()).or_default().push(session);
    }
    groups
        .into_iter()
        .map(|(key, members)| GroupAggregate {
            avg_duration_s: members.iter().map(|s| s.duration_s()).sum::<f64>() / members.len() as f64,
            session_ids: members.iter().map(|s| s.id().clone()).collect(),
            proportions: state_proportions(&members),
            error_contribution: error_contribution_all(&members),
            group_by,
            key,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Interval, IntervalTrack, TrackKind, WorkloadSample, WorkloadSeries};
    use MentalState::*;

    fn workload(category: WorkloadCategory, states: &[(MentalState, usize)]) -> WorkloadSeries {
        let mut samples = Vec::new();
        for &(state, count) in states {
            for _ in 0..count {
                samples.push(WorkloadSample {
                    t_s: samples.len() as f64 / 10.0,
                    state,
                    confidence: 0.8,
                });
            }
        }
        WorkloadSeries::new(category, samples, 10.0).unwrap()
    }

    fn track(kind: TrackKind, ivs: &[(f64, f64, &str)]) -> IntervalTrack {
        IntervalTrack::new(kind, ivs.iter().map(|&(a, b, l)| Interval::new(a, b, l).unwrap()).collect()).unwrap()
    }

    #[test]
    fn proportions_single_state() {
        let s = Session::builder("s", "p", "t", 10.0)
            .workload(workload(WorkloadCategory::Attention, &[(Optimal, 100)]))
            .build()
            .unwrap();
        let p = state_proportions(&[&s]);
        let att = p.get(WorkloadCategory::Attention).unwrap();
        assert_eq!(att[&Optimal], 1.0);
        assert_eq!(att[&Overload], 0.0);
        assert!(p.get(WorkloadCategory::Memory).is_none());
    }

    #[test]
    fn proportions_symmetric_pair() {
        let a = Session::builder("a", "p", "t", 10.0)
            .workload(workload(WorkloadCategory::Attention, &[(Overload, 100)]))
            .build()
            .unwrap();
        let b = Session::builder("b", "p", "t", 10.0)
            .workload(workload(WorkloadCategory::Attention, &[(Underload, 100)]))
            .build()
            .unwrap();
        let p = state_proportions(&[&a, &b]);
        let att = p.get(WorkloadCategory::Attention).unwrap();
        assert_eq!(att[&Overload], 0.5);
        assert_eq!(att[&Underload], 0.5);
        assert_eq!(att[&Optimal], 0.0);
    }

    #[test]
    fn proportions_by_sample_count() {
        // 30 s optimal then 10 s overload at 10 Hz: 300 and 100 samples
        let s = Session::builder("s", "p", "t", 40.0)
            .workload(workload(WorkloadCategory::Attention, &[(Optimal, 300), (Overload, 100)]))
            .build()
            .unwrap();
        let att = state_proportions(&[&s]).get(WorkloadCategory::Attention).unwrap().clone();
        assert!((att[&Optimal] - 0.75).abs() < 0.1 / 40.0);
        assert!((att[&Overload] - 0.25).abs() < 0.1 / 40.0);
    }

    #[test]
    fn no_errors_means_undefined() {
        let s = Session::builder("s", "p", "t", 40.0)
            .procedures(track(TrackKind::Procedure, &[(0.0, 10.0, "a"), (10.0, 20.0, "b"), (20.0, 40.0, "a")]))
            .errors(IntervalTrack::empty(TrackKind::Error))
            .workload(workload(WorkloadCategory::Attention, &[(Optimal, 150), (Overload, 250)]))
            .build()
            .unwrap();
        let ec = error_contribution(&[&s], WorkloadCategory::Attention);
        assert!(ec.values().all(|c| c.r.is_none() && c.n_samples == 3));
    }

    #[test]
    fn summary_prevalence_and_error_fraction() {
        let s = Session::builder("s", "p", "t", 600.0)
            .procedures(track(
                TrackKind::Procedure,
                &[(0.0, 150.0, "c"), (150.0, 200.0, "e"), (200.0, 350.0, "c")],
            ))
            .errors(track(TrackKind::Error, &[(150.0, 200.0, "error")]))
            .build()
            .unwrap();
        let summary = procedure_summary(&s, WorkloadCategory::Attention, &["a".into(), "c".into(), "e".into()]).unwrap();
        let by: BTreeMap<_, _> = summary.procedures.iter().map(|p| (p.label.as_str(), p)).collect();
        assert_eq!(by["c"].prevalence, 0.5);
        assert_eq!(by["e"].error_fraction, Some(1.0));
        assert_eq!(by["c"].error_fraction, Some(0.0));
        assert_eq!(by["a"].prevalence, 0.0);
        assert_eq!(by["a"].error_fraction, None);
        assert!(by["c"].partial_r.is_none());
    }

    #[test]
    fn constant_indicator_is_undefined() {
        let s = Session::builder("s", "p", "t", 40.0)
            .procedures(track(TrackKind::Procedure, &[(0.0, 10.0, "a"), (10.0, 25.0, "a"), (25.0, 40.0, "a")]))
            .errors(track(TrackKind::Error, &[(12.0, 14.0, "error"), (30.0, 39.0, "error")]))
            .workload(workload(WorkloadCategory::Attention, &[(Optimal, 120), (Overload, 280)]))
            .build()
            .unwrap();
        assert_eq!(partial_r_per_procedure(&[&s], "a", WorkloadCategory::Attention, Overload), None);
    }

    #[test]
    fn groups_average_durations() {
        let mk = |id: &str, d: f64| {
            Session::builder(id, "subj", "t", d)
                .workload(workload(WorkloadCategory::Attention, &[(Optimal, 10)]))
                .build()
                .unwrap()
        };
        let (a, b, c) = (mk("a", 100.0), mk("b", 200.0), mk("c", 300.0));
        let groups = aggregate_group(&[&a, &b, &c], GroupBy::Subject);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].avg_duration_s, 200.0);
    }
}
