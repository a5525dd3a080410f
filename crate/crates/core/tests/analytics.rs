mod common;

use common::{materialize, refs, track, workload_from_states};
use proptest::prelude::*;
use sessionlens_core::analytics::{
    aggregate_group, error_contribution, occurrence_samples, partial_r_per_procedure, procedure_summary, state_proportions,
    GroupBy,
};
use sessionlens_core::model::{MentalState, Session, TrackKind, WorkloadCategory};
use sessionlens_core::synthgen::presets;

const LABELS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

#[test]
fn planted_procedure_keeps_high_partial_correlation() {
    let (_dir, dataset, _) = materialize(&presets::planted_coupling(2));
    let sessions = refs(&dataset);
    let samples = occurrence_samples(&sessions, WorkloadCategory::Attention);
    assert!(samples.len() >= 200);
    let r = partial_r_per_procedure(&sessions, "e", WorkloadCategory::Attention, MentalState::Overload).unwrap();
    assert!(r >= 0.9, "{r}");
    for group in aggregate_group(&sessions, GroupBy::Subject) {
        let c = group.error_contribution.get(WorkloadCategory::Attention, MentalState::Overload).unwrap();
        assert!(c.r.unwrap() >= 0.9, "{}: {c:?}", group.key);
    }
}

#[test]
fn uniform_errors_show_no_correlation() {
    let (_dir, dataset, _) = materialize(&presets::null_effect(13));
    let sessions = refs(&dataset);
    assert!(occurrence_samples(&sessions, WorkloadCategory::Memory).len() >= 200);
    for category in WorkloadCategory::ALL {
        for (state, c) in error_contribution(&sessions, category) {
            if let Some(r) = c.r {
                assert!(r.abs() < 0.2, "{category} {state}: {r}");
            }
        }
    }
}

#[test]
fn proportions_sum_to_one_on_synthetic_groups() {
    let (_dir, dataset, _) = materialize(&presets::demo(1));
    let sessions = refs(&dataset);
    for group_by in [GroupBy::Subject, GroupBy::Trial] {
        for group in aggregate_group(&sessions, group_by) {
            for category in WorkloadCategory::ALL {
                let total: f64 = group.proportions.get(category).unwrap().values().sum();
                assert!((total - 1.0).abs() <= 1e-9);
            }
        }
    }
    let all = state_proportions(&sessions);
    assert!(WorkloadCategory::ALL.iter().all(|&c| all.get(c).is_some()));
}

#[test]
fn occurrence_oracle_matches_direct_sums() {
    let (_dir, dataset, _) = materialize(&presets::null_effect(6));
    let session = &dataset.sessions[0];
    let series = session.workload(WorkloadCategory::Perception).unwrap();
    let samples = occurrence_samples(&[session], WorkloadCategory::Perception);
    for occ in samples.iter().take(6) {
        // every sample holds its state for 0.1 s on a clean grid
        let mut direct = [0.0f64; 3];
        for s in series.samples() {
            let overlap = ((s.t_s + 0.1).min(occ.end_s) - s.t_s.max(occ.start_s)).max(0.0);
            direct[s.state as usize] += overlap;
        }
        for state in MentalState::ALL {
            assert!((occ.state_s[&state] - direct[state as usize]).abs() < 1e-6);
        }
    }
}

fn random_session(
    cuts: &[f64],
    labels: &[usize],
    errors: &[(f64, f64)],
    split_at: &[f64],
    split_errors: bool,
) -> Session {
    // procedures tile [0, 100] at `cuts`, optionally split in two at `split_at`
    let mut procs: Vec<(f64, f64, &str)> = Vec::new();
    let mut bounds = vec![0.0];
    bounds.extend_from_slice(cuts);
    bounds.push(100.0);
    for (i, w) in bounds.windows(2).enumerate() {
        if labels[i] == LABELS.len() {
            continue; // idle
        }
        let label = LABELS[labels[i]];
        let mid = w[0] + (w[1] - w[0]) * split_at[i];
        if !split_at.is_empty() && split_at[i] > 0.0 && mid > w[0] && mid < w[1] {
            procs.push((w[0], mid, label));
            procs.push((mid, w[1], label));
        } else {
            procs.push((w[0], w[1], label));
        }
    }
    let mut errs: Vec<(f64, f64, &str)> = Vec::new();
    for &(a, b) in errors {
        if split_errors {
            let m = (a + b) / 2.0;
            errs.push((a, m, "error"));
            errs.push((m, b, "error"));
        } else {
            errs.push((a, b, "error"));
        }
    }
    let states: Vec<MentalState> = (0..1000).map(|i| MentalState::ALL[(i / 37) % 3]).collect();
    Session::builder("s", "p", "t", 100.0)
        .procedures(track(TrackKind::Procedure, &procs))
        .errors(track(TrackKind::Error, &errs))
        .workload(workload_from_states(WorkloadCategory::Attention, 0.0, &states))
        .build()
        .unwrap()
}

fn arb_track() -> impl Strategy<Value = (Vec<f64>, Vec<usize>, Vec<(f64, f64)>, Vec<f64>)> {
    (2usize..12)
        .prop_flat_map(|n| {
            (
                proptest::collection::btree_set(1u32..999, n - 1),
                proptest::collection::vec(0usize..=LABELS.len(), n),
                proptest::collection::btree_set(0u32..49, 0..8),
                proptest::collection::vec(0.05f64..0.95, n),
            )
        })
        .prop_map(|(cuts, labels, err_slots, split)| {
            let cuts: Vec<f64> = cuts.into_iter().map(|c| c as f64 / 10.0).collect();
            // disjoint error spans inside 2-second slots
            let errors = err_slots
                .into_iter()
                .map(|k| (k as f64 * 2.0 + 0.3, k as f64 * 2.0 + 1.7))
                .collect();
            (cuts, labels, errors, split)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn splitting_intervals_preserves_summary((cuts, labels, errors, split) in arb_track()) {
        let vocabulary: Vec<String> = LABELS.iter().map(|s| s.to_string()).collect();
        let whole = random_session(&cuts, &labels, &errors, &vec![0.0; labels.len()], false);
        let split = random_session(&cuts, &labels, &errors, &split, true);
        let a = procedure_summary(&whole, WorkloadCategory::Attention, &vocabulary).unwrap();
        let b = procedure_summary(&split, WorkloadCategory::Attention, &vocabulary).unwrap();
        let mut prevalence_sum = 0.0;
        for (x, y) in a.procedures.iter().zip(&b.procedures) {
            prop_assert_eq!(&x.label, &y.label);
            prop_assert!((x.prevalence - y.prevalence).abs() <= 1e-9);
            match (x.error_fraction, y.error_fraction) {
                (Some(p), Some(q)) => prop_assert!((p - q).abs() <= 1e-9),
                (p, q) => prop_assert_eq!(p, q),
            }
            prevalence_sum += x.prevalence;
        }
        let covered = whole.procedures().unwrap().covered_duration() / whole.duration_s();
        prop_assert!((prevalence_sum - covered).abs() <= 1e-9);
        prop_assert!(prevalence_sum <= 1.0 + 1e-9);
        let proportions = state_proportions(&[&whole]);
        let total: f64 = proportions.get(WorkloadCategory::Attention).unwrap().values().sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }
}
