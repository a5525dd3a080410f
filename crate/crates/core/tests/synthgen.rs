mod common;

use std::fs;

use common::{materialize, tree};
use sessionlens_core::analytics::error_contribution;
use sessionlens_core::ingest::{load_dataset, Presence};
use sessionlens_core::model::{MentalState, WorkloadCategory};
use sessionlens_core::synthgen::{
    generate, generate_degraded, presets, Degradations, GapInjection, GeneratorSpec, MotionStyle, ProfileSpec, Skill,
    StreamDrop, SynthgenFile,
};

fn one_expert() -> GeneratorSpec {
    GeneratorSpec::new(42, vec![ProfileSpec::new("p1", Skill::Expert, MotionStyle::Smooth)], vec!["1".into()])
}

#[test]
fn same_seed_gives_byte_identical_trees() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    generate(&one_expert(), a.path()).unwrap();
    generate(&one_expert(), b.path()).unwrap();
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    assert!(ta.len() >= 9);
    assert_eq!(ta, tb);
}

#[test]
fn different_seed_changes_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    generate(&one_expert(), a.path()).unwrap();
    let mut spec = one_expert();
    spec.seed += 1;
    generate(&spec, b.path()).unwrap();
    assert_ne!(tree(a.path()), tree(b.path()));
}

#[test]
fn empty_degradations_match_clean_generation() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let spec = presets::demo(3);
    generate(&spec, a.path()).unwrap();
    generate_degraded(&spec, &Degradations::default(), b.path()).unwrap();
    assert_eq!(tree(a.path()), tree(b.path()));
}

#[test]
fn generated_bundles_ingest_cleanly() {
    let (_dir, dataset, truth) = materialize(&presets::demo(9));
    assert_eq!(dataset.sessions.len(), 12);
    assert_eq!(truth.sessions.len(), 12);
    for report in &dataset.reports {
        assert!(report.is_clean(), "{report:?}");
    }
    for s in &dataset.sessions {
        assert!(s.video().is_none());
        let phases = s.phases().unwrap().intervals();
        assert_eq!(phases.iter().map(|p| p.label.as_str()).collect::<Vec<_>>(), ["PF", "FL"]);
        let pf_end = phases[0].end_s;
        assert!(s.procedures().unwrap().intervals().iter().all(|iv| iv.end_s <= pf_end));
    }
}

#[test]
fn procedure_order_is_not_sequential() {
    let (_dir, dataset, _) = materialize(&presets::null_effect(4));
    let orders: std::collections::BTreeSet<Vec<String>> = dataset
        .sessions
        .iter()
        .map(|s| s.procedures().unwrap().intervals().iter().map(|iv| iv.label.clone()).collect())
        .collect();
    assert!(orders.len() > 1);
    let sorted = orders.iter().filter(|o| o.windows(2).all(|w| w[0] <= w[1])).count();
    assert_eq!(sorted, 0);
}

/// Reads `start,end[,label]` rows from a generated CSV.
fn read_intervals(path: &std::path::Path) -> Vec<(f64, f64, String)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f.get(2).unwrap_or(&"").to_string())
        })
        .collect()
}

#[test]
fn coupled_errors_sit_inside_procedure_and_state_run() {
    let dir = tempfile::tempdir().unwrap();
    let truth = generate(&presets::planted_coupling(21), dir.path()).unwrap();
    let mut checked = 0;
    for s in &truth.sessions {
        let root = dir.path().join(&s.id);
        let procedures = read_intervals(&root.join("procedures.csv"));
        let errors = read_intervals(&root.join("errors.csv"));
        // overload runs straight from the raw attention samples
        let samples: Vec<(f64, String)> = fs::read_to_string(root.join("workload.csv"))
            .unwrap()
            .lines()
            .skip(1)
            .filter_map(|line| {
                let f: Vec<&str> = line.split(',').collect();
                (f[1] == "attention").then(|| (f[0].parse().unwrap(), f[2].to_string()))
            })
            .collect();
        let mut runs = Vec::new();
        let mut i = 0;
        while i < samples.len() {
            let mut j = i;
            while j + 1 < samples.len() && samples[j + 1].1 == samples[i].1 {
                j += 1;
            }
            let end = samples.get(j + 1).map_or(s.duration_s, |x| x.0);
            if samples[i].1 == "overload" {
                runs.push((samples[i].0, end));
            }
            i = j + 1;
        }
        assert!(!errors.is_empty());
        for (a, b, _) in &errors {
            assert!(
                procedures.iter().any(|(p0, p1, l)| l == "e" && p0 <= a && b <= p1),
                "{}: error [{a}, {b}] outside procedure e",
                s.id
            );
            assert!(
                runs.iter().any(|(r0, r1)| r0 <= a && b <= r1),
                "{}: error [{a}, {b}] outside an overload run",
                s.id
            );
            checked += 1;
        }
    }
    assert!(checked >= 30);
}

#[test]
fn full_strength_coupling_gives_strong_contribution() {
    let (_dir, dataset, _) = materialize(&presets::planted_coupling(5));
    let sessions = common::refs(&dataset);
    let contribution = error_contribution(&sessions, WorkloadCategory::Attention);
    let overload = contribution[&MentalState::Overload];
    assert!(overload.n_samples >= 30);
    assert!(overload.r.unwrap() >= 0.9, "{overload:?}");
}

#[test]
fn dropped_streams_report_absent() {
    let dir = tempfile::tempdir().unwrap();
    let spec = presets::planted_coupling(8);
    let target = "s03-p2-1".to_string();
    let degradations = Degradations {
        drop_streams: vec![StreamDrop {
            session: target.clone(),
            streams: vec!["procedures".into(), "errors".into()],
        }],
        inject_gaps: None,
    };
    let truth = generate_degraded(&spec, &degradations, dir.path()).unwrap();
    assert_eq!(truth.dropped_streams, degradations.drop_streams);
    let dataset = load_dataset(dir.path()).unwrap();
    let report = dataset.report(&target).unwrap();
    assert!(report.is_loaded());
    assert_eq!(report.presence("procedures"), Presence::Absent);
    assert_eq!(report.presence("errors"), Presence::Absent);
    assert_eq!(report.presence("workload.attention"), Presence::Present);
    assert!(dataset.session(&target).unwrap().procedures().is_none());
}

#[test]
fn thirty_second_gap_recovered() {
    let dir = tempfile::tempdir().unwrap();
    let spec = one_expert();
    let degradations = Degradations {
        drop_streams: vec![],
        inject_gaps: Some(GapInjection {
            count: 1,
            min_len_s: 30.0,
            max_len_s: 30.0,
            streams: vec!["workload".into()],
            sessions: None,
        }),
    };
    let truth = generate_degraded(&spec, &degradations, dir.path()).unwrap();
    let gap = &truth.gaps[0];
    assert!((gap.end_s - gap.start_s - 30.0).abs() < 1e-9);
    let dataset = load_dataset(dir.path()).unwrap();
    let report = &dataset.reports[0];
    for key in &gap.report_streams {
        let found: Vec<_> = report.gaps_for(key).collect();
        assert_eq!(found.len(), 1, "{key}");
        assert!((found[0].start_s - gap.start_s).abs() <= 0.2);
        assert!((found[0].end_s - gap.end_s).abs() <= 0.2);
    }
    assert_eq!(report.gaps_for("imu").count(), 0);
}

#[test]
fn invalid_spec_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut spec = one_expert();
    spec.profiles[0].error_coupling = Some(sessionlens_core::synthgen::ErrorCoupling {
        procedure: "zz".into(),
        category: WorkloadCategory::Memory,
        state: MentalState::Underload,
        strength: 0.5,
    });
    assert!(generate(&spec, &out).is_err());
    assert!(!out.exists());

    let bad_drop = Degradations {
        drop_streams: vec![StreamDrop {
            session: "nope".into(),
            streams: vec!["imu".into()],
        }],
        inject_gaps: None,
    };
    assert!(generate_degraded(&one_expert(), &bad_drop, &out).is_err());
    assert!(!out.exists());
}

#[test]
fn spec_file_parses_with_defaults() {
    let text = r#"{
        "seed": 7,
        "trials": ["1", "2"],
        "profiles": [
            {"subject": "p1", "skill": "expert", "motion_style": "smooth"},
            {"subject": "p2", "skill": "novice", "motion_style": "stop_start",
             "workload_bias": {"attention": {"underload": 0.2, "optimal": 0.3, "overload": 0.5}},
             "error_coupling": {"procedure": "e", "category": "attention", "state": "overload", "strength": 1.0}}
        ],
        "degradations": {"drop_streams": [{"session": "s00-p1-1", "streams": ["imu"]}]}
    }"#;
    let file: SynthgenFile = serde_json::from_str(text).unwrap();
    assert_eq!(file.spec.procedures.len(), 6);
    assert_eq!(file.spec.duration_range, [300.0, 600.0]);
    assert_eq!(file.degradations.drop_streams.len(), 1);
    file.spec.validate().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let truth = generate_degraded(&file.spec, &file.degradations, dir.path()).unwrap();
    assert_eq!(truth.sessions.len(), 4);
    assert!(!dir.path().join("s00-p1-1/imu.csv").exists());
}
