#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sessionlens_core::ingest::{load_dataset, Dataset};
use sessionlens_core::model::{Interval, IntervalTrack, MentalState, Session, TrackKind, WorkloadCategory, WorkloadSample, WorkloadSeries};
use sessionlens_core::synthgen::{generate, GeneratorSpec, GroundTruth};
use tempfile::TempDir;

pub fn materialize(spec: &GeneratorSpec) -> (TempDir, Dataset, GroundTruth) {
    let dir = tempfile::tempdir().unwrap();
    let truth = generate(spec, dir.path()).unwrap();
    let dataset = load_dataset(dir.path()).unwrap();
    (dir, dataset, truth)
}

/// Relative path → file bytes for every file under `root`.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

pub fn track(kind: TrackKind, ivs: &[(f64, f64, &str)]) -> IntervalTrack {
    IntervalTrack::new(kind, ivs.iter().map(|&(a, b, l)| Interval::new(a, b, l).unwrap()).collect()).unwrap()
}

pub fn workload_from_states(category: WorkloadCategory, t0: f64, states: &[MentalState]) -> WorkloadSeries {
    let samples = states
        .iter()
        .enumerate()
        .map(|(i, &state)| WorkloadSample {
            t_s: t0 + i as f64 / 10.0,
            state,
            confidence: 0.9,
        })
        .collect();
    WorkloadSeries::new(category, samples, 10.0).unwrap()
}

pub fn refs(dataset: &Dataset) -> Vec<&Session> {
    dataset.sessions.iter().collect()
}
