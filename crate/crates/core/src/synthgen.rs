//! Seeded synthetic dataset generator with planted effects.
//!
//! Every bundle is produced from a ChaCha8 stream seeded from the spec seed,
//! and only uses IEEE-exact arithmetic (`+ − × ÷ √`) on the generated values,
//! so output is reproducible byte for byte. Gaussian noise is the
//! Irwin–Hall sum of twelve uniforms.
//!
//! Session layout: a PF phase holding a shuffled sequence of procedure
//! occurrences separated by short idle gaps, followed by an FL phase.
//! Workload states follow a Markov chain with geometric dwell times
//! (mean [`MEAN_DWELL_S`]).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::{DatasetManifest, ManifestEntry, SessionMeta, MANIFEST_FILE, SESSION_FILE};
use crate::model::{MentalState, WorkloadCategory, WORKLOAD_RATE_HZ};
use crate::{Error, Result, Seconds};

pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";
pub const MEAN_DWELL_S: f64 = 8.0;
const GRAVITY: f64 = 9.81;
const MAG_FIELD: [f64; 3] = [22.0, 5.0, -40.0];
/// Separates the degradation stream from the generation stream.
const DEGRADE_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Skill {
    Expert,
    Novice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionStyle {
    Smooth,
    StopStart,
}

/// Plants a relationship between one procedure, one workload state and errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorCoupling {
    pub procedure: String,
    pub category: WorkloadCategory,
    pub state: MentalState,
    /// 1.0: the coupled state occurs only inside the procedure and every such
    /// span carries an error; 0.0: no coupling.
    pub strength: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub subject: String,
    pub skill: Skill,
    pub motion_style: MotionStyle,
    /// Stationary state distribution per category; missing categories use
    /// `{underload: 0.25, optimal: 0.5, overload: 0.25}`.
    #[serde(default)]
    pub workload_bias: BTreeMap<WorkloadCategory, BTreeMap<MentalState, f64>>,
    #[serde(default)]
    pub error_coupling: Option<ErrorCoupling>,
    /// Uncoupled errors per minute; defaults to 0.6 (expert) or 1.5 (novice).
    #[serde(default)]
    pub error_rate_per_min: Option<f64>,
}

impl ProfileSpec {
    pub fn new(subject: impl Into<String>, skill: Skill, motion_style: MotionStyle) -> Self {
        ProfileSpec {
            subject: subject.into(),
            skill,
            motion_style,
            workload_bias: BTreeMap::new(),
            error_coupling: None,
            error_rate_per_min: None,
        }
    }

    pub fn with_coupling(mut self, coupling: ErrorCoupling) -> Self {
        self.error_coupling = Some(coupling);
        self
    }

    fn bias(&self, category: WorkloadCategory) -> [f64; 3] {
        match self.workload_bias.get(&category) {
            Some(dist) => MentalState::ALL.map(|s| dist.get(&s).copied().unwrap_or(0.0)),
            None => [0.25, 0.5, 0.25],
        }
    }

    fn error_rate(&self) -> f64 {
        self.error_rate_per_min.unwrap_or(match self.skill {
            Skill::Expert => 0.6,
            Skill::Novice => 1.5,
        })
    }
}

fn default_dataset_name() -> String {
    "synthetic".into()
}
fn default_procedures() -> Vec<String> {
    ["a", "b", "c", "d", "e", "f"].iter().map(|s| s.to_string()).collect()
}
fn default_duration_range() -> [f64; 2] {
    [300.0, 600.0]
}
fn default_occurrences() -> [usize; 2] {
    [2, 4]
}
fn default_sensor_rate() -> f64 {
    20.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(default = "default_dataset_name")]
    pub dataset_name: String,
    pub seed: u64,
    pub profiles: Vec<ProfileSpec>,
    pub trials: Vec<String>,
    #[serde(default = "default_procedures")]
    pub procedures: Vec<String>,
    #[serde(default = "default_duration_range")]
    pub duration_range: [f64; 2],
    /// Inclusive range of occurrences per procedure label per session.
    #[serde(default = "default_occurrences")]
    pub occurrences_per_procedure: [usize; 2],
    #[serde(default = "default_sensor_rate")]
    pub sensor_rate_hz: f64,
}

impl GeneratorSpec {
    pub fn new(seed: u64, profiles: Vec<ProfileSpec>, trials: Vec<String>) -> Self {
        GeneratorSpec {
            dataset_name: default_dataset_name(),
            seed,
            profiles,
            trials,
            procedures: default_procedures(),
            duration_range: default_duration_range(),
            occurrences_per_procedure: default_occurrences(),
            sensor_rate_hz: default_sensor_rate(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Spec(m));
        if self.profiles.is_empty() {
            return bad("at least one profile is required".into());
        }
        if self.trials.is_empty() {
            return bad("at least one trial is required".into());
        }
        if self.procedures.is_empty() {
            return bad("procedure vocabulary must not be empty".into());
        }
        let mut sorted = self.procedures.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.procedures.len() {
            return bad("procedure labels must be unique".into());
        }
        let [dmin, dmax] = self.duration_range;
        if !(dmin.is_finite() && dmax.is_finite() && dmin > 0.0 && dmin <= dmax) {
            return bad(format!("invalid duration_range [{dmin}, {dmax}]"));
        }
        let [omin, omax] = self.occurrences_per_procedure;
        if omin == 0 || omin > omax {
            return bad(format!("invalid occurrences_per_procedure [{omin}, {omax}]"));
        }
        // each occurrence needs room next to at most 2 s of idle time
        let worst = (self.procedures.len() * omax) as f64;
        if dmin * 0.75 < worst * 6.0 + 2.0 {
            return bad(format!("duration {dmin} s is too short for {worst} procedure occurrences"));
        }
        if !(self.sensor_rate_hz.is_finite() && self.sensor_rate_hz > 0.0) {
            return bad(format!("invalid sensor_rate_hz {}", self.sensor_rate_hz));
        }
        for p in &self.profiles {
            for (category, dist) in &p.workload_bias {
                let total: f64 = dist.values().sum();
                if dist.values().any(|&v| !(v >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                    return bad(format!("{}: {category} distribution must be non-negative and sum to 1", p.subject));
                }
            }
            if let Some(c) = &p.error_coupling {
                if !(0.0..=1.0).contains(&c.strength) {
                    return bad(format!("{}: coupling strength must lie in [0, 1]", p.subject));
                }
                if !self.procedures.contains(&c.procedure) {
                    return bad(format!("{}: coupled procedure `{}` not in vocabulary", p.subject, c.procedure));
                }
            }
            if let Some(rate) = p.error_rate_per_min {
                if !(rate.is_finite() && rate >= 0.0) {
                    return bad(format!("{}: invalid error rate", p.subject));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StreamDrop {
    pub session: String,
    /// File stems: procedures, errors, phases, workload, imu, gaze.
    pub streams: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapInjection {
    pub count: usize,
    pub min_len_s: f64,
    pub max_len_s: f64,
    /// Sampled file stems to cut: workload, imu, gaze.
    #[serde(default = "default_gap_streams")]
    pub streams: Vec<String>,
    /// Spread the gaps round-robin over the first `sessions` sessions (all by default).
    #[serde(default)]
    pub sessions: Option<usize>,
}

fn default_gap_streams() -> Vec<String> {
    vec!["workload".into()]
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Degradations {
    #[serde(default)]
    pub drop_streams: Vec<StreamDrop>,
    #[serde(default)]
    pub inject_gaps: Option<GapInjection>,
}

impl Degradations {
    pub fn is_empty(&self) -> bool {
        self.drop_streams.is_empty() && self.inject_gaps.as_ref().is_none_or(|g| g.count == 0)
    }
}

/// Spec file accepted by the `synthgen` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthgenFile {
    #[serde(flatten)]
    pub spec: GeneratorSpec,
    #[serde(default)]
    pub degradations: Degradations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionTruth {
    pub id: String,
    pub subject: String,
    pub trial: String,
    pub duration_s: Seconds,
    pub skill: Skill,
    pub motion_style: MotionStyle,
    pub error_coupling: Option<ErrorCoupling>,
    pub procedure_occurrences: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectedGap {
    pub session_id: String,
    pub stream: String,
    /// Quality-report stream keys the gap should appear under.
    pub report_streams: Vec<String>,
    pub start_s: Seconds,
    pub end_s: Seconds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub dataset_name: String,
    pub seed: u64,
    pub sessions: Vec<SessionTruth>,
    pub dropped_streams: Vec<StreamDrop>,
    pub gaps: Vec<InjectedGap>,
}

/// Writes a clean dataset to `out_dir`.
pub fn generate(spec: &GeneratorSpec, out_dir: &Path) -> Result<GroundTruth> {
    generate_degraded(spec, &Degradations::default(), out_dir)
}

/// Writes a dataset with stream drops and sample-span deletions applied after
/// generation. Ground truth of what was changed goes to `ground_truth.json`.
pub fn generate_degraded(spec: &GeneratorSpec, degradations: &Degradations, out_dir: &Path) -> Result<GroundTruth> {
    spec.validate()?;
    let mut sessions = build_sessions(spec);
    validate_degradations(degradations, &sessions)?;
    let (dropped, gaps) = apply_degradations(spec, degradations, &mut sessions)?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let manifest = DatasetManifest {
        dataset_name: spec.dataset_name.clone(),
        procedure_labels: spec.procedures.clone(),
        sessions: sessions
            .iter()
            .map(|s| ManifestEntry {
                id: s.truth.id.clone(),
                dir: s.truth.id.clone(),
            })
            .collect(),
    };
    write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    for s in &sessions {
        write_session(s, &out_dir.join(&s.truth.id))?;
    }
    let truth = GroundTruth {
        dataset_name: spec.dataset_name.clone(),
        seed: spec.seed,
        sessions: sessions.into_iter().map(|s| s.truth).collect(),
        dropped_streams: dropped,
        gaps,
    };
    write_json(&out_dir.join(GROUND_TRUTH_FILE), &truth)?;
    Ok(truth)
}

type WorkloadRows = Vec<(Seconds, MentalState, f64)>;

struct SessionData {
    truth: SessionTruth,
    procedures: Option<Vec<(Seconds, Seconds, String)>>,
    errors: Option<Vec<(Seconds, Seconds)>>,
    phases: Option<Vec<(Seconds, Seconds, &'static str)>>,
    workload: Option<Vec<(WorkloadCategory, WorkloadRows)>>,
    imu: Option<Vec<(Seconds, [f64; 9])>>,
    gaze: Option<Vec<(Seconds, [f64; 6])>>,
}

fn ms(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

/// Approximately standard normal: Irwin–Hall sum of 12 uniforms.
fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    (0..12).map(|_| rng.gen::<f64>()).sum::<f64>() - 6.0
}

fn pick(rng: &mut ChaCha8Rng, weights: &[f64; 3]) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut u = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return Some(i);
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0)
}

fn build_sessions(spec: &GeneratorSpec) -> Vec<SessionData> {
    let mut master = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::new();
    for profile in &spec.profiles {
        for trial in &spec.trials {
            let id = format!("s{:02}-{}-{}", out.len(), profile.subject, trial);
            let mut rng = ChaCha8Rng::seed_from_u64(master.gen());
            out.push(build_session(spec, profile, trial, id, &mut rng));
        }
    }
    out
}

fn build_session(spec: &GeneratorSpec, profile: &ProfileSpec, trial: &str, id: String, rng: &mut ChaCha8Rng) -> SessionData {
    let [dmin, dmax] = spec.duration_range;
    let duration = ((if dmax > dmin { rng.gen_range(dmin..=dmax) } else { dmin }) * 10.0).round() / 10.0;
    let pf_end = ms(duration * rng.gen_range(0.75..0.85));

    // Procedure occurrences, shuffled, with idle gaps between them.
    let [omin, omax] = spec.occurrences_per_procedure;
    let mut labels: Vec<&String> = Vec::new();
    for label in &spec.procedures {
        let n = rng.gen_range(omin..=omax);
        labels.extend(std::iter::repeat_n(label, n));
    }
    labels.shuffle(rng);
    let idle: Vec<f64> = (0..=labels.len()).map(|_| rng.gen_range(0.5..2.0)).collect();
    let weights: Vec<f64> = labels.iter().map(|_| rng.gen_range(0.7..1.3)).collect();
    let available = pf_end - idle.iter().sum::<f64>();
    let wsum: f64 = weights.iter().sum();
    let mut procedures = Vec::with_capacity(labels.len());
    let mut t = 0.0;
    for (i, label) in labels.iter().enumerate() {
        t += idle[i];
        let start = ms(t);
        t += available * weights[i] / wsum;
        let end = ms(t).min(pf_end);
        procedures.push((start, end, (*label).clone()));
    }
    let phases = vec![(0.0, pf_end, "PF"), (pf_end, duration, "FL")];

    // Planted episodes of the coupled state inside the coupled procedure.
    let rate = WORKLOAD_RATE_HZ;
    let coupling = profile.error_coupling.as_ref().filter(|c| c.strength > 0.0);
    let mut episodes: Vec<(f64, f64)> = Vec::new();
    if let Some(c) = coupling {
        for (start, end, label) in &procedures {
            if *label != c.procedure || rng.gen::<f64>() >= c.strength {
                continue;
            }
            let len = end - start;
            let frac = rng.gen_range(0.3..0.9);
            let ep_len = len * frac;
            let ep_start = start + rng.gen::<f64>() * (len - ep_len);
            let a = (ep_start * rate).ceil() / rate;
            let b = ((ep_start + ep_len) * rate).floor() / rate;
            if b - a >= 1.0 {
                episodes.push((a, b));
            }
        }
    }

    // Workload chains.
    let n_samples = (duration * rate).ceil() as usize;
    let times: Vec<f64> = (0..n_samples).map(|k| k as f64 / rate).filter(|&t| t < duration).collect();
    let switch_p = 1.0 / (MEAN_DWELL_S * rate);
    let mut workload = Vec::new();
    for category in WorkloadCategory::ALL {
        let bias = profile.bias(category);
        let planted = coupling.filter(|c| c.category == category);
        let mut rows = Vec::with_capacity(times.len());
        let mut current = pick(rng, &bias).unwrap_or(1);
        let mut ep = 0;
        for &t in &times {
            let state_idx = match planted {
                Some(c) => {
                    let x = c.state as usize;
                    while ep < episodes.len() && episodes[ep].1 <= t {
                        ep += 1;
                    }
                    let in_episode = ep < episodes.len() && episodes[ep].0 <= t;
                    if in_episode {
                        current = x;
                    } else {
                        let mut outside = bias;
                        outside[x] *= 1.0 - c.strength;
                        let leave_forced = current == x && rng.gen::<f64>() < c.strength;
                        if leave_forced || rng.gen::<f64>() < switch_p {
                            let mut w = outside;
                            w[current] = 0.0;
                            if let Some(next) = pick(rng, &w) {
                                current = next;
                            }
                        }
                    }
                    current
                }
                None => {
                    if rng.gen::<f64>() < switch_p {
                        let mut w = bias;
                        w[current] = 0.0;
                        if let Some(next) = pick(rng, &w) {
                            current = next;
                        }
                    }
                    current
                }
            };
            let confidence = ms(rng.gen_range(0.55..0.99));
            rows.push((t, MentalState::ALL[state_idx], confidence));
        }
        workload.push((category, rows));
    }

    // Errors: one per planted episode, shrunk inside it, plus uniform sprinkles.
    let mut errors: Vec<(f64, f64)> = Vec::new();
    for &(a, b) in &episodes {
        let d1 = rng.gen_range(0.05..0.5);
        let d2 = rng.gen_range(0.05..0.5);
        let (s, e) = (ms(a + d1), ms(b - d2));
        if e > s {
            errors.push((s, e));
        }
    }
    let uncoupled = profile.error_rate() * coupling.map_or(1.0, |c| 1.0 - c.strength);
    let expected = uncoupled * duration / 60.0;
    let count = (expected * rng.gen_range(0.8..1.2)).round() as usize;
    let planted_errors = errors.len();
    for _ in 0..count {
        for _attempt in 0..20 {
            let len = rng.gen_range(0.5..4.0);
            let start = ms(rng.gen::<f64>() * (duration - len));
            let end = ms(start + len);
            let clear = errors.iter().all(|&(a, b)| end + 0.5 < a || start > b + 0.5);
            let inside_episode = episodes.iter().any(|&(a, b)| end > a && start < b);
            if clear && !inside_episode && end <= duration {
                errors.push((start, end));
                break;
            }
        }
    }
    debug_assert!(errors.len() >= planted_errors);
    errors.sort_by(|a, b| a.0.total_cmp(&b.0));

    let imu = synth_imu(rng, profile, duration, spec.sensor_rate_hz);
    let gaze = synth_gaze(rng, profile, duration, spec.sensor_rate_hz);

    SessionData {
        truth: SessionTruth {
            id,
            subject: profile.subject.clone(),
            trial: trial.to_string(),
            duration_s: duration,
            skill: profile.skill,
            motion_style: profile.motion_style,
            error_coupling: profile.error_coupling.clone(),
            procedure_occurrences: procedures.len(),
        },
        procedures: Some(procedures),
        errors: Some(errors),
        phases: Some(phases),
        workload: Some(workload),
        imu: Some(imu),
        gaze: Some(gaze),
    }
}

fn sensor_times(duration: f64, rate: f64) -> Vec<f64> {
    let n = (duration * rate).ceil() as usize;
    (0..n).map(|k| k as f64 / rate).filter(|&t| t < duration).collect()
}

/// First-order low-pass noise with the given stationary standard deviation.
struct Drift {
    value: f64,
    alpha: f64,
    step: f64,
}

impl Drift {
    fn new(alpha: f64, std: f64) -> Self {
        Drift {
            value: 0.0,
            alpha,
            step: std * (1.0 - alpha * alpha).sqrt(),
        }
    }

    fn next(&mut self, rng: &mut ChaCha8Rng) -> f64 {
        self.value = self.alpha * self.value + self.step * gauss(rng);
        self.value
    }
}

fn synth_imu(rng: &mut ChaCha8Rng, profile: &ProfileSpec, duration: f64, rate: f64) -> Vec<(f64, [f64; 9])> {
    let times = sensor_times(duration, rate);
    let scale = match profile.skill {
        Skill::Expert => 1.0,
        Skill::Novice => 1.4,
    };
    let mut out = Vec::with_capacity(times.len());
    match profile.motion_style {
        MotionStyle::Smooth => {
            // doubly smoothed drift: slow, continuous body motion
            let mut coarse: Vec<Drift> = (0..9).map(|_| Drift::new(0.995, 1.0)).collect();
            let mut fine: Vec<Drift> = (0..9).map(|_| Drift::new(0.9, 1.0)).collect();
            let amp = [0.4, 0.4, 0.4, 0.12, 0.12, 0.12, 0.8, 0.8, 0.8];
            for &t in &times {
                let mut row = [0.0; 9];
                for c in 0..9 {
                    let slow = coarse[c].next(rng);
                    let smooth = fine[c].alpha * fine[c].value + (1.0 - fine[c].alpha) * slow;
                    fine[c].value = smooth;
                    row[c] = amp[c] * scale * smooth + 0.01 * gauss(rng);
                }
                row[2] += GRAVITY;
                for c in 0..3 {
                    row[6 + c] += MAG_FIELD[c];
                }
                out.push((t, row.map(|v| (v * 1e5).round() / 1e5)));
            }
        }
        MotionStyle::StopStart => {
            // rest plateaus alternating with bursts of vigorous motion
            let mut i = 0;
            let mut moving = rng.gen::<bool>();
            while i < times.len() {
                let seg_s = if moving { rng.gen_range(1.5..4.0) } else { rng.gen_range(3.0..10.0) };
                let seg_n = ((seg_s * rate) as usize).max(1);
                let amp = if moving { rng.gen_range(2.0..5.0) * scale } else { 0.0 };
                for &t in times.iter().skip(i).take(seg_n) {
                    let mut row = [0.0; 9];
                    for (c, v) in row.iter_mut().enumerate() {
                        let noise = gauss(rng);
                        *v = match c {
                            0..=2 => amp * noise + 0.02 * gauss(rng),
                            3..=5 => 0.35 * amp * noise + 0.005 * gauss(rng),
                            _ => 0.5 * amp * noise + 0.05 * gauss(rng),
                        };
                    }
                    row[2] += GRAVITY;
                    for c in 0..3 {
                        row[6 + c] += MAG_FIELD[c];
                    }
                    out.push((t, row.map(|v| (v * 1e5).round() / 1e5)));
                }
                i += seg_n;
                moving = !moving;
            }
        }
    }
    out
}

fn normalize3(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n > 0.0 {
        v.map(|x| x / n)
    } else {
        [0.0, 0.0, 1.0]
    }
}

fn synth_gaze(rng: &mut ChaCha8Rng, profile: &ProfileSpec, duration: f64, rate: f64) -> Vec<(f64, [f64; 6])> {
    let times = sensor_times(duration, rate);
    let step = match profile.motion_style {
        MotionStyle::Smooth => 0.01,
        MotionStyle::StopStart => 0.03,
    };
    let mut origin = [0.0, 1.6, 0.0];
    let mut dir = normalize3([0.0, 0.0, 1.0]);
    let mut out = Vec::with_capacity(times.len());
    for &t in &times {
        for o in origin.iter_mut() {
            *o += 0.002 * gauss(rng);
        }
        dir = normalize3([
            dir[0] + step * gauss(rng),
            dir[1] + step * gauss(rng),
            dir[2] + step * gauss(rng),
        ]);
        let row = [origin[0], origin[1], origin[2], dir[0], dir[1], dir[2]];
        out.push((t, row.map(|v| (v * 1e5).round() / 1e5)));
    }
    out
}

const STREAM_FILES: [&str; 6] = ["procedures", "errors", "phases", "workload", "imu", "gaze"];

fn validate_degradations(deg: &Degradations, sessions: &[SessionData]) -> Result<()> {
    for drop in &deg.drop_streams {
        if !sessions.iter().any(|s| s.truth.id == drop.session) {
            return Err(Error::Spec(format!("drop_streams: unknown session `{}`", drop.session)));
        }
        if let Some(bad) = drop.streams.iter().find(|s| !STREAM_FILES.contains(&s.as_str())) {
            return Err(Error::Spec(format!("drop_streams: unknown stream `{bad}`")));
        }
    }
    if let Some(g) = &deg.inject_gaps {
        if !(g.min_len_s > 0.0 && g.min_len_s <= g.max_len_s && g.max_len_s.is_finite()) {
            return Err(Error::Spec("inject_gaps: need 0 < min_len_s <= max_len_s".into()));
        }
        if let Some(bad) = g.streams.iter().find(|s| !["workload", "imu", "gaze"].contains(&s.as_str())) {
            return Err(Error::Spec(format!("inject_gaps: `{bad}` is not a sampled stream")));
        }
        if g.sessions == Some(0) {
            return Err(Error::Spec("inject_gaps: sessions must be positive".into()));
        }
    }
    Ok(())
}

fn report_keys(stream: &str) -> Vec<String> {
    match stream {
        "workload" => WorkloadCategory::ALL.iter().map(|c| c.stream_key().to_string()).collect(),
        other => vec![other.to_string()],
    }
}

fn apply_degradations(
    spec: &GeneratorSpec,
    deg: &Degradations,
    sessions: &mut [SessionData],
) -> Result<(Vec<StreamDrop>, Vec<InjectedGap>)> {
    let mut gaps = Vec::new();
    if let Some(g) = deg.inject_gaps.as_ref().filter(|g| g.count > 0) {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ DEGRADE_SALT);
        let targets = g.sessions.unwrap_or(sessions.len()).min(sessions.len());
        let mut placed: Vec<Vec<(f64, f64)>> = vec![Vec::new(); targets];
        for i in 0..g.count {
            let si = i % targets;
            let session = &mut sessions[si];
            let duration = session.truth.duration_s;
            let mut found = None;
            for _attempt in 0..1000 {
                let len = rng.gen_range(g.min_len_s..=g.max_len_s);
                if len + 2.0 > duration {
                    break;
                }
                let start = ms(rng.gen_range(1.0..(duration - len - 1.0)));
                let end = ms(start + len);
                if placed[si].iter().all(|&(a, b)| end + 2.0 < a || start > b + 2.0) {
                    found = Some((start, end));
                    break;
                }
            }
            let (start, end) = found.ok_or_else(|| {
                Error::Spec(format!("inject_gaps: cannot place gap {i} in session {}", session.truth.id))
            })?;
            placed[si].push((start, end));
            let cut = |t: f64| t >= start && t < end;
            for stream in &g.streams {
                match stream.as_str() {
                    "workload" => {
                        if let Some(w) = session.workload.as_mut() {
                            for (_, rows) in w.iter_mut() {
                                rows.retain(|r| !cut(r.0));
                            }
                        }
                    }
                    "imu" => {
                        if let Some(rows) = session.imu.as_mut() {
                            rows.retain(|r| !cut(r.0));
                        }
                    }
                    "gaze" => {
                        if let Some(rows) = session.gaze.as_mut() {
                            rows.retain(|r| !cut(r.0));
                        }
                    }
                    _ => unreachable!("validated"),
                }
                gaps.push(InjectedGap {
                    session_id: session.truth.id.clone(),
                    stream: stream.clone(),
                    report_streams: report_keys(stream),
                    start_s: start,
                    end_s: end,
                });
            }
        }
    }
    for drop in &deg.drop_streams {
        let session = sessions
            .iter_mut()
            .find(|s| s.truth.id == drop.session)
            .expect("validated");
        for stream in &drop.streams {
            match stream.as_str() {
                "procedures" => session.procedures = None,
                "errors" => session.errors = None,
                "phases" => session.phases = None,
                "workload" => session.workload = None,
                "imu" => session.imu = None,
                "gaze" => session.gaze = None,
                _ => unreachable!("validated"),
            }
        }
    }
    Ok((deg.drop_streams.clone(), gaps))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_session(s: &SessionData, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for stem in STREAM_FILES {
        let path = dir.join(format!("{stem}.csv"));
        if path.exists() {
            fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
        }
    }
    let meta = SessionMeta {
        subject: s.truth.subject.clone(),
        trial: s.truth.trial.clone(),
        duration_s: s.truth.duration_s,
        video: None,
    };
    write_json(&dir.join(SESSION_FILE), &meta)?;

    if let Some(rows) = &s.procedures {
        let mut out = String::from("start_s,end_s,label\n");
        for (a, b, l) in rows {
            let _ = writeln!(out, "{a:.3},{b:.3},{l}");
        }
        write_text(&dir.join("procedures.csv"), &out)?;
    }
    if let Some(rows) = &s.errors {
        let mut out = String::from("start_s,end_s\n");
        for (a, b) in rows {
            let _ = writeln!(out, "{a:.3},{b:.3}");
        }
        write_text(&dir.join("errors.csv"), &out)?;
    }
    if let Some(rows) = &s.phases {
        let mut out = String::from("start_s,end_s,phase\n");
        for (a, b, p) in rows {
            let _ = writeln!(out, "{a:.3},{b:.3},{p}");
        }
        write_text(&dir.join("phases.csv"), &out)?;
    }
    if let Some(series) = &s.workload {
        let mut out = String::from("t_s,category,state,confidence\n");
        let longest = series.iter().map(|(_, r)| r.len()).max().unwrap_or(0);
        for i in 0..longest {
            for (category, rows) in series {
                if let Some((t, state, conf)) = rows.get(i) {
                    let _ = writeln!(out, "{t:.3},{category},{state},{conf:.3}");
                }
            }
        }
        write_text(&dir.join("workload.csv"), &out)?;
    }
    if let Some(rows) = &s.imu {
        let mut out = String::from("t_s,ax,ay,az,gx,gy,gz,mx,my,mz\n");
        for (t, v) in rows {
            let _ = write!(out, "{t:.3}");
            for x in v {
                let _ = write!(out, ",{x:.5}");
            }
            out.push('\n');
        }
        write_text(&dir.join("imu.csv"), &out)?;
    }
    if let Some(rows) = &s.gaze {
        let mut out = String::from("t_s,ox,oy,oz,dx,dy,dz\n");
        for (t, v) in rows {
            let _ = write!(out, "{t:.3}");
            for x in v {
                let _ = write!(out, ",{x:.5}");
            }
            out.push('\n');
        }
        write_text(&dir.join("gaze.csv"), &out)?;
    }
    Ok(())
}

/// Ready-made specs used by the tests, the acceptance suite and the demo.
pub mod presets {
    use super::*;

    fn trials(n: usize) -> Vec<String> {
        (1..=n).map(|t| t.to_string()).collect()
    }

    fn skill(i: usize) -> Skill {
        if i.is_multiple_of(2) {
            Skill::Expert
        } else {
            Skill::Novice
        }
    }

    /// 4 subjects × 3 trials; every occurrence of `e` carries attention
    /// overload with an error on it. 216 procedure occurrences.
    pub fn planted_coupling(seed: u64) -> GeneratorSpec {
        let coupling = ErrorCoupling {
            procedure: "e".into(),
            category: WorkloadCategory::Attention,
            state: MentalState::Overload,
            strength: 1.0,
        };
        let profiles = (0..4)
            .map(|i| ProfileSpec::new(format!("p{}", i + 1), skill(i), MotionStyle::Smooth).with_coupling(coupling.clone()))
            .collect();
        let mut spec = GeneratorSpec::new(seed, profiles, trials(3));
        spec.occurrences_per_procedure = [3, 3];
        spec
    }

    /// Like [`planted_coupling`] with uniformly sprinkled errors and twice the trials.
    pub fn null_effect(seed: u64) -> GeneratorSpec {
        let profiles = (0..4)
            .map(|i| ProfileSpec::new(format!("p{}", i + 1), skill(i), MotionStyle::Smooth))
            .collect();
        let mut spec = GeneratorSpec::new(seed, profiles, trials(6));
        spec.occurrences_per_procedure = [3, 3];
        spec
    }

    /// `per_style` smooth-motion subjects followed by as many stop-start ones, one trial each.
    pub fn motion_regimes(seed: u64, per_style: usize) -> GeneratorSpec {
        let profiles = (0..2 * per_style)
            .map(|i| {
                let style = if i < per_style {
                    MotionStyle::Smooth
                } else {
                    MotionStyle::StopStart
                };
                ProfileSpec::new(format!("p{:02}", i + 1), skill(i), style)
            })
            .collect();
        GeneratorSpec::new(seed, profiles, trials(1))
    }

    /// 12 sessions mixing motion styles and a planted coupling on half the subjects.
    pub fn demo(seed: u64) -> GeneratorSpec {
        let coupling = ErrorCoupling {
            procedure: "e".into(),
            category: WorkloadCategory::Attention,
            state: MentalState::Overload,
            strength: 1.0,
        };
        let profiles = (0..4)
            .map(|i| {
                let style = if i < 2 { MotionStyle::Smooth } else { MotionStyle::StopStart };
                let p = ProfileSpec::new(format!("p{}", i + 1), skill(i), style);
                if i % 2 == 1 {
                    p.with_coupling(coupling.clone())
                } else {
                    p
                }
            })
            .collect();
        GeneratorSpec::new(seed, profiles, trials(3))
    }
}
