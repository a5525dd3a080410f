use serde::{Deserialize, Serialize};

use super::resample::{resample_linear, resample_nearest, z_normalize};
use super::StreamKind;
use crate::model::{SensorSeries, Session, SessionId, WorkloadCategory};
use crate::{Error, Result, Scalar};

/// Equal-length feature channels derived from one session stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureChannelSet<T = f64> {
    pub session_id: SessionId,
    pub stream_kind: StreamKind,
    pub channels: Vec<(String, Vec<T>)>,
}

impl<T: Scalar> FeatureChannelSet<T> {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |(_, v)| v.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn norm3(v: &[f64]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Angle in radians between two 3-vectors; zero if either has zero length.
pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let c = norm3(&cross);
    if c == 0.0 && dot == 0.0 {
        0.0
    } else {
        c.atan2(dot)
    }
}

/// Per-sample derived sensor quantities, keyed by the derived channel names
/// the query layer also exposes.
pub fn derived_channel(series: &SensorSeries, name: &str) -> Option<Vec<f64>> {
    use crate::model::SensorKind::*;
    let n = series.len();
    let per_row = |f: &dyn Fn(&[f64]) -> f64| (0..n).map(|i| f(series.row(i))).collect::<Vec<f64>>();
    let per_step = |f: &dyn Fn(&[f64], &[f64]) -> f64| {
        let mut out = Vec::with_capacity(n);
        if n > 0 {
            out.push(0.0);
        }
        out.extend((1..n).map(|i| f(series.row(i - 1), series.row(i))));
        out
    };
    match (series.kind(), name) {
        (Imu, "accel_mag") => Some(per_row(&|r| norm3(&r[0..3]))),
        (Imu, "gyro_mag") => Some(per_row(&|r| norm3(&r[3..6]))),
        (Imu, "mag_mag") => Some(per_row(&|r| norm3(&r[6..9]))),
        (Gaze, "gaze_angular_speed") => Some(per_step(&|a, b| angle_between(&a[3..6], &b[3..6]))),
        (Gaze, "gaze_origin_speed") => Some(per_step(&|a, b| {
            norm3(&[b[0] - a[0], b[1] - a[1], b[2] - a[2]])
        })),
        _ => None,
    }
}

pub const IMU_DERIVED: [&str; 3] = ["accel_mag", "gyro_mag", "mag_mag"];
pub const GAZE_DERIVED: [&str; 2] = ["gaze_angular_speed", "gaze_origin_speed"];

fn sensor_channels<T: Scalar>(series: &SensorSeries, names: &[&str], len: usize) -> Result<Vec<(String, Vec<T>)>> {
    names
        .iter()
        .map(|&name| {
            let values = derived_channel(series, name).expect("derived channel defined for this kind");
            let points: Vec<(T, T)> = series
                .times()
                .iter()
                .zip(values)
                .map(|(&t, v)| (T::of(t), T::of(v)))
                .collect();
            let mut out = resample_linear(&points, len).ok_or_else(|| {
                Error::InvalidArgument(format!("{name}: fewer than 2 samples"))
            })?;
            z_normalize(&mut out);
            Ok((name.to_string(), out))
        })
        .collect()
}

/// Builds the embedding channels of one stream resampled to `len` points.
///
/// - IMU: accelerometer, gyroscope and magnetometer magnitudes, z-normalized.
/// - Gaze: angular speed of the direction and origin displacement per sample, z-normalized.
/// - Fnirs: one ordinal channel per workload category (−1/0/+1), nearest-neighbour
///   resampled and left unnormalized.
pub fn build_channels<T: Scalar>(session: &Session, kind: StreamKind, len: usize) -> Result<FeatureChannelSet<T>> {
    if len < 2 {
        return Err(Error::InvalidArgument(format!("series length must be >= 2, got {len}")));
    }
    let channels = match kind {
        StreamKind::Imu => {
            let imu = session.imu().ok_or_else(|| Error::StreamAbsent("imu".into()))?;
            sensor_channels(imu, &IMU_DERIVED, len)?
        }
        StreamKind::Gaze => {
            let gaze = session.gaze().ok_or_else(|| Error::StreamAbsent("gaze".into()))?;
            sensor_channels(gaze, &GAZE_DERIVED, len)?
        }
        StreamKind::Fnirs => WorkloadCategory::ALL
            .iter()
            .map(|&category| {
                let series = session
                    .workload(category)
                    .ok_or_else(|| Error::StreamAbsent(category.stream_key().into()))?;
                let points: Vec<(T, T)> = series
                    .samples()
                    .iter()
                    .map(|s| (T::of(s.t_s), T::of(s.state.ordinal())))
                    .collect();
                let out = resample_nearest(&points, len).ok_or_else(|| {
                    Error::InvalidArgument(format!("{}: fewer than 2 samples", category.stream_key()))
                })?;
                Ok((category.as_str().to_string(), out))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(FeatureChannelSet {
        session_id: session.id().clone(),
        stream_kind: kind,
        channels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MentalState, SensorKind, WorkloadSample, WorkloadSeries};

    fn imu_session(row: impl Fn(usize) -> Vec<f64>) -> Session {
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.05).collect();
        let rows = (0..50).map(row).collect();
        let imu = SensorSeries::new(SensorKind::Imu, times, rows).unwrap();
        Session::builder("s", "p", "t", 10.0).imu(imu).build().unwrap()
    }

    #[test]
    fn constant_accel_normalizes_to_zero() {
        let s = imu_session(|_| vec![0.0, 0.0, 9.81, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let set: FeatureChannelSet<f64> = build_channels(&s, StreamKind::Imu, 32).unwrap();
        assert_eq!(set.channels.len(), 3);
        for (_, ch) in &set.channels {
            assert_eq!(ch.len(), 32);
            assert!(ch.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn still_gaze_has_zero_angular_speed() {
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let rows = (0..20).map(|i| vec![i as f64 * 0.01, 0.0, 0.0, 0.0, 0.0, 1.0]).collect();
        let gaze = SensorSeries::new(SensorKind::Gaze, times, rows).unwrap();
        let raw = derived_channel(&gaze, "gaze_angular_speed").unwrap();
        assert!(raw.iter().all(|&v| v == 0.0));
        let origin = derived_channel(&gaze, "gaze_origin_speed").unwrap();
        assert_eq!(origin[0], 0.0);
        assert!((origin[5] - 0.01).abs() < 1e-12);
    }

    #[test]
    fn optimal_workload_encodes_to_zero() {
        let mut b = Session::builder("s", "p", "t", 10.0);
        for category in WorkloadCategory::ALL {
            let samples = (0..30)
                .map(|i| WorkloadSample {
                    t_s: i as f64 * 0.1,
                    state: MentalState::Optimal,
                    confidence: 1.0,
                })
                .collect();
            b = b.workload(WorkloadSeries::new(category, samples, 10.0).unwrap());
        }
        let set: FeatureChannelSet<f32> = build_channels(&b.build().unwrap(), StreamKind::Fnirs, 16).unwrap();
        assert_eq!(set.channels.len(), 3);
        assert!(set.channels.iter().all(|(_, c)| c.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn absent_stream_is_reported() {
        let s = imu_session(|_| vec![0.0; 9]);
        let err = build_channels::<f64>(&s, StreamKind::Gaze, 16).unwrap_err();
        assert!(matches!(err, Error::StreamAbsent(_)));
    }

    #[test]
    fn angle_between_orthogonal() {
        let a = angle_between(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]);
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
