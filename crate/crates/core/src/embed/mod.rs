//! Shapelet-transform embedding of session streams into 2D.
//!
//! Pipeline: [`build_channels`] → [`fit_shapelets`] → [`shapelet_transform`]
//! → [`project_2d`]. Shapelets are sampled at random (seeded) rather than
//! learned, since there are no labels to supervise on.

mod channels;
mod pca;
mod resample;
mod shapelet;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use channels::{angle_between, build_channels, derived_channel, FeatureChannelSet, GAZE_DERIVED, IMU_DERIVED};
pub use pca::{project_2d, symmetric_eigen};
pub use resample::{resample_linear, resample_nearest, z_normalize, DEGENERATE_STD};
pub use shapelet::{fit_shapelets, shapelet_distance, shapelet_transform, Shapelet, ShapeletSource};

use crate::model::{Session, SessionId};
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamKind {
    Imu,
    Gaze,
    Fnirs,
}

impl StreamKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StreamKind::Imu => "imu",
            StreamKind::Gaze => "gaze",
            StreamKind::Fnirs => "fnirs",
        }
    }
}

impl fmt::Display for StreamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StreamKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "imu" => Ok(StreamKind::Imu),
            "gaze" => Ok(StreamKind::Gaze),
            "fnirs" => Ok(StreamKind::Fnirs),
            other => Err(format!("unknown embedding stream `{other}` (expected imu, gaze or fnirs)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmbedParams {
    /// Number of shapelets.
    pub k: usize,
    /// Shapelet length.
    pub m: usize,
    /// Resampled series length.
    pub len: usize,
    pub seed: u64,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams {
            k: 64,
            m: 32,
            len: 256,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedPoint<T = f64> {
    pub session_id: SessionId,
    pub x: T,
    pub y: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Omission {
    pub session_id: SessionId,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Embedding2D<T = f64> {
    pub stream_kind: StreamKind,
    pub params: EmbedParams,
    pub seed: u64,
    /// One point per embeddable session, in session-id order.
    pub points: Vec<EmbeddedPoint<T>>,
    /// Sessions lacking the stream.
    pub omitted: Vec<Omission>,
}

/// Embeds every session carrying `kind` into 2D.
///
/// Sessions are processed in session-id order regardless of input order, so
/// permuting the input never changes a coordinate.
pub fn embed_sessions<T: Scalar>(sessions: &[&Session], kind: StreamKind, params: EmbedParams) -> Result<Embedding2D<T>> {
    let mut ordered: Vec<&Session> = sessions.to_vec();
    ordered.sort_by(|a, b| a.id().cmp(b.id()));

    let built: Vec<(SessionId, Result<FeatureChannelSet<T>>)> = ordered
        .par_iter()
        .map(|s| (s.id().clone(), build_channels(s, kind, params.len)))
        .collect();
    let mut sets = Vec::new();
    let mut omitted = Vec::new();
    for (session_id, res) in built {
        match res {
            Ok(set) => sets.push(set),
            Err(err @ (Error::StreamAbsent(_) | Error::InvalidArgument(_))) if params.len >= 2 => {
                omitted.push(Omission {
                    session_id,
                    reason: err.to_string(),
                })
            }
            Err(err) => return Err(err),
        }
    }
    if sets.is_empty() {
        return Err(Error::NoEmbeddableSessions(kind.as_str().into()));
    }

    let shapelets = fit_shapelets(&sets, params.k, params.m, params.seed)?;
    let features: Vec<Vec<T>> = sets
        .par_iter()
        .map(|set| shapelet_transform(set, &shapelets))
        .collect::<Result<_>>()?;
    let coords = project_2d(&features)?;
    let points = sets
        .iter()
        .zip(coords)
        .map(|(set, [x, y])| EmbeddedPoint {
            session_id: set.session_id.clone(),
            x,
            y,
        })
        .collect();
    Ok(Embedding2D {
        stream_kind: kind,
        params,
        seed: params.seed,
        points,
        omitted,
    })
}
