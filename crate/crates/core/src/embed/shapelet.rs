use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FeatureChannelSet;
use crate::model::SessionId;
use crate::{Error, Result, Scalar};

/// Where a shapelet was cut from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeletSource {
    pub session_id: SessionId,
    pub channel: String,
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shapelet<T = f64> {
    pub values: Vec<T>,
    pub source: ShapeletSource,
}

/// Minimum over all windows of the root-mean-square difference between the
/// shapelet and a same-length window of `channel`.
pub fn shapelet_distance<T: Scalar>(shapelet: &[T], channel: &[T]) -> Result<T> {
    let m = shapelet.len();
    if m == 0 {
        return Err(Error::InvalidArgument("empty shapelet".into()));
    }
    if m > channel.len() {
        return Err(Error::InvalidArgument(format!(
            "shapelet length {m} exceeds channel length {}",
            channel.len()
        )));
    }
    let mut best = T::infinity();
    for window in channel.windows(m) {
        let mut acc = T::zero();
        for (&a, &b) in shapelet.iter().zip(window) {
            let d = a - b;
            acc = acc + d * d;
            if acc >= best {
                break;
            }
        }
        if acc < best {
            best = acc;
        }
    }
    Ok((best / T::of_usize(m)).sqrt())
}

/// Samples `k` distinct windows of length `m` uniformly from every channel of
/// every set. Candidates are enumerated in session-id order, then channel,
/// then offset, so the result depends only on the inputs and `seed`.
///
/// When fewer than `k` candidate windows exist, all of them are returned.
pub fn fit_shapelets<T: Scalar>(
    channel_sets: &[FeatureChannelSet<T>],
    k: usize,
    m: usize,
    seed: u64,
) -> Result<Vec<Shapelet<T>>> {
    if k == 0 {
        return Err(Error::InvalidArgument("shapelet count must be positive".into()));
    }
    if m < 2 {
        return Err(Error::InvalidArgument(format!("shapelet length must be >= 2, got {m}")));
    }
    if channel_sets.is_empty() {
        return Err(Error::InvalidArgument("no channel sets to sample from".into()));
    }
    let len = channel_sets[0].len();
    if channel_sets.iter().any(|s| s.channels.iter().any(|(_, c)| c.len() != len)) {
        return Err(Error::InvalidArgument("channel lengths differ".into()));
    }
    if m > len {
        return Err(Error::InvalidArgument(format!("shapelet length {m} exceeds series length {len}")));
    }

    let mut sets: Vec<&FeatureChannelSet<T>> = channel_sets.iter().collect();
    sets.sort_by(|a, b| a.session_id.cmp(&b.session_id));
    let per_channel = len - m + 1;
    let mut slots: Vec<(usize, usize)> = Vec::new();
    for (si, set) in sets.iter().enumerate() {
        for ci in 0..set.channels.len() {
            slots.push((si, ci));
        }
    }
    let total = slots.len() * per_channel;
    let k = k.min(total);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = index::sample(&mut rng, total, k).into_vec();
    picks.sort_unstable();
    Ok(picks
        .into_iter()
        .map(|p| {
            let (si, ci) = slots[p / per_channel];
            let offset = p % per_channel;
            let (name, values) = &sets[si].channels[ci];
            Shapelet {
                values: values[offset..offset + m].to_vec(),
                source: ShapeletSource {
                    session_id: sets[si].session_id.clone(),
                    channel: name.clone(),
                    offset,
                },
            }
        })
        .collect())
}

/// Feature vector of shapelet distances, shapelet-major:
/// entry `k * channels + c` is the distance of shapelet `k` to channel `c`.
pub fn shapelet_transform<T: Scalar>(set: &FeatureChannelSet<T>, shapelets: &[Shapelet<T>]) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(shapelets.len() * set.channels.len());
    for shapelet in shapelets {
        for (_, channel) in &set.channels {
            out.push(shapelet_distance(&shapelet.values, channel)?);
        }
    }
    Ok(out)
}
