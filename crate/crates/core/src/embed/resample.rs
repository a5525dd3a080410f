use crate::Scalar;

/// Evenly spaced sample times spanning `[first, last]`.
fn grid<T: Scalar>(first: T, last: T, len: usize) -> impl Iterator<Item = T> {
    let span = last - first;
    let steps = T::of_usize(len.saturating_sub(1).max(1));
    (0..len).map(move |j| {
        if j + 1 == len && len > 1 {
            last
        } else {
            first + span * T::of_usize(j) / steps
        }
    })
}

/// Linear interpolation of `(t, v)` points (strictly increasing `t`) at
/// `len` times spanning the first to the last timestamp.
///
/// `None` with fewer than two points.
pub fn resample_linear<T: Scalar>(points: &[(T, T)], len: usize) -> Option<Vec<T>> {
    if points.len() < 2 {
        return None;
    }
    let first = points[0].0;
    let last = points[points.len() - 1].0;
    let mut seg = 0;
    let out = grid(first, last, len)
        .map(|tau| {
            while seg + 2 < points.len() && points[seg + 1].0 < tau {
                seg += 1;
            }
            let (t0, v0) = points[seg];
            let (t1, v1) = points[seg + 1];
            if tau <= t0 {
                v0
            } else if tau >= t1 {
                v1
            } else {
                v0 + (v1 - v0) * ((tau - t0) / (t1 - t0))
            }
        })
        .collect();
    Some(out)
}

/// Nearest-neighbour resampling for ordinal labels; ties go to the earlier
/// sample. `None` with fewer than two points.
pub fn resample_nearest<T: Scalar>(points: &[(T, T)], len: usize) -> Option<Vec<T>> {
    if points.len() < 2 {
        return None;
    }
    let first = points[0].0;
    let last = points[points.len() - 1].0;
    let mut seg = 0;
    let out = grid(first, last, len)
        .map(|tau| {
            while seg + 2 < points.len() && points[seg + 1].0 < tau {
                seg += 1;
            }
            let (t0, v0) = points[seg];
            let (t1, v1) = points[seg + 1];
            if tau - t0 <= t1 - tau {
                v0
            } else {
                v1
            }
        })
        .collect();
    Some(out)
}

/// Below this standard deviation a channel normalizes to all zeros.
pub const DEGENERATE_STD: f64 = 1e-12;

/// Z-normalization with population standard deviation.
pub fn z_normalize<T: Scalar>(values: &mut [T]) {
    if values.is_empty() {
        return;
    }
    let n = T::of_usize(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    let std = var.sqrt();
    if !(std >= T::of(DEGENERATE_STD)) {
        values.iter_mut().for_each(|v| *v = T::zero());
        return;
    }
    values.iter_mut().for_each(|v| *v = (*v - mean) / std);
}
