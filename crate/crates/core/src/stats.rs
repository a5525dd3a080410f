//! Correlation kernels.
//!
//! Undefined results are `None`, never NaN: callers render missing markers
//! instead of a fabricated zero.

use crate::Scalar;

/// Minimum sample count for a defined Pearson coefficient.
pub const MIN_SAMPLES: usize = 3;

/// Sample Pearson correlation coefficient.
///
/// `None` when the lengths differ, fewer than [`MIN_SAMPLES`] points are given,
/// or either vector has zero variance.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Option<T> {
    if x.len() != y.len() || x.len() < MIN_SAMPLES {
        return None;
    }
    let n = T::of_usize(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if !(sxx > T::zero() && syy > T::zero()) {
        return None;
    }
    let r = sxy / (sxx * syy).sqrt();
    if !r.is_finite() {
        return None;
    }
    Some(r.max(-T::one()).min(T::one()))
}

/// First-order partial correlation of `s` and `e` controlling for `p`:
/// `(r_se − r_sp·r_ep) / √((1 − r_sp²)(1 − r_ep²))`.
///
/// `None` when either conditioning coefficient has magnitude 1.
pub fn partial_correlation<T: Scalar>(r_se: T, r_sp: T, r_ep: T) -> Option<T> {
    let one = T::one();
    if r_sp.abs() >= one || r_ep.abs() >= one {
        return None;
    }
    let denom = ((one - r_sp * r_sp) * (one - r_ep * r_ep)).sqrt();
    let r = (r_se - r_sp * r_ep) / denom;
    r.is_finite().then_some(r)
}
