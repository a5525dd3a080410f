//! Deterministic two-component PCA.

use crate::{Error, Result, Scalar};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// `a` is row-major `n × n`. Returns eigenvalues in descending order and the
/// matching unit eigenvectors (as rows). Ties keep their original index order.
pub fn symmetric_eigen<T: Scalar>(a: &[T], n: usize) -> (Vec<T>, Vec<Vec<T>>) {
    let mut a = a.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let total: T = a.iter().map(|&x| x * x).sum::<T>();
    let tiny = T::epsilon() * T::epsilon() * total;
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off = off + a[p * n + q] * a[p * n + q];
            }
        }
        if off <= tiny || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let two = T::of(2.0);
                let theta = (aqq - app) / (two * apq);
                let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .partial_cmp(&a[i * n + i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k * n + i]).collect())
        .collect();
    (values, vectors)
}

/// Projects row vectors onto their top two principal axes.
///
/// Features are centred first. Each axis is oriented so that its
/// largest-magnitude loading is positive. Axes with (numerically) zero variance
/// yield a zero coordinate.
pub fn project_2d<T: Scalar>(vectors: &[Vec<T>]) -> Result<Vec<[T; 2]>> {
    let n = vectors.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no feature vectors to project".into()));
    }
    let f = vectors[0].len();
    if vectors.iter().any(|v| v.len() != f) {
        return Err(Error::InvalidArgument("feature vectors differ in length".into()));
    }
    if vectors.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite feature value".into()));
    }
    let mut centred: Vec<Vec<T>> = vectors.to_vec();
    for j in 0..f {
        let mean = vectors.iter().map(|v| v[j]).sum::<T>() / T::of_usize(n);
        for row in centred.iter_mut() {
            row[j] = row[j] - mean;
        }
    }

    // Eigen-decompose the smaller of the Gram (n × n) and scatter (f × f) matrices.
    let axes: Vec<(T, Vec<T>)> = if n <= f {
        let mut gram = vec![T::zero(); n * n];
        for i in 0..n {
            for k in i..n {
                let d = dot(&centred[i], &centred[k]);
                gram[i * n + k] = d;
                gram[k * n + i] = d;
            }
        }
        let (values, vectors) = symmetric_eigen(&gram, n);
        values
            .into_iter()
            .zip(vectors)
            .take(2)
            .map(|(lambda, u)| {
                let mut axis = vec![T::zero(); f];
                for (row, &ui) in centred.iter().zip(&u) {
                    for (a, &x) in axis.iter_mut().zip(row) {
                        *a = *a + x * ui;
                    }
                }
                let norm = dot(&axis, &axis).sqrt();
                if norm > T::zero() {
                    axis.iter_mut().for_each(|a| *a = *a / norm);
                }
                (lambda, axis)
            })
            .collect()
    } else {
        let mut scatter = vec![T::zero(); f * f];
        for row in &centred {
            for i in 0..f {
                for k in i..f {
                    scatter[i * f + k] = scatter[i * f + k] + row[i] * row[k];
                }
            }
        }
        for i in 0..f {
            for k in 0..i {
                scatter[i * f + k] = scatter[k * f + i];
            }
        }
        let (values, vectors) = symmetric_eigen(&scatter, f);
        values.into_iter().zip(vectors).take(2).collect()
    };

    let trace: T = centred.iter().map(|r| dot(r, r)).sum();
    let floor = trace * T::epsilon().sqrt();
    let mut coords = vec![[T::zero(); 2]; n];
    for (slot, (lambda, mut axis)) in axes.into_iter().enumerate() {
        if !(lambda > floor) || trace == T::zero() {
            continue;
        }
        let mut pivot = 0;
        for (j, a) in axis.iter().enumerate() {
            if a.abs() > axis[pivot].abs() {
                pivot = j;
            }
        }
        if axis[pivot] < T::zero() {
            axis.iter_mut().for_each(|a| *a = -*a);
        }
        for (c, row) in coords.iter_mut().zip(&centred) {
            c[slot] = dot(row, &axis);
        }
    }
    Ok(coords)
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_vectors_collapse_to_origin() {
        let v = vec![vec![1.0, 2.0, 3.0]; 4];
        assert!(project_2d(&v).unwrap().iter().all(|p| p == &[0.0, 0.0]));
    }

    #[test]
    fn rank_one_data_keeps_spacing() {
        let v: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64, 0.0, 0.0, 0.0]).collect();
        let p = project_2d(&v).unwrap();
        for i in 0..4 {
            assert!((p[i][0] - (i as f64 - 1.5)).abs() < 1e-12, "{p:?}");
            assert_eq!(p[i][1], 0.0);
        }
    }

    #[test]
    fn both_paths_agree() {
        // 6 points in 3-D uses the scatter path, the transposed problem the Gram path
        let v: Vec<Vec<f64>> = vec![
            vec![1.0, 0.2, -0.5],
            vec![-0.3, 1.1, 0.4],
            vec![2.0, -0.7, 0.0],
            vec![0.5, 0.5, 0.5],
            vec![-1.2, 0.1, 0.9],
            vec![0.0, -1.5, 0.3],
        ];
        let scatter_path = project_2d(&v).unwrap();
        let padded: Vec<Vec<f64>> = v
            .iter()
            .map(|r| r.iter().copied().chain(std::iter::repeat_n(0.0, 5)).collect())
            .collect();
        let gram_path = project_2d(&padded).unwrap();
        for (a, b) in scatter_path.iter().zip(&gram_path) {
            assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn eigen_of_diagonal() {
        let (vals, _) = symmetric_eigen(&[1.0, 0.0, 0.0, 3.0], 2);
        assert_eq!(vals, vec![3.0, 1.0]);
    }
}
